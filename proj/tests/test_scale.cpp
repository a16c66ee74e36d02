#include <cmath>
#include <memory>
#include <random>

#include "doctest.h"
#include "errors.hpp"
#include "measure.hpp"
#include "scale.hpp"

using namespace dflab;

namespace {

// Independent oracle: ternary digit extraction in extended precision.
double cantor_oracle(double x, int depth) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    long double f = x;
    double out = 0.0, bit = 0.5;
    for (int k = 0; k < depth; ++k) {
        f *= 3.0L;
        int d = static_cast<int>(f);
        f -= d;
        if (d == 1) {
            out += bit;
            break;
        }
        if (d == 2) out += bit;
        bit *= 0.5;
    }
    return out;
}

double removed_series(double lambda, int n) {
    double sum = 0.0;
    for (int k = 1; k <= n; ++k) sum += std::ldexp(1.0, k - 1) * lambda * std::ldexp(1.0, 1 - 2 * k);
    return sum;
}

}  // namespace

TEST_CASE("cantor function matches the ternary expansion oracle") {
    CHECK(cantor_function(0.0, 40) == 0.0);
    CHECK(cantor_function(1.0, 40) == 1.0);
    CHECK(cantor_function(-0.5, 40) == 0.0);
    CHECK(cantor_function(1.5, 40) == 1.0);
    CHECK(std::abs(cantor_function(1.0 / 3.0, 40) - 0.5) < 1e-10);
    CHECK(std::abs(cantor_function(0.25, 40) - 1.0 / 3.0) <= std::ldexp(1.0, -40));

    std::mt19937_64 rng(20240911);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        const double x = uni(rng);
        CHECK(std::abs(cantor_function(x, 40) - cantor_oracle(x, 40)) < 1e-9);
    }
    CHECK_THROWS_AS(cantor_function(0.5, 0), Error);
}

TEST_CASE("cantor function symmetry and plateau values") {
    for (int i = 0; i <= 1024; ++i) {
        const double x = i / 1024.0;
        CHECK(std::abs(cantor_function(x, 40) + cantor_function(1.0 - x, 40) - 1.0) <= 1e-12);
    }
    // plateau midpoints are exact from the construction level on
    CHECK(cantor_function(0.5, 40) == 0.5);            // gap (1/3, 2/3), level 1
    CHECK(cantor_function(1.0 / 6.0, 40) == 0.25);     // gap (1/9, 2/9), level 2
    CHECK(cantor_function(5.0 / 6.0, 40) == 0.75);
    // monotone on a grid
    double prev = -1.0;
    for (int i = 0; i <= 2000; ++i) {
        const double v = cantor_function(i / 2000.0, 40);
        CHECK(v >= prev);
        prev = v;
    }
}

TEST_CASE("fat Cantor construction bookkeeping") {
    const double lambda = 0.5;
    for (int n : {1, 4, 8, 12}) {
        const ScaleFunction s = ScaleFunction::fat_cantor(lambda, n);
        CHECK(s.eval(0.0) == 0.0);
        // derived from the removed-length series
        const double expect_s1 = 1.0 - removed_series(lambda, n);
        CHECK(s.eval(1.0) == doctest::Approx(expect_s1).epsilon(1e-15));
        CHECK(expect_s1 == doctest::Approx(0.5 + std::ldexp(1.0, -n - 1)).epsilon(1e-15));
        CHECK(s.flat_mass_total() == doctest::Approx(lambda * (1.0 - std::ldexp(1.0, -n))));
        CHECK(s.gaps().size() == (1u << n) - 1);
    }
    // flat mass of [0, 1/2] approaches lambda/2 (construction symmetric about 1/2)
    const ScaleFunction deep = ScaleFunction::fat_cantor(0.5, 18);
    CHECK(std::abs(deep.flat_mass(0.0, 0.5) - 0.25) <= std::ldexp(1.0, -18));

    CHECK_THROWS_AS(ScaleFunction::fat_cantor(0.0, 4), Error);
    CHECK_THROWS_AS(ScaleFunction::fat_cantor(1.0, 4), Error);
    CHECK_THROWS_AS(ScaleFunction::fat_cantor(0.5, 0), Error);
}

TEST_CASE("measure identity and monotonicity on grids") {
    const ScaleFunction s = ScaleFunction::fat_cantor(0.5, 9);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    double prev_x = -0.2, prev_v = s.eval(-0.2);
    for (int i = 0; i <= 500; ++i) {
        const double x = -0.2 + 1.4 * i / 500.0;
        const double v = s.eval(x);
        CHECK(v >= prev_v);                       // monotone
        CHECK(v - prev_v <= (x - prev_x) + 1e-15);  // 1-Lipschitz
        prev_x = x;
        prev_v = v;
    }
    for (int i = 0; i < 200; ++i) {
        double a = uni(rng), b = uni(rng);
        if (a > b) std::swap(a, b);
        // flat_mass(a,b) + (s(b)-s(a)) = b-a, exactly at every depth
        CHECK(s.flat_mass(a, b) + (s.eval(b) - s.eval(a)) == doctest::Approx(b - a).epsilon(1e-14));
    }
    // strictly increasing across every recorded gap
    for (std::size_t i = 0; i < s.gaps().size(); i += 37) {
        const Gap& g = s.gaps()[i];
        CHECK(s.eval(g.right + 1e-9) > s.eval(g.left - 1e-9));
        CHECK(s.eval(g.right) == s.eval(g.left));  // flat on the gap itself
    }
}

TEST_CASE("depth convergence is Cauchy with the documented rate") {
    const double lambda = 0.5;
    for (int n : {3, 6, 9}) {
        const ScaleFunction a = ScaleFunction::fat_cantor(lambda, n);
        const ScaleFunction b = ScaleFunction::fat_cantor(lambda, n + 1);
        double worst = 0.0;
        for (int i = 0; i <= 2000; ++i) {
            const double x = i / 2000.0;
            worst = std::max(worst, std::abs(a.eval(x) - b.eval(x)));
        }
        CHECK(worst <= lambda * std::ldexp(1.0, -n - 1) + 1e-15);
    }
}

TEST_CASE("inverse Cantor plus identity family") {
    for (int n : {2, 6, 10}) {
        const ScaleFunction s = ScaleFunction::inverse_cantor(n);
        CHECK(s.eval(0.0) == 0.0);
        CHECK(s.eval(2.0) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(s.eval(1.0) == doctest::Approx(0.5).epsilon(1e-11));  // c == 1/2 on [1/3,2/3]
        CHECK(s.flat_mass(0.0, 2.0) == doctest::Approx(1.0).epsilon(1e-12));
        // s^-1 interpolates c(y) + y within the 2^-n staircase deviation
        for (int i = 0; i <= 64; ++i) {
            const double y = i / 64.0;
            const double x = s.inverse(y);
            CHECK(std::abs(x - (cantor_function(y, 40) + y)) <= std::ldexp(1.0, -n) + 1e-12);
            CHECK(s.eval(x) == doctest::Approx(y).epsilon(1e-10));
        }
        // exact on plateau values of level <= n: c(1/2) = 1/2
        CHECK(s.inverse(0.5) == doctest::Approx(1.0).epsilon(1e-14));
    }
}

TEST_CASE("eval and inverse round trips with the left tie-break") {
    const auto id = ScaleFunction::identity();
    CHECK(id.eval(0.7) == 0.7);
    const auto aff = ScaleFunction::affine(0.5);
    CHECK(aff.eval(1.0) == 0.5);
    CHECK(aff.inverse(0.25) == doctest::Approx(0.5));

    const ScaleFunction s = ScaleFunction::fat_cantor(0.5, 12);
    // round trip recovers x within the width of the gap containing it (zero
    // when x lies where s strictly increases)
    for (double x : {0.05, 0.3, 0.55, 0.77, 0.93}) {
        double tol = 1e-12;
        for (const Gap& g : s.gaps())
            if (x >= g.left && x <= g.right) tol = g.width() + 1e-12;
        CHECK(std::abs(s.inverse(s.eval(x)) - x) <= tol);
    }
    // at a flat level the inverse returns the left endpoint of the preimage
    const Gap g = s.gaps().front();
    CHECK(s.inverse(s.eval(g.left)) == g.left);
    CHECK(s.inverse_right(s.eval(g.left)) == g.right);
    CHECK_THROWS_AS(s.inverse(std::nan("")), Error);

    // slope-1 extension outside the window
    CHECK(s.eval(-1.0) == -1.0);
    CHECK(s.eval(2.0) == doctest::Approx(s.eval(1.0) + 1.0));
}

TEST_CASE("stieltjes measures of the scale families") {
    const auto id = ScaleFunction::identity();
    const MonotoneMeasure mid = stieltjes_measure(id, Orientation::forward, {0.0, 1.0});
    CHECK(mid.atoms().empty());
    CHECK(mid.total_mass() == doctest::Approx(1.0));
    CHECK(mid.density_at(0.5) == 1.0);

    const int n = 8;
    const ScaleFunction s = ScaleFunction::fat_cantor(0.5, n);
    const MonotoneMeasure minv =
        stieltjes_measure(s, Orientation::inverse, {0.0, s.eval(1.0)});
    CHECK(minv.atoms().size() == (1u << n) - 1);
    CHECK(minv.atom_mass_total() == doctest::Approx(0.5 * (1.0 - std::ldexp(1.0, -n))));
    // total mass telescopes to F(b) - F(a) = s^-1(s(1)) - s^-1(0)
    CHECK(minv.total_mass() == doctest::Approx(s.inverse(s.eval(1.0)) - s.inverse(0.0)));
    for (const Atom& a : minv.atoms()) CHECK(a.mass > 0.0);

    // Lebesgue part of d(s^-1) has unit density
    CHECK(minv.density_at(0.21) == doctest::Approx(1.0));
}

TEST_CASE("stieltjes integration against the Cantor measure") {
    const int n = 10;
    const ScaleFunction s = ScaleFunction::inverse_cantor(n);
    // d(s^-1) = dy + dc_n on [0,1]
    const MonotoneMeasure mu = stieltjes_measure(s, Orientation::inverse, {0.0, 1.0});
    CHECK(stieltjes_integrate([](double) { return 1.0; }, mu) ==
          doctest::Approx(mu.total_mass()).epsilon(1e-13));
    CHECK(mu.total_mass() == doctest::Approx(2.0).epsilon(1e-12));

    // first moment of dc_n: exactly 1/2 by symmetry
    const double m1 = stieltjes_integrate([](double y) { return y; }, mu) - 0.5;
    CHECK(m1 == doctest::Approx(0.5).epsilon(1e-10));

    // second moment oracle: E[Y^2] for Y = sum 2 eps_k 3^-k via the
    // self-similarity recursion, iterated to depth 40
    double mean = 0.0, second = 0.0;
    for (int k = 0; k < 40; ++k) {
        second = (2.0 + 2.0 * mean + second) / 9.0;
        mean = (1.0 + mean) / 3.0;
    }
    CHECK(std::abs(second - 0.375) < 1e-15);
    const double m2 = stieltjes_integrate([](double y) { return y * y; }, mu) - 1.0 / 3.0;
    CHECK(std::abs(m2 - second) <= 2.0 * std::pow(3.0, -n));
}

TEST_CASE("scale JSON round trip and gap export") {
    for (const ScaleFunction& s :
         {ScaleFunction::fat_cantor(0.25, 6), ScaleFunction::inverse_cantor(5),
          ScaleFunction::identity(), ScaleFunction::affine(0.5)}) {
        const ScaleFunction back = ScaleFunction::from_json(s.to_json());
        CHECK(back.family() == s.family());
        CHECK(back.depth() == s.depth());
        REQUIRE(back.breakpoints().size() == s.breakpoints().size());
        for (std::size_t i = 0; i < s.breakpoints().size(); ++i) {
            CHECK(back.breakpoints()[i] == s.breakpoints()[i]);
            CHECK(back.values()[i] == s.values()[i]);
        }
    }
    const ScaleFunction s = ScaleFunction::fat_cantor(0.5, 3);
    const std::string csv = s.gaps_csv();
    CHECK(csv.rfind("left,right,level\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 8);  // header + 7 gaps
    CHECK_THROWS_AS(ScaleFunction::from_json("{\"family\":\"nope\"}"), Error);
    CHECK_THROWS_AS(ScaleFunction::from_json("not json"), Error);
}

TEST_CASE("stieltjes integration is linear and monotone in the integrand") {
    const ScaleFunction s = ScaleFunction::fat_cantor(0.5, 7);
    const MonotoneMeasure mu = stieltjes_measure(s, Orientation::inverse, {0.0, s.eval(1.0)});
    const auto g = [](double y) { return std::sin(3.0 * y) + 1.5; };
    const auto h = [](double y) { return y * y; };
    const double ig = stieltjes_integrate(g, mu);
    const double ih = stieltjes_integrate(h, mu);
    const double combo = stieltjes_integrate([&](double y) { return 2.0 * g(y) - 0.5 * h(y); }, mu);
    CHECK(combo == doctest::Approx(2.0 * ig - 0.5 * ih).epsilon(1e-12));
    // g + 0.25 dominates g, so its integral dominates by 0.25 * total mass
    const double shifted = stieltjes_integrate([&](double y) { return g(y) + 0.25; }, mu);
    CHECK(shifted >= ig);
    CHECK(shifted - ig == doctest::Approx(0.25 * mu.total_mass()).epsilon(1e-12));
}

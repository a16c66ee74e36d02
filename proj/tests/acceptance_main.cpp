// Acceptance suite: every release criterion at its pinned tolerance, one
// pass/fail line per criterion.  Exit code = number of failed criteria.
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "coupling.hpp"
#include "discrete.hpp"
#include "forms1d.hpp"
#include "lab.hpp"
#include "levy.hpp"
#include "measure.hpp"
#include "profile.hpp"
#include "scale.hpp"
#include "simulate.hpp"

using namespace dflab;

namespace {

int g_failures = 0;

double now_seconds() {
    using clock = std::chrono::steady_clock;
    static const clock::time_point t0 = clock::now();
    return std::chrono::duration<double>(clock::now() - t0).count();
}

void report(int idx, const char* name, bool pass, const std::string& detail, double secs) {
    std::printf("[%s] %d %-28s %s (%.2f s)\n", pass ? "PASS" : "FAIL", idx, name, detail.c_str(),
                secs);
    if (!pass) ++g_failures;
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof(buf), f, ap);
    va_end(ap);
    return buf;
}

ScalePtr make(ScaleFunction s) { return std::make_shared<ScaleFunction>(std::move(s)); }

// ------------------------------------------------------------ criterion 1
// Subspace energy identity: fat-Cantor(1/2) at depths 6/8/10, residual
// monotone decreasing and <= 1e-3 at depth 10 with grid_n >= 2^16, in under
// 10 s; the affine(1/2) counterexample has energy ratio 2 within 1e-6.
void criterion_1() {
    const double t0 = now_seconds();
    const Profile phi = Profile::bump(0.25, 0.2);
    std::vector<double> residuals;
    long depth10_grid = 0;
    for (int depth : {6, 8, 10}) {
        const ScalePtr s = make(ScaleFunction::fat_cantor(0.5, depth));
        const CoreFunction u = make_core(phi, s);
        const long grid = suggested_grid(*s);
        if (depth == 10) depth10_grid = grid;
        const double e = energy_es(u);
        const double d = dirichlet_energy(u, grid);
        residuals.push_back(std::abs(e - d) / e);
    }
    const bool monotone = residuals[0] > residuals[1] && residuals[1] > residuals[2];
    const bool tight = residuals[2] <= 1e-3;
    const bool grid_ok = depth10_grid >= (1L << 16);

    const ScalePtr aff = make(ScaleFunction::affine(0.5));
    const CoreFunction w = make_core(Profile::bump(0.25, 0.2), aff);
    const double ratio = energy_es(w) / dirichlet_energy(w, 1L << 17);
    const bool counter = std::abs(ratio - 2.0) <= 1e-6;

    const double secs = now_seconds() - t0;
    const bool in_time = secs < 10.0;
    report(1, "subspace-energy-identity",
           monotone && tight && grid_ok && counter && in_time,
           fmt("residuals %.2e > %.2e > %.2e (<=1e-3), grid %ld, affine ratio %.9f", residuals[0],
               residuals[1], residuals[2], depth10_grid, ratio),
           secs);
}

// ------------------------------------------------------------ criterion 2
// Cantor function: ternary-expansion oracle at 1000 random points to 1e-9 at
// depth 40; the symmetry c(x) + c(1-x) = 1 to 1e-12.
double cantor_oracle(double x, int depth) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    long double f = x;
    double out = 0.0, bit = 0.5;
    for (int k = 0; k < depth; ++k) {
        f *= 3.0L;
        const int d = static_cast<int>(f);
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

void criterion_2() {
    const double t0 = now_seconds();
    std::mt19937_64 rng(424242);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double x = uni(rng);
        worst = std::max(worst, std::abs(cantor_function(x, 40) - cantor_oracle(x, 40)));
    }
    double worst_sym = 0.0;
    for (int i = 0; i <= 4096; ++i) {
        const double x = i / 4096.0;
        worst_sym = std::max(worst_sym,
                             std::abs(cantor_function(x, 40) + cantor_function(1.0 - x, 40) - 1.0));
    }
    report(2, "cantor-function", worst <= 1e-9 && worst_sym <= 1e-12,
           fmt("oracle gap %.2e (<=1e-9), symmetry gap %.2e (<=1e-12)", worst, worst_sym),
           now_seconds() - t0);
}

// ------------------------------------------------------------ criterion 3
// Exit probability, fat-Cantor(1/2): Monte Carlo (20000 paths, dt = 1e-4)
// within 3 SE of the exact scale ratio and the 2000-node chain within 1e-6,
// for x0 in {0.3, 0.5, 0.7}; under 60 s per point.
void criterion_3() {
    const ScaleFunction s = ScaleFunction::fat_cantor(0.5, 8);
    bool all = true;
    std::string detail;
    double total = 0.0;
    int i = 0;
    for (double x0 : {0.3, 0.5, 0.7}) {
        const double t0 = now_seconds();
        ExitConfig cfg;
        cfg.a = 0.0;
        cfg.b = 1.0;
        cfg.x0 = x0;
        cfg.dt = 1e-4;
        cfg.n_paths = 20000;
        cfg.seed = derive_seed(987654321, i++);
        const ExitStats st = exit_statistics(s, cfg);
        const ChainOracle chain = build_chain(s, 0.0, 1.0, x0, 2000);
        const double p_chain = chain_oracle_solve(chain, ChainProblem::hit_probability);
        const double secs = now_seconds() - t0;
        total += secs;
        const bool mc_ok = std::abs(st.p_hit_b.value - st.exact_p) <= 3.0 * st.p_hit_b.se;
        const bool chain_ok = std::abs(p_chain - st.exact_p) <= 1e-6;
        const bool time_ok = secs < 60.0;
        all = all && mc_ok && chain_ok && time_ok;
        detail += fmt("x0=%.1f |dp|=%.4f (3se=%.4f) chain %.1e; ", x0,
                      std::abs(st.p_hit_b.value - st.exact_p), 3.0 * st.p_hit_b.se,
                      std::abs(p_chain - st.exact_p));
    }
    report(3, "exit-probability", all, detail, total);
}

// ------------------------------------------------------------ criterion 4
// Expected exit time from the midpoint: Monte Carlo within 2% of the chain
// solve, for the identity and fat-Cantor(1/2) scales.
void criterion_4() {
    const double t0 = now_seconds();
    bool all = true;
    std::string detail;
    int i = 0;
    for (const ScaleFunction& s :
         {ScaleFunction::identity(), ScaleFunction::fat_cantor(0.5, 8)}) {
        ExitConfig cfg;
        cfg.a = 0.0;
        cfg.b = 1.0;
        cfg.x0 = 0.5;
        cfg.dt = 1e-4;
        cfg.n_paths = 20000;
        cfg.seed = derive_seed(13579, i++);
        const ExitStats st = exit_statistics(s, cfg);
        const ChainOracle chain = build_chain(s, 0.0, 1.0, 0.5, 2000);
        const double t_chain = chain_oracle_solve(chain, ChainProblem::expected_exit_time);
        const double rel = std::abs(st.mean_exit_time.value - t_chain) / t_chain;
        all = all && rel <= 0.02;
        detail += fmt("%s rel=%.4f (<=0.02); ", family_name(s.family()), rel);
    }
    report(4, "expected-exit-time", all, detail, now_seconds() - t0);
}

// ------------------------------------------------------------ criterion 5
// Spectral consistency: S = I_2 with four atoms on a 256^2 grid, Fourier vs
// direct split within 1e-3; Plancherel (no atoms) within 1e-3; the
// disjoint-support pairing residual <= 1e-3 after one refinement.
void criterion_5() {
    const double t0 = now_seconds();
    const LevySymbol sym(2, {1, 0, 0, 1},
                         {{{0.25, 0.0}, 1.0},
                          {{-0.25, 0.0}, 1.0},
                          {{0.0, 0.25}, 1.0},
                          {{0.0, -0.25}, 1.0}});
    const GridFunction u =
        GridFunction::gaussian_bump({-2.0, -2.0}, 4.0 / 256, {256, 256}, {0.0, 0.0}, 0.4);
    const double ef = energy_fourier(sym, u);
    const DirectEnergy de = energy_direct(sym, u);
    const double split_rel = std::abs(ef - de.total()) / ef;

    const LevySymbol brown(2, {1, 0, 0, 1}, {});
    const double ef0 = energy_fourier(brown, u);
    const double plancherel_rel = std::abs(ef0 - energy_direct(brown, u).local) / ef0;

    const auto bump1 = [](double c, double r) {
        return [c, r](const std::vector<double>& x) {
            const double z2 = (x[0] - c) * (x[0] - c) / (r * r);
            return z2 >= 1.0 ? 0.0 : (1.0 - z2) * (1.0 - z2);
        };
    };
    // unit atoms with supports [0,0.4] and [0.6,1.0] (both sides vanish) and
    // half-unit atoms that genuinely bridge the supports
    const LevySymbol far(1, {0.0}, {{{1.0}, 1.0}, {{-1.0}, 1.0}});
    const LevySymbol bridging(1, {0.0}, {{{0.5}, 1.0}, {{-0.5}, 1.0}});
    double pair_far = 0.0, pair_bridge = 0.0;
    for (const int n : {1024, 2048}) {
        const double h = 2.0 / n;
        const GridFunction pu = GridFunction::sample({-0.4}, h, {n}, bump1(0.2, 0.18));
        const GridFunction pv = GridFunction::sample({-0.4}, h, {n}, bump1(0.8, 0.18));
        pair_far = pairing_identity_residual(far, pu, pv);
        pair_bridge = pairing_identity_residual(bridging, pu, pv);
    }
    const bool pass = split_rel <= 1e-3 && plancherel_rel <= 1e-3 && pair_far <= 1e-3 &&
                      pair_bridge <= 1e-3;
    report(5, "levy-consistency", pass,
           fmt("split %.2e, plancherel %.2e, pairing %.2e/%.2e (all <=1e-3)", split_rel,
               plancherel_rel, pair_far, pair_bridge),
           now_seconds() - t0);
}

// ------------------------------------------------------------ criterion 6
// Discrete transform algebra, all equalities exact (tolerance zero) on 200
// random 5-state Markovian forms plus 50 adversarial perturbations.
void criterion_6() {
    const double t0 = now_seconds();
    std::mt19937_64 rng(20240817);
    std::uniform_int_distribution<int> lat(0, 63);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    int bad = 0;
    const std::size_t n = 5;
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> J(n * n, 0.0), k(n, 0.0), m(n, 1.0);
        for (std::size_t x = 0; x < n; ++x)
            for (std::size_t y = x + 1; y < n; ++y)
                if (coin(rng) < 0.7) {
                    const double w = lat(rng) / 64.0;
                    J[x * n + y] = J[y * n + x] = w;
                }
        for (std::size_t x = 0; x < n; ++x) {
            m[x] = (1 + lat(rng)) / 32.0;
            if (coin(rng) < 0.5) k[x] = lat(rng) / 64.0;
        }
        const FiniteForm f = make_form({}, m, J, k);

        // decompose-reconstruct, bit for bit
        const FiniteForm back = bd_decompose(form_matrix(f), f.m, f.states);
        if (back.J != f.J || back.k != f.k) ++bad;

        // kill and resurrection are reciprocal
        const FiniteForm rt = kill(resurrect(f), f.k);
        if (rt.J != f.J || rt.k != f.k) ++bad;

        // homeomorphism preserves every basis-pair energy
        const std::vector<std::size_t> sigma = {2, 4, 1, 0, 3};
        const FiniteForm h = homeomorph(f, sigma);
        std::vector<double> u(n, 0.0), v(n, 0.0), hu(n, 0.0), hv(n, 0.0);
        for (std::size_t x = 0; x < n && bad == 0; ++x)
            for (std::size_t y = 0; y < n; ++y) {
                std::fill(u.begin(), u.end(), 0.0);
                std::fill(v.begin(), v.end(), 0.0);
                std::fill(hu.begin(), hu.end(), 0.0);
                std::fill(hv.begin(), hv.end(), 0.0);
                u[x] = v[y] = 1.0;
                hu[sigma[x]] = hv[sigma[y]] = 1.0;
                if (form_energy(h, hu, hv) != form_energy(f, u, v)) {
                    ++bad;
                    break;
                }
            }

        // time change is an involution
        const std::vector<double> mu = {2, 1, 0.5, 0.25, 4};
        const FiniteForm tc = time_change(time_change(f, mu), f.m);
        if (tc.m != f.m || tc.J != f.J || tc.k != f.k) ++bad;

        // the two subspace booleans coincide, for the form itself...
        const SubspaceReport same = subspace_check(f, f);
        if (!(same.is_subspace && same.triples_match)) ++bad;

        // ...and under an adversarial single-entry perturbation
        if (trial < 50) {
            FiniteForm pert = f;
            if (trial % 2 == 0) {
                const std::size_t x = trial % 4, y = x + 1;
                pert.J[x * n + y] += (1 + lat(rng)) / 64.0;
                pert.J[y * n + x] = pert.J[x * n + y];
            } else {
                pert.k[trial % n] += (1 + lat(rng)) / 64.0;
            }
            const SubspaceReport sr = subspace_check(pert, f);
            if (sr.is_subspace != sr.triples_match || sr.is_subspace) ++bad;
        }
    }
    report(6, "discrete-transform-algebra", bad == 0,
           fmt("%d violations over 200 forms + 50 perturbations (exact)", bad),
           now_seconds() - t0);
}

// ------------------------------------------------------------ criterion 7
// Product forms: d = 2 tensor energy within 1e-3 of the direct quadrature,
// exact properness masses, coupled independence within 3 SE per pair.
void criterion_7() {
    const double t0 = now_seconds();
    const ScalePtr id = make(ScaleFunction::identity());
    const ProductForm p2 = make_product({id, id});
    const TensorFunction u = make_tensor(p2, {Profile::bump(0.5, 0.3), Profile::bump(0.5, 0.3)});
    const double pe = product_energy(p2, u);
    const double oracle = dirichlet_energy_2d(u, 1024, 1024);
    const double tensor_rel = std::abs(pe - oracle) / pe;

    bool masses_exact = true;
    for (int n : {4, 8, 12}) {
        const ProductForm pf = make_product({make(ScaleFunction::fat_cantor(0.5, n)), id});
        const PropernessReport rep = properness_certificate(pf);
        masses_exact = masses_exact && rep.flat_masses[0] == 0.5 * (1.0 - std::ldexp(1.0, -n)) &&
                       rep.proper;
    }

    const ScalePtr idw = make(ScaleFunction::identity({-20.0, 20.0}));
    const ScalePtr fc = make(ScaleFunction::fat_cantor(0.5, 8));
    bool indep = true;
    std::string idetail;
    int k = 0;
    const std::pair<double, double> pairs[] = {{0.0, 0.0}, {0.3, -0.2}, {0.5, 0.5}};
    for (const auto& [tf, tg] : pairs) {
        const ProductRuleCheck chk = coupled_independence_check(
            idw, fc, 0.0, 0.5, 0.25, 1e-3, 0.0, 20000, derive_seed(777, k++), tf, tg);
        indep = indep && chk.within_3se;
        idetail += fmt("|cov|=%.1e(3se=%.1e) ", std::abs(chk.cov), 3.0 * chk.se);
    }
    report(7, "product-forms", tensor_rel <= 1e-3 && masses_exact && indep,
           fmt("tensor %.2e (<=1e-3), masses exact=%d, %s", tensor_rel, masses_exact ? 1 : 0,
               idetail.c_str()),
           now_seconds() - t0);
}

// ------------------------------------------------------------ criterion 8
// Determinism: the selftest battery twice with the same seed produces
// byte-identical CSV and report.
void criterion_8() {
    const double t0 = now_seconds();
    const std::string cfg = R"({"n_paths": 2000, "threads": 3})";
    const lab::RunResult a = lab::run_command("selftest", cfg, 20240817, false);
    const lab::RunResult b = lab::run_command("selftest", cfg, 20240817, false);
    const bool pass = a.status == lab::RunStatus::ok && a.csv == b.csv && a.report == b.report &&
                      !a.csv.empty();
    report(8, "determinism", pass,
           fmt("selftest status %d, csv %zu bytes, byte-identical=%d", static_cast<int>(a.status),
               a.csv.size(), a.csv == b.csv ? 1 : 0),
           now_seconds() - t0);
}

}  // namespace

int main() {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    if (g_failures == 0)
        std::printf("acceptance: all 8 criteria passed\n");
    else
        std::printf("acceptance: %d criteria FAILED\n", g_failures);
    return g_failures;
}

#include "forms1d.hpp"

#include <algorithm>
#include <cmath>

#include "errors.hpp"

namespace dflab {

namespace {

// visit the linear pieces of s covering [a,b]: f(xlo, xhi, slope, s(xlo))
template <typename F>
void walk_pieces(const ScaleFunction& s, double a, double b, F&& f) {
    if (!(a < b)) return;
    const auto& bx = s.breakpoints();
    const auto& bv = s.values();
    const auto& sl = s.slopes();
    if (a < bx.front()) {
        const double hi = std::min(b, bx.front());
        f(a, hi, 1.0, bv.front() + (a - bx.front()));
        a = hi;
        if (!(a < b)) return;
    }
    if (a >= bx.back()) {
        f(a, b, 1.0, bv.back() + (a - bx.back()));
        return;
    }
    auto it = std::upper_bound(bx.begin(), bx.end(), a);
    std::size_t i = static_cast<std::size_t>(it - bx.begin());
    if (i > 0) --i;
    while (a < b && i + 1 < bx.size()) {
        const double hi = std::min(b, bx[i + 1]);
        if (a < hi) f(a, hi, sl[i], bv[i] + sl[i] * (a - bx[i]));
        a = hi;
        ++i;
    }
    if (a < b) f(a, b, 1.0, bv.back() + (a - bx.back()));
}

// integrate g over [a,b] with forced panel boundaries at `cuts` (sorted)
double integrate_with_cuts(const std::function<double(double)>& g, double a, double b,
                           const std::vector<double>& cuts, int panels) {
    double sum = 0.0;
    auto it = std::upper_bound(cuts.begin(), cuts.end(), a);
    double lo = a;
    while (it != cuts.end() && *it < b) {
        sum += gauss_integrate(g, lo, *it, panels);
        lo = *it;
        ++it;
    }
    sum += gauss_integrate(g, lo, b, panels);
    return sum;
}

std::vector<double> kink_preimages(const ScaleFunction& s, const std::vector<double>& kinks) {
    std::vector<double> xs;
    xs.reserve(2 * kinks.size());
    for (double y : kinks) {
        xs.push_back(s.inverse(y));
        xs.push_back(s.inverse_right(y));
    }
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    return xs;
}

}  // namespace

Interval CoreFunction::support_x() const {
    const Interval sp = phi.support();
    return {s->inverse(sp.lo), s->inverse_right(sp.hi)};
}

CoreFunction make_core(Profile phi, ScalePtr s) {
    if (!s) throw_invalid("core function: null scale");
    const Interval sp = phi.support();
    const Interval range = s->range();
    const double slack = 1e-12 * std::max(1.0, range.length());
    if (sp.lo < range.lo - slack || sp.hi > range.hi + slack)
        throw_invalid("core function: profile support exceeds the image interval of s");
    return CoreFunction{std::move(phi), std::move(s)};
}

EnergyDetail energy_es_detail(const CoreFunction& u, int quad_n) {
    if (quad_n < 16) throw_precondition("energy_es: quad_n must be >= 16");
    const Interval sp = u.phi.support();
    const std::vector<double> kinks = u.phi.kinks();

    // (a) image-measure route
    const auto dsq = [&u](double y) {
        const double d = u.phi.deriv(y);
        return d * d;
    };
    const int panels = std::max(1, quad_n / std::max<int>(1, static_cast<int>(kinks.size())));
    const double route_a = 0.5 * integrate_with_cuts(dsq, sp.lo, sp.hi, kinks, panels);

    // (b) Stieltjes route against ds on the preimage window
    const std::vector<double> cuts = kink_preimages(*u.s, kinks);
    const Interval sx = u.support_x();
    double route_b = 0.0;
    walk_pieces(*u.s, sx.lo, sx.hi, [&](double lo, double hi, double slope, double y0) {
        if (slope == 0.0) return;
        const auto g = [&](double x) {
            const double d = u.phi.deriv(y0 + slope * (x - lo));
            return d * d;
        };
        route_b += slope * integrate_with_cuts(g, lo, hi, cuts, 1);
    });
    route_b *= 0.5;

    EnergyDetail out;
    out.route_image = route_a;
    out.route_stieltjes = route_b;
    out.value = route_a;
    out.bound = 1e-9 * (1.0 + std::abs(route_a));
    if (std::abs(route_a - route_b) > out.bound)
        throw_numeric("energy_es: image and Stieltjes routes disagree beyond bound");
    return out;
}

double energy_es(const CoreFunction& u, int quad_n) { return energy_es_detail(u, quad_n).value; }

double energy_es_pair(const CoreFunction& u, const CoreFunction& v, int quad_n) {
    if (quad_n < 16) throw_precondition("energy_es_pair: quad_n must be >= 16");
    if (u.s != v.s) throw_precondition("energy_es_pair: operands must share the scale");
    const Interval a = u.phi.support();
    const Interval b = v.phi.support();
    const double lo = std::max(a.lo, b.lo);
    const double hi = std::min(a.hi, b.hi);
    if (!(lo < hi)) return 0.0;
    std::vector<double> cuts = u.phi.kinks();
    const std::vector<double> kv = v.phi.kinks();
    cuts.insert(cuts.end(), kv.begin(), kv.end());
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    const auto g = [&](double y) { return u.phi.deriv(y) * v.phi.deriv(y); };
    const int panels = std::max(1, quad_n / std::max<int>(1, static_cast<int>(cuts.size())));
    return 0.5 * integrate_with_cuts(g, lo, hi, cuts, panels);
}

double l2_norm_sq(const CoreFunction& u, int quad_n) {
    if (quad_n < 16) throw_precondition("l2_norm_sq: quad_n must be >= 16");
    const std::vector<double> cuts = kink_preimages(*u.s, u.phi.kinks());
    const Interval sx = u.support_x();
    double acc = 0.0;
    walk_pieces(*u.s, sx.lo, sx.hi, [&](double lo, double hi, double slope, double y0) {
        const auto g = [&](double x) {
            const double f = u.phi(y0 + slope * (x - lo));
            return f * f;
        };
        acc += integrate_with_cuts(g, lo, hi, cuts, 1);
    });
    return acc;
}

double dirichlet_energy(const CoreFunction& u, long grid_n) {
    if (grid_n < 16) throw_precondition("dirichlet_energy: grid_n must be >= 16");
    const Interval sx = u.support_x();
    const double h = sx.length() / static_cast<double>(grid_n);
    const double lo = sx.lo - 4.0 * h;
    const long n_cells = grid_n + 8;

    const auto& bx = u.s->breakpoints();
    const auto& bv = u.s->values();
    const auto& sl = u.s->slopes();
    std::size_t pi = 0;
    const auto eval_s = [&](double x) {
        if (x < bx.front()) return bv.front() + (x - bx.front());
        if (x >= bx.back()) return bv.back() + (x - bx.back());
        while (pi + 2 < bx.size() && bx[pi + 1] <= x) ++pi;
        return bv[pi] + sl[pi] * (x - bx[pi]);
    };

    double prev = u.phi(eval_s(lo));
    double sum = 0.0;
    for (long i = 1; i <= n_cells; ++i) {
        const double x = lo + static_cast<double>(i) * h;
        const double cur = u.phi(eval_s(x));
        const double q = (cur - prev) / h;
        sum += q * q;
        prev = cur;
    }
    return 0.5 * sum * h;
}

long suggested_grid(const ScaleFunction& s, long floor_n) {
    const double w = s.min_piece_width();
    long n = floor_n;
    if (std::isfinite(w) && w > 0.0) {
        // resolve the narrowest linear piece with 8 cells; a larger floor
        // would make shallow depths look spuriously accurate in sweeps
        const double cells = s.domain().length() / (w / 8.0);
        n = static_cast<long>(std::ceil(cells));
    }
    return std::min<long>(std::max<long>(n, 16), 1L << 24);
}

IdentityReport verify_subspace_identity(const CoreFunction& u, double tol, long grid_floor) {
    const ScaleFamily fam = u.s->family();
    IdentityReport report;

    std::vector<int> depths;
    if (fam == ScaleFamily::fat_cantor || fam == ScaleFamily::inverse_cantor) {
        const int n = u.s->depth();
        for (int d : {n - 4, n - 2, n})
            if (d >= 1 && (depths.empty() || depths.back() != d)) depths.push_back(d);
    } else {
        depths.push_back(0);
    }

    for (int d : depths) {
        ScalePtr s = u.s;
        if (fam == ScaleFamily::fat_cantor)
            s = std::make_shared<ScaleFunction>(ScaleFunction::fat_cantor(u.s->lambda(), d));
        else if (fam == ScaleFamily::inverse_cantor)
            s = std::make_shared<ScaleFunction>(ScaleFunction::inverse_cantor(d));
        const CoreFunction ud = make_core(u.phi, s);
        const long grid = suggested_grid(*s, grid_floor);
        const double e = energy_es(ud);
        const double dd = dirichlet_energy(ud, grid);
        const double res = std::abs(e - dd) / std::max(e, 1e-12);
        report.rows.push_back({fam, s->depth(), grid, e, dd, res});
    }

    report.residual = report.rows.back().residual;
    if (report.rows.size() > 1) {
        bool decreasing = true;
        for (std::size_t i = 1; i < report.rows.size(); ++i)
            decreasing = decreasing && report.rows[i].residual < report.rows[i - 1].residual;
        report.converged = decreasing && report.residual <= tol;
    } else {
        report.converged = report.residual <= tol;
    }
    return report;
}

double weak_generator_residual(const CoreFunction& u, const CoreFunction& v, int quad_n) {
    if (!u.phi.has_deriv2())
        throw_unsupported("weak_generator_residual: profile of u must be twice differentiable");
    if (u.s != v.s) throw_precondition("weak_generator_residual: operands must share the scale");
    if (quad_n < 16) throw_precondition("weak_generator_residual: quad_n must be >= 16");

    const double e = energy_es_pair(u, v, quad_n);

    std::vector<double> kinks = u.phi.kinks();
    const std::vector<double> kv = v.phi.kinks();
    kinks.insert(kinks.end(), kv.begin(), kv.end());
    const std::vector<double> cuts = kink_preimages(*u.s, kinks);

    const Interval su = u.support_x();
    const Interval sv = v.support_x();
    const double lo = std::max(su.lo, sv.lo);
    const double hi = std::min(su.hi, sv.hi);
    double gen = 0.0;
    if (lo < hi) {
        walk_pieces(*u.s, lo, hi, [&](double a, double b, double slope, double y0) {
            if (slope == 0.0) return;
            const auto g = [&](double x) {
                const double y = y0 + slope * (x - a);
                return u.phi.deriv2(y) * v.phi(y);
            };
            gen += slope * integrate_with_cuts(g, a, b, cuts, 1);
        });
    }
    gen *= 0.5;
    return std::abs(e + gen);
}

}  // namespace dflab

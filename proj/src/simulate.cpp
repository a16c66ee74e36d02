#include "simulate.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>

#include "errors.hpp"

namespace dflab {

namespace {

template <typename Fn>
void parallel_paths(long n_paths, int threads, Fn&& worker) {
    threads = std::max(1, threads);
    if (threads == 1 || n_paths < 64) {
        for (long i = 0; i < n_paths; ++i) worker(i);
        return;
    }
    const long chunk = (n_paths + threads - 1) / threads;
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) {
        const long lo = t * chunk;
        const long hi = std::min(n_paths, (t + 1) * chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &worker] {
            for (long i = lo; i < hi; ++i) worker(i);
        });
    }
    for (std::thread& th : pool) th.join();
}

double clock_rate(const MonotoneMeasure& mu, double y, double eps, double inv2e) {
    return mu.density_at(y) +
           (mu.atom_mass_upto(y + eps) - mu.atom_mass_upto(y - eps)) * inv2e;
}

// One exit excursion of Brownian motion on (ya, yb) from y0, accumulating the
// mu-clock.  Within-step crossings are detected by bridge sampling; the
// linear interpolation of the step decides which boundary is reached first.
// on_step(y, clock_increment) fires once per (partial) step.
template <typename StepFn>
std::pair<double, int> exit_path(double y0, double ya, double yb, double dt, double eps,
                                 const MonotoneMeasure& mu, std::mt19937_64& eng, bool bridge,
                                 double max_horizon, StepFn&& on_step) {
    std::normal_distribution<double> gauss;
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const double sq = std::sqrt(dt);
    const double inv2e = 1.0 / (2.0 * eps);
    const long cap = static_cast<long>(max_horizon / dt);
    double cur = y0;
    double acc = 0.0;
    for (long step = 0; step < cap; ++step) {
        const double rate = clock_rate(mu, cur, eps, inv2e);
        const double next = cur + sq * gauss(eng);
        if (next >= yb || next <= ya) {
            const double th_top = next >= yb ? (yb - cur) / (next - cur) : 2.0;
            const double th_bot = next <= ya ? (ya - cur) / (next - cur) : 2.0;
            const double theta = std::min(th_top, th_bot);
            const double inc = rate * dt * theta;
            on_step(cur, inc);
            return {acc + inc, th_top <= th_bot ? 1 : -1};
        }
        const double e_top = -2.0 * (yb - cur) * (yb - next) / dt;
        const double e_bot = -2.0 * (cur - ya) * (next - ya) / dt;
        if (bridge && (e_top > -36.0 || e_bot > -36.0)) {
            const double p_top = std::exp(e_top);
            const double p_bot = std::exp(e_bot);
            const double u = uni(eng);
            if (u < p_top + p_bot) {
                const double inc = rate * dt * 0.5;
                on_step(cur, inc);
                return {acc + inc, u < p_top ? 1 : -1};
            }
        }
        const double inc = rate * dt;
        on_step(cur, inc);
        acc += inc;
        cur = next;
    }
    throw_numeric("exit simulation exceeded the step cap");
}

MonotoneMeasure inverse_measure_for(const ScaleFunction& s, double ylo, double yhi) {
    const Interval r = s.range();
    return stieltjes_measure(s, Orientation::inverse,
                             {std::min(ylo, r.lo) - 1.0, std::max(yhi, r.hi) + 1.0});
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    std::uint64_t z = master + (index + 1) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

PathSample brownian_path(double x0, double horizon, double dt, std::uint64_t seed) {
    if (!(dt > 0.0)) throw_invalid("brownian_path: dt must be > 0");
    if (!(horizon > 0.0)) throw_invalid("brownian_path: horizon must be > 0");
    const long n = std::max<long>(1, std::lround(horizon / dt));
    PathSample p;
    p.dt = dt;
    p.seed = seed;
    p.times.resize(n + 1);
    p.positions.resize(n + 1);
    p.times[0] = 0.0;
    p.positions[0] = x0;
    std::mt19937_64 eng(seed);
    std::normal_distribution<double> gauss;
    const double sq = std::sqrt(dt);
    for (long k = 1; k <= n; ++k) {
        p.times[k] = k * dt;
        p.positions[k] = p.positions[k - 1] + sq * gauss(eng);
    }
    return p;
}

double TimeChangeClock::tau(double a) const {
    if (a <= 0.0) return 0.0;
    if (a >= A.back()) return times.back();
    const auto it = std::upper_bound(A.begin(), A.end(), a);
    const std::size_t k = static_cast<std::size_t>(it - A.begin()) - 1;
    const double da = A[k + 1] - A[k];
    const double theta = da > 0.0 ? (a - A[k]) / da : 0.0;
    return times[k] + theta * dt;
}

TimeChangeClock pcaf_clock(const PathSample& path, const MonotoneMeasure& mu, double epsilon) {
    if (!(epsilon > 0.0)) throw_invalid("pcaf_clock: epsilon must be > 0");
    if (path.positions.size() < 2) throw_invalid("pcaf_clock: empty path");
    TimeChangeClock c;
    c.dt = path.dt;
    c.times = path.times;
    c.A.assign(path.positions.size(), 0.0);
    const double inv2e = 1.0 / (2.0 * epsilon);
    for (std::size_t i = 0; i + 1 < path.positions.size(); ++i) {
        const double rate = clock_rate(mu, path.positions[i], epsilon, inv2e);
        c.A[i + 1] = c.A[i] + rate * path.dt;
    }
    return c;
}

PathSample simulate_subspace_diffusion(const ScaleFunction& s, double x0, double horizon,
                                       double dt, double epsilon, std::uint64_t seed) {
    if (!s.unit_slope_family())
        throw_precondition("subspace diffusion requires a scale with slopes in {0,1}");
    if (epsilon <= 0.0) epsilon = std::sqrt(dt);
    const double y0 = s.eval(x0);
    const PathSample b = brownian_path(y0, horizon, dt, seed);
    const auto [blo, bhi] = std::minmax_element(b.positions.begin(), b.positions.end());
    const MonotoneMeasure mu = inverse_measure_for(s, *blo - 2.0 * epsilon, *bhi + 2.0 * epsilon);
    const TimeChangeClock clock = pcaf_clock(b, mu, epsilon);

    PathSample x;
    x.dt = dt;
    x.seed = seed;
    const long n = static_cast<long>(b.positions.size()) - 1;
    for (long j = 0; j <= n; ++j) {
        const double t = j * dt;
        if (t > clock.A.back() * (1.0 + 1e-12)) break;
        const double tau = clock.tau(t);
        long k = static_cast<long>(tau / dt);
        k = std::clamp<long>(k, 0, n - 1);
        const double theta = std::clamp((tau - k * dt) / dt, 0.0, 1.0);
        const double by = b.positions[k] + theta * (b.positions[k + 1] - b.positions[k]);
        x.times.push_back(t);
        x.positions.push_back(s.inverse(by));
    }
    return x;
}

ExitStats exit_statistics(const ScaleFunction& s, const ExitConfig& cfg) {
    if (!(cfg.a < cfg.x0 && cfg.x0 < cfg.b))
        throw_precondition("exit_statistics: x0 must lie strictly inside (a,b)");
    if (cfg.n_paths < 1) throw_invalid("exit_statistics: need at least 1 path");
    const double ya = s.eval(cfg.a);
    const double yb = s.eval(cfg.b);
    const double y0 = s.eval(cfg.x0);
    if (!(ya < y0 && y0 < yb))
        throw_precondition("exit_statistics: the starting class of x0 touches a boundary");
    const double eps = cfg.epsilon > 0.0 ? cfg.epsilon : std::sqrt(cfg.dt);
    const MonotoneMeasure mu = inverse_measure_for(s, ya - 5.0 * eps, yb + 5.0 * eps);

    std::vector<double> clocks(cfg.n_paths, 0.0);
    std::vector<char> hits(cfg.n_paths, 0);
    parallel_paths(cfg.n_paths, cfg.threads, [&](long i) {
        std::mt19937_64 eng(derive_seed(cfg.seed, static_cast<std::uint64_t>(i)));
        const auto [clock, side] = exit_path(y0, ya, yb, cfg.dt, eps, mu, eng, cfg.bridge,
                                             cfg.max_horizon, [](double, double) {});
        clocks[i] = clock;
        hits[i] = side > 0 ? 1 : 0;
    });

    ExitStats out;
    out.n_paths = cfg.n_paths;
    out.exact_p = (y0 - ya) / (yb - ya);
    double nh = 0.0, sum = 0.0;
    for (long i = 0; i < cfg.n_paths; ++i) {
        nh += hits[i];
        sum += clocks[i];
    }
    const double n = static_cast<double>(cfg.n_paths);
    const double p = nh / n;
    const double mean = sum / n;
    double var = 0.0;
    if (cfg.n_paths > 1) {
        for (long i = 0; i < cfg.n_paths; ++i) var += (clocks[i] - mean) * (clocks[i] - mean);
        var /= (n - 1.0);
    }
    out.p_hit_b = {p, std::sqrt(std::max(p * (1.0 - p), 0.0) / n)};
    out.mean_exit_time = {mean, std::sqrt(var / n)};
    return out;
}

EstimateSE occupation_fraction(const ScaleFunction& s, const ExitConfig& cfg, double win_lo,
                               double win_hi) {
    if (!(win_lo < win_hi)) throw_invalid("occupation_fraction: empty window");
    if (!(cfg.a < cfg.x0 && cfg.x0 < cfg.b))
        throw_precondition("occupation_fraction: x0 must lie strictly inside (a,b)");
    const double ya = s.eval(cfg.a);
    const double yb = s.eval(cfg.b);
    const double y0 = s.eval(cfg.x0);
    const double eps = cfg.epsilon > 0.0 ? cfg.epsilon : std::sqrt(cfg.dt);
    const MonotoneMeasure mu = inverse_measure_for(s, ya - 5.0 * eps, yb + 5.0 * eps);

    std::vector<double> occ(cfg.n_paths, 0.0), tot(cfg.n_paths, 0.0);
    parallel_paths(cfg.n_paths, cfg.threads, [&](long i) {
        std::mt19937_64 eng(derive_seed(cfg.seed, static_cast<std::uint64_t>(i)));
        double in_window = 0.0;
        const auto [clock, side] = exit_path(y0, ya, yb, cfg.dt, eps, mu, eng, cfg.bridge,
                                             cfg.max_horizon, [&](double y, double inc) {
                                                 const double xx = s.inverse(y);
                                                 if (xx >= win_lo && xx <= win_hi)
                                                     in_window += inc;
                                             });
        (void)side;
        occ[i] = in_window;
        tot[i] = clock;
    });

    double so = 0.0, st = 0.0;
    for (long i = 0; i < cfg.n_paths; ++i) {
        so += occ[i];
        st += tot[i];
    }
    const double ratio = so / st;
    const double n = static_cast<double>(cfg.n_paths);
    const double mean_tot = st / n;
    double varr = 0.0;
    for (long i = 0; i < cfg.n_paths; ++i) {
        const double r = occ[i] - ratio * tot[i];
        varr += r * r;
    }
    varr /= (n - 1.0);
    return {ratio, std::sqrt(varr / n) / mean_tot};
}

ChainOracle build_chain(const ScaleFunction& s, double a, double b, double x0, long n) {
    if (!(a < x0 && x0 < b)) throw_precondition("build_chain: x0 must lie strictly inside (a,b)");
    if (n < 8) throw_invalid("build_chain: need at least 8 grid cells");
    const double x0s = s.inverse(s.eval(x0));  // leftmost point of the starting class
    if (!(s.eval(x0s) > s.eval(a) && s.eval(x0s) < s.eval(b)))
        throw Error(ErrorCode::invalid_argument,
                    "build_chain: starting class touches a boundary (zero conductance)");

    std::vector<double> cand;
    cand.reserve(n + 1);
    for (long i = 1; i < n; ++i) cand.push_back(a + (b - a) * static_cast<double>(i) / n);
    cand.push_back(x0s);
    std::sort(cand.begin(), cand.end());

    ChainOracle ch;
    ch.x.push_back(a);
    double s_last = s.eval(a);
    for (double p : cand) {
        if (!(p > a) || !(p < b)) continue;
        const double sp = s.eval(p);
        if (sp > s_last) {
            ch.x.push_back(p);
            s_last = sp;
        }
    }
    while (ch.x.size() > 1 && !(s.eval(b) > s.eval(ch.x.back()))) ch.x.pop_back();
    ch.x.push_back(b);

    const auto it = std::lower_bound(ch.x.begin(), ch.x.end(), x0s);
    if (it == ch.x.end() || *it != x0s)
        throw_numeric("build_chain: starting point lost during grid construction");
    ch.x0_index = static_cast<std::size_t>(it - ch.x.begin());
    if (ch.x0_index == 0 || ch.x0_index + 1 >= ch.x.size())
        throw Error(ErrorCode::invalid_argument, "build_chain: starting point not interior");

    const std::size_t m = ch.x.size();
    ch.cond.resize(m - 1);
    for (std::size_t i = 0; i + 1 < m; ++i) {
        const double ds = s.eval(ch.x[i + 1]) - s.eval(ch.x[i]);
        if (!(ds > 0.0))
            throw Error(ErrorCode::numeric, "build_chain: zero conductance cell survived");
        ch.cond[i] = 1.0 / (2.0 * ds);
    }
    ch.speed.resize(m - 2);
    for (std::size_t i = 1; i + 1 < m; ++i) ch.speed[i - 1] = 0.5 * (ch.x[i + 1] - ch.x[i - 1]);
    return ch;
}

namespace {

// Thomas solve of the interior system: cond[i] couples node i and i+1.
std::vector<double> solve_tridiagonal(const std::vector<double>& cond, std::vector<double> rhs) {
    const std::size_t ni = rhs.size();
    std::vector<double> diag(ni), sup(ni, 0.0);
    for (std::size_t i = 0; i < ni; ++i) {
        diag[i] = -(cond[i] + cond[i + 1]);
        if (i + 1 < ni) sup[i] = cond[i + 1];
    }
    for (std::size_t i = 1; i < ni; ++i) {
        const double w = cond[i] / diag[i - 1];
        diag[i] -= w * sup[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    std::vector<double> sol(ni, 0.0);
    sol[ni - 1] = rhs[ni - 1] / diag[ni - 1];
    for (std::size_t i = ni - 1; i-- > 0;) sol[i] = (rhs[i] - sup[i] * sol[i + 1]) / diag[i];
    return sol;
}

}  // namespace

FiniteForm chain_form(const ChainOracle& chain) {
    const std::size_t m = chain.x.size();
    std::vector<double> J(m * m, 0.0), k(m, 0.0), w(m, 0.0);
    for (std::size_t i = 0; i + 1 < m; ++i) {
        J[i * m + (i + 1)] = 0.5 * chain.cond[i];
        J[(i + 1) * m + i] = 0.5 * chain.cond[i];
    }
    w[0] = 0.5 * (chain.x[1] - chain.x[0]);
    w[m - 1] = 0.5 * (chain.x[m - 1] - chain.x[m - 2]);
    for (std::size_t i = 1; i + 1 < m; ++i) w[i] = chain.speed[i - 1];
    return make_form({}, std::move(w), std::move(J), std::move(k));
}

double chain_oracle_solve(const ChainOracle& chain, ChainProblem problem) {
    const std::size_t m = chain.x.size();
    if (m < 3) throw_invalid("chain_oracle_solve: no interior nodes");
    const std::size_t ni = m - 2;
    std::vector<double> rhs(ni, 0.0);
    if (problem == ChainProblem::expected_exit_time) {
        for (std::size_t i = 0; i < ni; ++i) rhs[i] = -chain.speed[i];
    } else {
        rhs[ni - 1] = -chain.cond[ni];  // h(b) = 1
    }
    const std::vector<double> sol = solve_tridiagonal(chain.cond, std::move(rhs));
    return sol[chain.x0_index - 1];
}

double chain_expected_clock(double lo, double hi, double y0, const MonotoneMeasure& mu, long n) {
    if (!(lo < y0 && y0 < hi)) throw_precondition("chain_expected_clock: y0 not interior");
    if (n < 8) throw_invalid("chain_expected_clock: need at least 8 cells");
    std::vector<double> x;
    x.push_back(lo);
    std::vector<double> cand;
    for (long i = 1; i < n; ++i) cand.push_back(lo + (hi - lo) * static_cast<double>(i) / n);
    cand.push_back(y0);
    std::sort(cand.begin(), cand.end());
    for (double p : cand)
        if (p > x.back() && p < hi) x.push_back(p);
    x.push_back(hi);

    const std::size_t m = x.size();
    std::vector<double> cond(m - 1);
    for (std::size_t i = 0; i + 1 < m; ++i) cond[i] = 0.5 / (x[i + 1] - x[i]);
    std::vector<double> rhs(m - 2);
    for (std::size_t i = 1; i + 1 < m; ++i) {
        const double cell_lo = 0.5 * (x[i - 1] + x[i]);
        const double cell_hi = 0.5 * (x[i] + x[i + 1]);
        rhs[i - 1] = -mu.mass(cell_lo, cell_hi);
    }
    const std::vector<double> sol = solve_tridiagonal(cond, std::move(rhs));
    const auto it = std::lower_bound(x.begin(), x.end(), y0);
    const std::size_t idx = static_cast<std::size_t>(it - x.begin());
    return sol[idx - 1];
}

double chain_occupation_fraction(const ScaleFunction& s, double a, double b, double x0,
                                 double win_lo, double win_hi, long n) {
    const ChainOracle ch = build_chain(s, a, b, x0, n);
    const std::size_t ni = ch.x.size() - 2;
    std::vector<double> rhs(ni, 0.0);
    for (std::size_t i = 0; i < ni; ++i) {
        const double xi = ch.x[i + 1];
        if (xi >= win_lo && xi <= win_hi) rhs[i] = -ch.speed[i];
    }
    const std::vector<double> occ = solve_tridiagonal(ch.cond, std::move(rhs));
    const double total = chain_oracle_solve(ch, ChainProblem::expected_exit_time);
    return occ[ch.x0_index - 1] / total;
}

std::vector<PathSample> coupled_simulation(const std::vector<ScalePtr>& components,
                                           const std::vector<double>& x0, double horizon,
                                           double dt, double epsilon, std::uint64_t seed) {
    if (components.empty() || components.size() != x0.size())
        throw_precondition("coupled_simulation: component/start dimension mismatch");
    std::vector<PathSample> out;
    out.reserve(components.size());
    for (std::size_t i = 0; i < components.size(); ++i) {
        const std::uint64_t si = derive_seed(seed, 0xC0FFEE + i);
        out.push_back(simulate_subspace_diffusion(*components[i], x0[i], horizon, dt, epsilon, si));
    }
    return out;
}

namespace {

double final_position(const ScaleFunction& s, const MonotoneMeasure& mu, double y0,
                      double horizon, double dt, double eps, std::mt19937_64& eng) {
    std::normal_distribution<double> gauss;
    const double sq = std::sqrt(dt);
    const double inv2e = 1.0 / (2.0 * eps);
    double cur = y0;
    double acc = 0.0;
    while (true) {
        const double rate = clock_rate(mu, cur, eps, inv2e);
        const double next = cur + sq * gauss(eng);
        const double a_next = acc + rate * dt;
        if (a_next >= horizon) {
            const double theta = rate > 0.0 ? (horizon - acc) / (rate * dt) : 1.0;
            return s.inverse(cur + theta * (next - cur));
        }
        acc = a_next;
        cur = next;
    }
}

}  // namespace

ProductRuleCheck coupled_independence_check(const ScalePtr& sx, const ScalePtr& sy, double x0,
                                            double y0, double horizon, double dt, double epsilon,
                                            long n_paths, std::uint64_t seed, double threshold_f,
                                            double threshold_g, int threads) {
    if (!sx || !sy) throw_invalid("independence check: null component");
    if (n_paths < 16) throw_invalid("independence check: need at least 16 paths");
    const double eps = epsilon > 0.0 ? epsilon : std::sqrt(dt);
    const double span = 8.0 * std::sqrt(horizon) + 1.0;
    const double yx0 = sx->eval(x0);
    const double yy0 = sy->eval(y0);
    const MonotoneMeasure mux = inverse_measure_for(*sx, yx0 - span, yx0 + span);
    const MonotoneMeasure muy = inverse_measure_for(*sy, yy0 - span, yy0 + span);

    std::vector<double> fs(n_paths, 0.0), gs(n_paths, 0.0);
    parallel_paths(n_paths, threads, [&](long i) {
        std::mt19937_64 ex(derive_seed(seed, 2 * static_cast<std::uint64_t>(i)));
        std::mt19937_64 ey(derive_seed(seed, 2 * static_cast<std::uint64_t>(i) + 1));
        const double xT = final_position(*sx, mux, yx0, horizon, dt, eps, ex);
        const double yT = final_position(*sy, muy, yy0, horizon, dt, eps, ey);
        fs[i] = std::isfinite(threshold_f) ? (xT > threshold_f ? 1.0 : 0.0) : 1.0;
        gs[i] = std::isfinite(threshold_g) ? (yT > threshold_g ? 1.0 : 0.0) : 1.0;
    });

    const double n = static_cast<double>(n_paths);
    double sf = 0.0, sg = 0.0, sfg = 0.0;
    for (long i = 0; i < n_paths; ++i) {
        sf += fs[i];
        sg += gs[i];
        sfg += fs[i] * gs[i];
    }
    ProductRuleCheck out;
    out.mean_f = sf / n;
    out.mean_g = sg / n;
    out.cov = sfg / n - out.mean_f * out.mean_g;
    const double vf = out.mean_f * (1.0 - out.mean_f);
    const double vg = out.mean_g * (1.0 - out.mean_g);
    out.se = std::sqrt(std::max(vf * vg, 1e-300) / n);
    out.within_3se = std::abs(out.cov) <= 3.0 * out.se;
    return out;
}

}  // namespace dflab

#pragma once

#include <cstdint>
#include <vector>

#include "discrete.hpp"
#include "measure.hpp"
#include "scale.hpp"

namespace dflab {

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

struct PathSample {
    double dt = 0.0;
    std::uint64_t seed = 0;
    std::vector<double> times;
    std::vector<double> positions;
};

// Euler path of standard Brownian motion: independent N(0, dt) increments,
// deterministic for a fixed seed.
PathSample brownian_path(double x0, double horizon, double dt, std::uint64_t seed);

// Accumulated functional A_t of a monotone measure along a path: the
// absolutely continuous part enters through the density at the current
// position, atoms through the epsilon-band occupation estimate
// (1/(2 eps)) sum dt 1{|B - y| <= eps}.
struct TimeChangeClock {
    double dt = 0.0;
    std::vector<double> times;
    std::vector<double> A;  // nondecreasing, A[0] = 0

    // right-continuous inverse with linear interpolation between samples
    double tau(double a) const;
};

TimeChangeClock pcaf_clock(const PathSample& path, const MonotoneMeasure& mu, double epsilon);

// X_t = s^-1(B_{tau_t}) driven by the clock of d(s^-1); s must have slopes
// in {0,1}.
PathSample simulate_subspace_diffusion(const ScaleFunction& s, double x0, double horizon,
                                       double dt, double epsilon, std::uint64_t seed);

struct EstimateSE {
    double value = 0.0;
    double se = 0.0;
};

struct ExitConfig {
    double a = 0.0;
    double b = 1.0;
    double x0 = 0.5;
    double dt = 1e-4;
    double epsilon = 0.0;  // 0: default sqrt(dt)
    long n_paths = 20000;
    std::uint64_t seed = 1;
    int threads = 4;
    // within-step bridge-crossing sampling; disable to recover the plain
    // interpolated-crossing walk (useful for order-invariance checks)
    bool bridge = true;
    // per-path horizon cap in time units; exceeding it is a numeric error
    double max_horizon = 2000.0;
};

struct ExitStats {
    EstimateSE p_hit_b;
    EstimateSE mean_exit_time;
    double exact_p = 0.0;  // scale ratio from the exact flat-mass bookkeeping
    long n_paths = 0;
};

// Monte Carlo exit statistics of the subspace diffusion on (a,b).  Exit
// detection runs on the Brownian time scale with within-step bridge-crossing
// sampling; the exit time is the accumulated clock at the crossing.
ExitStats exit_statistics(const ScaleFunction& s, const ExitConfig& cfg);

// Fraction of the diffusion's time spent in [win_lo, win_hi] before leaving
// (a,b), with a ratio-estimator standard error.
EstimateSE occupation_fraction(const ScaleFunction& s, const ExitConfig& cfg, double win_lo,
                               double win_hi);

// Birth-death chain on a grid that straddles the gaps of s: conductances
// c_i = 1/(2 (s(x_{i+1}) - s(x_i))), speed weights m_i = (x_{i+1}-x_{i-1})/2.
struct ChainOracle {
    std::vector<double> x;
    std::vector<double> cond;
    std::vector<double> speed;  // interior nodes, speed[i] belongs to x[i+1]... see build
    std::size_t x0_index = 0;
};

ChainOracle build_chain(const ScaleFunction& s, double a, double b, double x0, long n);

// The chain as a finite-state Dirichlet form: J_{i,i+1} = c_i / 2, killing
// zero, reference weights = speed (boundary nodes get half cells).
FiniteForm chain_form(const ChainOracle& chain);

enum class ChainProblem { hit_probability, expected_exit_time };

double chain_oracle_solve(const ChainOracle& chain, ChainProblem problem);

// Expected value of the mu-clock at the exit of (lo, hi) for standard
// Brownian motion started at y0, by the tridiagonal linear solve.
double chain_expected_clock(double lo, double hi, double y0, const MonotoneMeasure& mu, long n);

// Expected occupation ratio analogue of occupation_fraction, from the chain.
double chain_occupation_fraction(const ScaleFunction& s, double a, double b, double x0,
                                 double win_lo, double win_hi, long n);

// Independent coordinates evolved with per-component derived seeds.
std::vector<PathSample> coupled_simulation(const std::vector<ScalePtr>& components,
                                           const std::vector<double>& x0, double horizon,
                                           double dt, double epsilon, std::uint64_t seed);

struct ProductRuleCheck {
    double cov = 0.0;      // mean(f g) - mean(f) mean(g)
    double se = 0.0;       // null standard error sqrt(var(f) var(g) / n)
    double mean_f = 0.0;
    double mean_g = 0.0;
    bool within_3se = false;
};

// Monte Carlo witness that the coupled semigroup factorizes on products:
// f and g are half-line indicators {X_T > threshold} of the two coordinates.
ProductRuleCheck coupled_independence_check(const ScalePtr& sx, const ScalePtr& sy, double x0,
                                            double y0, double horizon, double dt, double epsilon,
                                            long n_paths, std::uint64_t seed, double threshold_f,
                                            double threshold_g, int threads = 4);

}  // namespace dflab

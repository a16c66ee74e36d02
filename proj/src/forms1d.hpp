#pragma once

#include <vector>

#include "measure.hpp"
#include "profile.hpp"
#include "scale.hpp"

namespace dflab {

// u = phi o s: continuous, compactly supported in the x-space window of s.
struct CoreFunction {
    Profile phi;
    ScalePtr s;

    double operator()(double x) const { return phi(s->eval(x)); }
    // closed support in x-space (preimage of the profile support)
    Interval support_x() const;
};

CoreFunction make_core(Profile phi, ScalePtr s);

struct EnergyDetail {
    double value = 0.0;            // image-measure route, the reported value
    double route_image = 0.0;      // (1/2) \int_J phi'(y)^2 dy
    double route_stieltjes = 0.0;  // (1/2) \int (phi' o s)^2 ds
    double bound = 0.0;            // internal agreement bound
};

// Energy of u in the image form, cross-checked against the Stieltjes route.
// Disagreement beyond the bound raises a numeric-consistency error.
EnergyDetail energy_es_detail(const CoreFunction& u, int quad_n = 64);
double energy_es(const CoreFunction& u, int quad_n = 64);
// Polarized image-form energy; u and v must share the same scale.
double energy_es_pair(const CoreFunction& u, const CoreFunction& v, int quad_n = 64);
// L2(dx) norm squared of u over the x-line.
double l2_norm_sq(const CoreFunction& u, int quad_n = 64);

// (1/2) \int ((u(x+h)-u(x))/h)^2 dx with h equal to the grid step.
double dirichlet_energy(const CoreFunction& u, long grid_n);

// Grid fine enough to resolve the narrowest slope-deficient piece (h = w/8),
// clamped to [floor_n, 1<<24].
long suggested_grid(const ScaleFunction& s, long floor_n = 1 << 16);

struct SweepRow {
    ScaleFamily family;
    int depth = 0;
    long grid_n = 0;
    double e_s = 0.0;
    double d = 0.0;
    double residual = 0.0;
};

struct IdentityReport {
    double residual = 0.0;
    bool converged = false;
    std::vector<SweepRow> rows;
};

// Relative defect |E_s - D| / max(E_s, eps) under a 3-point depth sweep for
// the singular families (grid refinement otherwise).  converged requires a
// monotone decrease with the final residual under tol.
IdentityReport verify_subspace_identity(const CoreFunction& u, double tol = 1e-3,
                                        long grid_floor = 1 << 16);

// |E(u,v) + \int (A u) v dx| with A u = (1/2) phi_u''(s(x)) s'(x), using the
// exact slope bookkeeping of s.  Requires a twice-differentiable profile for
// u and a shared scale.
double weak_generator_residual(const CoreFunction& u, const CoreFunction& v, int quad_n = 64);

}  // namespace dflab

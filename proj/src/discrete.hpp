#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace dflab {

// Finite-state symmetric Dirichlet form: reference weights m, symmetric
// zero-diagonal jump matrix J, nonnegative killing vector k.  The induced
// energy is
//   E(u,v) = sum_{x<y} 2 J_xy (u_x - u_y)(v_x - v_y) + sum_x k_x u_x v_x,
// so that E(1_x, 1_y) = -2 J_xy for x != y.
struct FiniteForm {
    std::vector<std::string> states;
    std::vector<double> m;  // > 0 entrywise
    std::vector<double> J;  // n*n row-major, symmetric, zero diagonal, >= 0
    std::vector<double> k;  // >= 0 entrywise

    std::size_t size() const { return states.size(); }
    double j_at(std::size_t x, std::size_t y) const { return J[x * size() + y]; }
};

// Validates all invariants; states may be empty to auto-label s0..s(n-1).
FiniteForm make_form(std::vector<std::string> states, std::vector<double> m,
                     std::vector<double> J, std::vector<double> k);

double form_energy(const FiniteForm& f, const std::vector<double>& u,
                   const std::vector<double>& v);

// Q with E(u,v) = u^T Q v for the induced form.
std::vector<double> form_matrix(const FiniteForm& f);

// Beurling-Deny extraction from a Markovian matrix form: J_xy = -Q_xy / 2,
// k_x = row sum.  Positive off-diagonal entries or negative row sums raise a
// not-Markovian error naming the offending entry.
FiniteForm bd_decompose(const std::vector<double>& Q, std::vector<double> m,
                        std::vector<std::string> states = {});

FiniteForm kill(const FiniteForm& f, const std::vector<double>& extra_k);
FiniteForm resurrect(const FiniteForm& f);
// sigma maps old index i to new index sigma[i]; must be a bijection.
FiniteForm homeomorph(const FiniteForm& f, const std::vector<std::size_t>& sigma);
// Replaces the reference weights by mu (> 0 entrywise); energy is untouched.
FiniteForm time_change(const FiniteForm& f, const std::vector<double>& mu);

struct SubspaceReport {
    bool is_subspace = false;
    bool triples_match = false;
    // first separating basis pair when a jump or killing entry differs
    bool has_witness = false;
    std::size_t witness_x = 0;
    std::size_t witness_y = 0;
};

// Compares the candidate form f_sub against f on a spanning core (indicator
// basis when `core` is empty): energies must agree exactly on all core pairs.
// On finite spaces the two booleans of the report coincide.
SubspaceReport subspace_check(const FiniteForm& f_sub, const FiniteForm& f,
                              const std::vector<std::vector<double>>& core = {});

std::string form_to_json(const FiniteForm& f);
FiniteForm form_from_json(const std::string& text);

}  // namespace dflab

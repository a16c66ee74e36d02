#pragma once

#include <functional>
#include <string>
#include <vector>

namespace dflab {

struct SymbolAtom {
    std::vector<double> y;
    double w = 0.0;
};

struct SymbolDiag {
    std::vector<double> P;            // d x d row-major, columns are eigenvectors
    std::vector<double> eigenvalues;  // sorted descending
    int rank = 0;
};

// Translation-invariant form symbol: psi(x) = (1/2) x^T S x
// + sum_i w_i (1 - cos(x . y_i)), with S symmetric PSD and the atom list
// closed under y -> -y.
class LevySymbol {
  public:
    LevySymbol(int dim, std::vector<double> S_rowmajor, std::vector<SymbolAtom> atoms);

    double eval(const std::vector<double>& x) const;
    int dim() const { return dim_; }
    const std::vector<double>& S() const { return S_; }
    const std::vector<SymbolAtom>& atoms() const { return atoms_; }
    double max_atom_norm() const;

    // Spectral factorization of S with eigenvalues sorted descending; the
    // rank counts eigenvalues above 1e-10 times the largest one.
    SymbolDiag diagonalize() const;

    std::string to_json() const;
    static LevySymbol from_json(const std::string& text);

  private:
    int dim_ = 1;
    std::vector<double> S_;
    std::vector<SymbolAtom> atoms_;
};

// Real samples on a uniform cell-centered grid over a box, zero on the
// outermost cell layer (compact support).  The spacing h is common to all
// dimensions.
class GridFunction {
  public:
    static GridFunction sample(std::vector<double> lo, double h, std::vector<int> n,
                               const std::function<double(const std::vector<double>&)>& f);
    // Sampling without the boundary-layer zeroing, for fixtures that are
    // constant along some coordinates (positivity-certificate probes).  Such
    // grids are outside the compact-support contract of the spectral and
    // shift operations.
    static GridFunction sample_unrestricted(std::vector<double> lo, double h, std::vector<int> n,
                                            const std::function<double(const std::vector<double>&)>& f);
    static GridFunction gaussian_bump(std::vector<double> lo, double h, std::vector<int> n,
                                      std::vector<double> center, double sigma,
                                      double amplitude = 1.0);

    int dim() const { return static_cast<int>(n_.size()); }
    const std::vector<int>& shape() const { return n_; }
    double h() const { return h_; }
    const std::vector<double>& lo() const { return lo_; }
    const std::vector<double>& values() const { return values_; }
    long size() const { return static_cast<long>(values_.size()); }
    double cell_volume() const;
    bool same_geometry(const GridFunction& other) const;
    bool disjoint_support(const GridFunction& other) const;
    double max_abs() const;

    GridFunction scaled(double a) const;
    GridFunction plus(const GridFunction& other) const;
    GridFunction minus(const GridFunction& other) const;

  private:
    GridFunction() = default;
    void zero_boundary();

    std::vector<double> lo_;
    double h_ = 1.0;
    std::vector<int> n_;
    std::vector<double> values_;
};

// Spectral energy sum_k |u_hat(xi_k)|^2 psi(xi_k) dxi / (2 pi)^d with the
// continuous-transform normalization u_hat(xi) = int u e^{-i xi x} dx.
// Raises an aliasing error when an atom oscillates beyond the frequency
// window of the grid (|y| * h > pi).
double energy_fourier(const LevySymbol& sym, const GridFunction& u);

struct DirectEnergy {
    double local = 0.0;
    double jump = 0.0;
    bool interpolated = false;  // set when an atom is not an integer grid shift
    double total() const { return local + jump; }
};

// Strongly local part (1/2) int (S grad u, grad u) by central differences and
// jump part (1/2) sum_i w_i int (u(x+y_i) - u(x))^2 dx by shifted grids.
DirectEnergy energy_direct(const LevySymbol& sym, const GridFunction& u);
DirectEnergy energy_direct_pair(const LevySymbol& sym, const GridFunction& u,
                                const GridFunction& v);

// |E(u,v) + 2 int u(x) v(y) J(dx,dy)| for u, v with disjoint grid supports;
// the kernel term is sum_i w_i int u(x) v(x + y_i) dx.
double pairing_identity_residual(const LevySymbol& sym, const GridFunction& u,
                                 const GridFunction& v);

struct PositivityReport {
    bool certified = false;
    int eligible = 0;
    int excluded = 0;
    bool no_local_part = false;  // rank(S) == 0: vacuous certificate
};

// Desk-scale witness that a form with S != 0 keeps a strictly positive local
// part: every nonzero fixture whose gradient has a component along a
// positive-eigenvalue direction of S must have local energy > 0.
PositivityReport local_positivity_certificate(const LevySymbol& sym,
                                              const std::vector<const GridFunction*>& fixtures);

}  // namespace dflab

#pragma once

#include <functional>
#include <vector>

#include "scale.hpp"

namespace dflab {

struct DensityPiece {
    double lo = 0.0;
    double hi = 0.0;
    double density = 0.0;
};

struct Atom {
    double location = 0.0;
    double mass = 0.0;
};

// Lebesgue-Stieltjes measure of a monotone function at finite construction
// depth: a piecewise-constant nonnegative density plus finitely many atoms.
// Pieces are contiguous and sorted; atoms are sorted by location.
class MonotoneMeasure {
  public:
    MonotoneMeasure(std::vector<DensityPiece> pieces, std::vector<Atom> atoms, int depth);

    const std::vector<DensityPiece>& pieces() const { return pieces_; }
    const std::vector<Atom>& atoms() const { return atoms_; }
    int depth() const { return depth_; }
    Interval window() const;

    double total_mass() const;
    // Measure of [a,b); atoms at b are excluded, matching the left-continuous
    // tie-break of the generating function's inverse.
    double mass(double a, double b) const;
    double density_at(double y) const;
    // Total atom mass at locations <= y (prefix query for band estimators).
    double atom_mass_upto(double y) const;
    double atom_mass_total() const;

  private:
    std::vector<DensityPiece> pieces_;
    std::vector<double> piece_lo_;     // search keys
    std::vector<double> mass_prefix_;  // density mass accumulated at piece starts
    std::vector<Atom> atoms_;
    std::vector<double> atom_loc_;
    std::vector<double> atom_prefix_;  // atom mass through index i (inclusive)
    int depth_ = 0;
};

enum class Orientation { forward, inverse };

// Lebesgue-Stieltjes measure of s (forward) or of its generalized inverse
// (inverse) over `window`, an interval in the argument space of the chosen
// orientation.  Outside the construction region both directions extend with
// unit density.  Flat pieces of s become atoms of d(s^-1): one atom per flat
// interval, located at the flat level, with mass equal to the interval length.
MonotoneMeasure stieltjes_measure(const ScaleFunction& s, Orientation orientation,
                                  Interval window);

// integral of g against mu: composite Gauss-Legendre on each density piece
// (subdivided) plus the atom sum.  `splits` forces additional panel
// boundaries (e.g. at kinks of g).
double stieltjes_integrate(const std::function<double(double)>& g, const MonotoneMeasure& mu,
                           int subdivisions = 8, const std::vector<double>& splits = {});

// Composite Gauss-Legendre(5) of g over [a,b] split into n panels.
double gauss_integrate(const std::function<double(double)>& g, double a, double b, int panels);

}  // namespace dflab

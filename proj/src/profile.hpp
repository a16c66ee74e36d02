#pragma once

#include <vector>

#include "scale.hpp"

namespace dflab {

// Compactly supported profile phi on the image space J = s(I).  Built-ins:
// a hat (piecewise linear, apex at the support midpoint) and the C^1 bump
// amplitude*(1-z^2)^2 on z in [-1,1].  clamped() realizes the unit
// contraction min(max(phi, lo), hi) inside the same algebra.
class Profile {
  public:
    enum class Kind { hat, bump };

    static Profile hat(double left, double right, double slope);
    static Profile bump(double center, double radius, double amplitude = 1.0);

    Profile clamped(double lo, double hi) const;
    Profile scaled(double factor) const;

    double operator()(double y) const;
    double deriv(double y) const;
    double deriv2(double y) const;  // bump only (piecewise C^2); throws otherwise
    bool has_deriv2() const;

    Kind kind() const { return kind_; }
    Interval support() const { return support_; }
    // panel boundaries where phi' or phi'' is discontinuous
    std::vector<double> kinks() const;

  private:
    Profile() = default;
    double raw(double y) const;
    double raw_deriv(double y) const;

    Kind kind_ = Kind::bump;
    Interval support_{0.0, 0.0};
    double slope_ = 0.0;                       // hat
    double center_ = 0.0, radius_ = 1.0;       // bump
    double amplitude_ = 1.0;
    bool clamp_ = false;
    double clamp_lo_ = 0.0, clamp_hi_ = 1.0;
};

}  // namespace dflab

#pragma once

#include <limits>
#include <memory>
#include <string>
#include <vector>

namespace dflab {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    double length() const { return hi - lo; }
    bool contains(double x) const { return x >= lo && x <= hi; }
};

// Value of the standard Cantor function, truncated at `depth` ternary digits.
// Digits are extracted in exact 63-bit fixed-point arithmetic, so plateau
// values and the symmetry c(x) + c(1-x) = 1 hold to the truncation error
// 2^-depth with no floating-point drift.  Inputs are clamped: c(x) = 0 for
// x < 0 and c(x) = 1 for x > 1.
double cantor_function(double x, int depth);

enum class ScaleFamily { identity, affine, fat_cantor, inverse_cantor };

const char* family_name(ScaleFamily f);

struct Gap {
    double left = 0.0;
    double right = 0.0;
    int level = 0;
    double width() const { return right - left; }
};

// A monotone non-decreasing piecewise-linear function s with s(anchor) = 0,
// slope 1 outside its construction window.  The two singular families keep
// exact bookkeeping of the slope-deficient ("flat") pieces:
//
//   fat_cantor(lambda, n):  on [0,1]; at step k a centered open interval of
//     length lambda*2^(1-2k) is removed from each of the 2^(k-1) surviving
//     intervals; s has slope 0 on the removed gaps and slope 1 on the
//     survivors, so s(x) = x - |gaps \cap [0,x]|.  The gap mass through
//     depth n is lambda*(1 - 2^-n).
//
//   inverse_cantor(n):  on [0,2]; defined through its inverse
//     s^-1(y) = c_n(y) + y on [0,1], with c_n the depth-n piecewise-linear
//     Cantor function.  Forward evaluation uses monotone bisection on s^-1.
//
//   identity / affine(c):  reference and counterexample families; affine has
//     slope c in (0,1] on its window (deliberately violating slope in {0,1}).
class ScaleFunction {
  public:
    static ScaleFunction identity(Interval window = {0.0, 1.0});
    static ScaleFunction affine(double c, Interval window = {0.0, 1.0});
    static ScaleFunction fat_cantor(double lambda, int depth);
    static ScaleFunction inverse_cantor(int depth);

    double eval(double x) const;
    // Left endpoint of the preimage of y (documented tie-break on flat levels).
    double inverse(double y) const;
    // Rightmost preimage; used for support bookkeeping.
    double inverse_right(double y) const;

    // Exact measure of slope deficiency: integral of (1 - s'(x)) dx over
    // [a,b] intersected with the construction window.  For the fat-Cantor
    // family this is precisely the Lebesgue measure of the flat set in [a,b].
    double flat_mass(double a, double b) const;
    double flat_mass_total() const;

    ScaleFamily family() const { return family_; }
    int depth() const { return depth_; }
    double lambda() const { return lambda_; }
    double slope_c() const { return slope_c_; }
    Interval domain() const { return domain_; }
    Interval range() const { return {values_.front(), values_.back()}; }
    double anchor() const { return anchor_; }

    // True when every slope is exactly 0 or 1 (the subspace families).
    bool unit_slope_family() const;
    // Narrowest piece with slope < 1; +inf when none exists.
    double min_gap_width() const;
    // Narrowest linear piece of any slope (grid-resolution driver).
    double min_piece_width() const;
    const std::vector<Gap>& gaps() const { return gaps_; }

    // Piecewise-linear data on the window: breaks_[i] <= x <= breaks_[i+1]
    // has slope slopes_[i]; values_[i] = s(breaks_[i]).
    const std::vector<double>& breakpoints() const { return breaks_; }
    const std::vector<double>& values() const { return values_; }
    const std::vector<double>& slopes() const { return slopes_; }

    std::string to_json() const;
    static ScaleFunction from_json(const std::string& text);
    std::string gaps_csv() const;

  private:
    ScaleFunction() = default;
    void finalize();  // fill values_, flat_prefix_ from breaks_/slopes_
    double eval_pl(double x) const;
    double bisect_eval(double x) const;

    ScaleFamily family_ = ScaleFamily::identity;
    int depth_ = 0;
    double lambda_ = 0.0;
    double slope_c_ = 1.0;
    Interval domain_;
    double anchor_ = 0.0;

    std::vector<double> breaks_;
    std::vector<double> values_;
    std::vector<double> slopes_;
    std::vector<double> flat_prefix_;  // flat mass on [breaks_[0], breaks_[i]]
    std::vector<Gap> gaps_;

    // inverse representation (y-breakpoints and x-values) for the
    // inverse-Cantor family, where the forward map is defined implicitly
    std::vector<double> inv_breaks_;
    std::vector<double> inv_values_;
};

using ScalePtr = std::shared_ptr<const ScaleFunction>;

}  // namespace dflab

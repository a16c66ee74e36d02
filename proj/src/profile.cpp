#include "profile.hpp"

#include <algorithm>
#include <cmath>

#include "errors.hpp"

namespace dflab {

Profile Profile::hat(double left, double right, double slope) {
    if (!(left < right)) throw_invalid("hat profile: empty support");
    if (!(slope > 0.0)) throw_invalid("hat profile: slope must be positive");
    Profile p;
    p.kind_ = Kind::hat;
    p.support_ = {left, right};
    p.slope_ = slope;
    return p;
}

Profile Profile::bump(double center, double radius, double amplitude) {
    if (!(radius > 0.0)) throw_invalid("bump profile: radius must be positive");
    Profile p;
    p.kind_ = Kind::bump;
    p.support_ = {center - radius, center + radius};
    p.center_ = center;
    p.radius_ = radius;
    p.amplitude_ = amplitude;
    return p;
}

Profile Profile::clamped(double lo, double hi) const {
    if (!(lo < hi)) throw_invalid("clamped profile: lo must be < hi");
    Profile p = *this;
    p.clamp_ = true;
    p.clamp_lo_ = lo;
    p.clamp_hi_ = hi;
    return p;
}

Profile Profile::scaled(double factor) const {
    Profile p = *this;
    if (p.clamp_) throw_unsupported("scaled: cannot rescale a clamped profile");
    if (p.kind_ == Kind::hat)
        p.slope_ *= factor;
    else
        p.amplitude_ *= factor;
    return p;
}

double Profile::raw(double y) const {
    if (y <= support_.lo || y >= support_.hi) return 0.0;
    if (kind_ == Kind::hat) {
        const double mid = 0.5 * (support_.lo + support_.hi);
        return y <= mid ? slope_ * (y - support_.lo) : slope_ * (support_.hi - y);
    }
    const double z = (y - center_) / radius_;
    const double t = 1.0 - z * z;
    return amplitude_ * t * t;
}

double Profile::raw_deriv(double y) const {
    if (y <= support_.lo || y >= support_.hi) return 0.0;
    if (kind_ == Kind::hat) {
        const double mid = 0.5 * (support_.lo + support_.hi);
        return y <= mid ? slope_ : -slope_;
    }
    const double z = (y - center_) / radius_;
    return amplitude_ * (-4.0 * z) * (1.0 - z * z) / radius_;
}

double Profile::operator()(double y) const {
    const double v = raw(y);
    return clamp_ ? std::clamp(v, clamp_lo_, clamp_hi_) : v;
}

double Profile::deriv(double y) const {
    if (!clamp_) return raw_deriv(y);
    const double v = raw(y);
    if (v <= clamp_lo_ || v >= clamp_hi_) return 0.0;
    return raw_deriv(y);
}

bool Profile::has_deriv2() const { return kind_ == Kind::bump && !clamp_; }

double Profile::deriv2(double y) const {
    if (!has_deriv2())
        throw_unsupported("profile: second derivative requires an unclamped bump");
    if (y <= support_.lo || y >= support_.hi) return 0.0;
    const double z = (y - center_) / radius_;
    return amplitude_ * (12.0 * z * z - 4.0) / (radius_ * radius_);
}

std::vector<double> Profile::kinks() const {
    std::vector<double> ks = {support_.lo, support_.hi};
    if (kind_ == Kind::hat) ks.push_back(0.5 * (support_.lo + support_.hi));
    if (clamp_) {
        // crossings of the clamp levels
        for (double level : {clamp_lo_, clamp_hi_}) {
            if (kind_ == Kind::hat) {
                const double peak = slope_ * 0.5 * (support_.hi - support_.lo);
                if (level > 0.0 && level < peak) {
                    ks.push_back(support_.lo + level / slope_);
                    ks.push_back(support_.hi - level / slope_);
                }
            } else {
                if (level > 0.0 && level < amplitude_) {
                    const double z = std::sqrt(1.0 - std::sqrt(level / amplitude_));
                    ks.push_back(center_ - radius_ * z);
                    ks.push_back(center_ + radius_ * z);
                }
            }
        }
    }
    std::sort(ks.begin(), ks.end());
    ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
    return ks;
}

}  // namespace dflab

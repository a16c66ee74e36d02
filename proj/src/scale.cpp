#include "scale.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>

#include "errors.hpp"
#include "json.hpp"

namespace dflab {

namespace {
constexpr int kMaxDepth = 24;
constexpr double kBisectTol = 1e-12;
constexpr int kBisectCap = 200;
}  // namespace

const char* family_name(ScaleFamily f) {
    switch (f) {
        case ScaleFamily::identity: return "identity";
        case ScaleFamily::affine: return "affine";
        case ScaleFamily::fat_cantor: return "fat_cantor";
        case ScaleFamily::inverse_cantor: return "inverse_cantor";
    }
    return "unknown";
}

double cantor_function(double x, int depth) {
    if (depth < 1) throw_invalid("cantor_function: depth must be >= 1");
    if (std::isnan(x)) throw_domain("cantor_function: x is NaN");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;

    // 63-bit fixed point; the scaling by 2^63 is a pure exponent shift and the
    // conversion truncates bits below 2^-63, keeping digit extraction exact.
    auto frac = static_cast<std::uint64_t>(x * 9223372036854775808.0);
    constexpr std::uint64_t mask = (std::uint64_t{1} << 63) - 1;
    double out = 0.0;
    double bit = 0.5;
    for (int k = 0; k < depth; ++k) {
        unsigned __int128 tripled = static_cast<unsigned __int128>(frac) * 3u;
        int digit = static_cast<int>(tripled >> 63);
        frac = static_cast<std::uint64_t>(tripled) & mask;
        if (digit == 1) {
            out += bit;
            break;
        }
        if (digit == 2) out += bit;
        bit *= 0.5;
    }
    return out;
}

void ScaleFunction::finalize() {
    values_.assign(breaks_.size(), 0.0);
    flat_prefix_.assign(breaks_.size(), 0.0);
    for (std::size_t i = 0; i + 1 < breaks_.size(); ++i) {
        const double w = breaks_[i + 1] - breaks_[i];
        values_[i + 1] = values_[i] + slopes_[i] * w;
        flat_prefix_[i + 1] = flat_prefix_[i] + (1.0 - slopes_[i]) * w;
    }
    // shift so that s(anchor) = 0; anchor is always the leftmost breakpoint here
    const double off = values_.front();
    if (off != 0.0)
        for (double& v : values_) v -= off;
}

ScaleFunction ScaleFunction::identity(Interval window) {
    if (!(window.lo < window.hi)) throw_invalid("identity scale: empty window");
    ScaleFunction s;
    s.family_ = ScaleFamily::identity;
    s.domain_ = window;
    s.anchor_ = window.lo;
    s.breaks_ = {window.lo, window.hi};
    s.slopes_ = {1.0};
    s.finalize();
    return s;
}

ScaleFunction ScaleFunction::affine(double c, Interval window) {
    if (!(c > 0.0) || c > 1.0) throw_invalid("affine scale: slope must lie in (0,1]");
    if (!(window.lo < window.hi)) throw_invalid("affine scale: empty window");
    ScaleFunction s;
    s.family_ = ScaleFamily::affine;
    s.slope_c_ = c;
    s.domain_ = window;
    s.anchor_ = window.lo;
    s.breaks_ = {window.lo, window.hi};
    s.slopes_ = {c};
    s.finalize();
    return s;
}

ScaleFunction ScaleFunction::fat_cantor(double lambda, int depth) {
    if (!(lambda > 0.0) || !(lambda < 1.0))
        throw_invalid("fat_cantor: flat fraction must lie in (0,1)");
    if (depth < 1) throw_invalid("fat_cantor: depth must be >= 1");
    if (depth > kMaxDepth) throw_invalid("fat_cantor: depth exceeds supported maximum 24");

    ScaleFunction s;
    s.family_ = ScaleFamily::fat_cantor;
    s.lambda_ = lambda;
    s.depth_ = depth;
    s.domain_ = {0.0, 1.0};
    s.anchor_ = 0.0;

    std::vector<Interval> survivors = {{0.0, 1.0}};
    for (int k = 1; k <= depth; ++k) {
        const double gap_len = lambda * std::ldexp(1.0, 1 - 2 * k);
        std::vector<Interval> next;
        next.reserve(survivors.size() * 2);
        for (const Interval& iv : survivors) {
            const double len = iv.length();
            if (!(gap_len < len))
                throw Error(ErrorCode::invalid_argument,
                            "fat_cantor: removed length exceeds interval length at step " +
                                std::to_string(k));
            const double gl = iv.lo + 0.5 * (len - gap_len);
            const double gr = gl + gap_len;
            s.gaps_.push_back({gl, gr, k});
            next.push_back({iv.lo, gl});
            next.push_back({gr, iv.hi});
        }
        survivors = std::move(next);
    }
    std::sort(s.gaps_.begin(), s.gaps_.end(),
              [](const Gap& a, const Gap& b) { return a.left < b.left; });

    s.breaks_.reserve(2 * s.gaps_.size() + 2);
    s.slopes_.reserve(2 * s.gaps_.size() + 1);
    s.breaks_.push_back(0.0);
    for (const Gap& g : s.gaps_) {
        s.slopes_.push_back(1.0);
        s.breaks_.push_back(g.left);
        s.slopes_.push_back(0.0);
        s.breaks_.push_back(g.right);
    }
    s.slopes_.push_back(1.0);
    s.breaks_.push_back(1.0);
    s.finalize();
    return s;
}

ScaleFunction ScaleFunction::inverse_cantor(int depth) {
    if (depth < 1) throw_invalid("inverse_cantor: depth must be >= 1");
    if (depth > kMaxDepth) throw_invalid("inverse_cantor: depth exceeds supported maximum 24");

    ScaleFunction s;
    s.family_ = ScaleFamily::inverse_cantor;
    s.depth_ = depth;
    s.domain_ = {0.0, 2.0};
    s.anchor_ = 0.0;

    // surviving intervals of the depth-n ternary construction, in order
    std::vector<Interval> survivors = {{0.0, 1.0}};
    for (int k = 1; k <= depth; ++k) {
        std::vector<Interval> next;
        next.reserve(survivors.size() * 2);
        for (const Interval& iv : survivors) {
            const double third = iv.length() / 3.0;
            next.push_back({iv.lo, iv.lo + third});
            next.push_back({iv.hi - third, iv.hi});
        }
        survivors = std::move(next);
    }

    // s^-1(y) = c_n(y) + y, with c_n rising by 2^-n across the i-th survivor
    const double rise = std::ldexp(1.0, -depth);
    s.inv_breaks_.reserve(2 * survivors.size());
    s.inv_values_.reserve(2 * survivors.size());
    double c_level = 0.0;
    for (const Interval& iv : survivors) {
        s.inv_breaks_.push_back(iv.lo);
        s.inv_values_.push_back(c_level + iv.lo);
        c_level += rise;
        s.inv_breaks_.push_back(iv.hi);
        s.inv_values_.push_back(c_level + iv.hi);
    }
    // pin the endpoints exactly: c_n(0) = 0, c_n(1) = 1
    s.inv_values_.front() = 0.0;
    s.inv_values_.back() = 2.0;

    // the forward map is the exact reflection of the strictly increasing s^-1
    s.breaks_ = s.inv_values_;
    s.values_ = s.inv_breaks_;
    s.slopes_.resize(s.breaks_.size() - 1);
    for (std::size_t i = 0; i + 1 < s.breaks_.size(); ++i) {
        const double dx = s.breaks_[i + 1] - s.breaks_[i];
        const double dy = s.values_[i + 1] - s.values_[i];
        s.slopes_[i] = dy / dx;
    }
    s.flat_prefix_.assign(s.breaks_.size(), 0.0);
    for (std::size_t i = 0; i + 1 < s.breaks_.size(); ++i) {
        const double w = s.breaks_[i + 1] - s.breaks_[i];
        s.flat_prefix_[i + 1] = s.flat_prefix_[i] + (1.0 - s.slopes_[i]) * w;
        if (s.slopes_[i] < 0.5)
            s.gaps_.push_back({s.breaks_[i], s.breaks_[i + 1], depth});
    }
    return s;
}

double ScaleFunction::eval_pl(double x) const {
    if (x <= breaks_.front()) return values_.front() + (x - breaks_.front());
    if (x >= breaks_.back()) return values_.back() + (x - breaks_.back());
    const auto it = std::upper_bound(breaks_.begin(), breaks_.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - breaks_.begin()) - 1;
    return values_[i] + slopes_[i] * (x - breaks_[i]);
}

double ScaleFunction::bisect_eval(double x) const {
    // monotone bisection on s^-1 over its y-window
    double lo = 0.0, hi = 1.0;
    const auto sinv = [this](double y) {
        const auto it = std::upper_bound(inv_breaks_.begin(), inv_breaks_.end(), y);
        std::size_t i = static_cast<std::size_t>(it - inv_breaks_.begin());
        if (i == 0) return inv_values_.front() + (y - inv_breaks_.front());
        if (i == inv_breaks_.size()) return inv_values_.back() + (y - inv_breaks_.back());
        --i;
        const double t = (y - inv_breaks_[i]) / (inv_breaks_[i + 1] - inv_breaks_[i]);
        return inv_values_[i] + t * (inv_values_[i + 1] - inv_values_[i]);
    };
    int iter = 0;
    while (hi - lo > kBisectTol) {
        if (++iter > kBisectCap)
            throw_numeric("scale eval: bisection failed to converge (monotonicity bug)");
        const double mid = 0.5 * (lo + hi);
        if (sinv(mid) < x)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

double ScaleFunction::eval(double x) const {
    if (std::isnan(x)) throw_domain("scale eval: x is NaN");
    if (family_ == ScaleFamily::inverse_cantor) {
        if (x <= 0.0) return x;
        if (x >= 2.0) return 1.0 + (x - 2.0);
        return bisect_eval(x);
    }
    return eval_pl(x);
}

double ScaleFunction::inverse(double y) const {
    if (std::isnan(y)) throw_domain("scale inverse: y outside range (NaN)");
    if (family_ == ScaleFamily::inverse_cantor) {
        if (y <= 0.0) return y;
        if (y >= 1.0) return 2.0 + (y - 1.0);
        const auto it = std::upper_bound(inv_breaks_.begin(), inv_breaks_.end(), y);
        const std::size_t i = static_cast<std::size_t>(it - inv_breaks_.begin()) - 1;
        const double t = (y - inv_breaks_[i]) / (inv_breaks_[i + 1] - inv_breaks_[i]);
        return inv_values_[i] + t * (inv_values_[i + 1] - inv_values_[i]);
    }
    if (y <= values_.front()) return breaks_.front() + (y - values_.front());
    if (y >= values_.back()) return breaks_.back() + (y - values_.back());
    const auto it = std::lower_bound(values_.begin(), values_.end(), y);
    const std::size_t i = static_cast<std::size_t>(it - values_.begin());
    if (values_[i] == y) return breaks_[i];  // left endpoint of the preimage
    return breaks_[i - 1] + (y - values_[i - 1]) / slopes_[i - 1];
}

double ScaleFunction::inverse_right(double y) const {
    if (std::isnan(y)) throw_domain("scale inverse: y outside range (NaN)");
    if (family_ == ScaleFamily::inverse_cantor) return inverse(y);  // strictly increasing
    if (y <= values_.front()) return breaks_.front() + (y - values_.front());
    if (y >= values_.back()) return breaks_.back() + (y - values_.back());
    const auto it = std::upper_bound(values_.begin(), values_.end(), y);
    const std::size_t i = static_cast<std::size_t>(it - values_.begin());
    if (values_[i - 1] == y) return breaks_[i - 1];  // right endpoint of a flat run
    return breaks_[i - 1] + (y - values_[i - 1]) / slopes_[i - 1];
}

double ScaleFunction::flat_mass(double a, double b) const {
    if (!(a <= b)) std::swap(a, b);
    const double lo = std::max(a, breaks_.front());
    const double hi = std::min(b, breaks_.back());
    if (!(lo < hi)) return 0.0;
    const auto prefix = [this](double x) {
        const auto it = std::upper_bound(breaks_.begin(), breaks_.end(), x);
        std::size_t i = static_cast<std::size_t>(it - breaks_.begin());
        if (i == 0) return 0.0;
        if (i == breaks_.size()) return flat_prefix_.back();
        --i;
        return flat_prefix_[i] + (1.0 - slopes_[i]) * (x - breaks_[i]);
    };
    return prefix(hi) - prefix(lo);
}

double ScaleFunction::flat_mass_total() const { return flat_prefix_.back(); }

bool ScaleFunction::unit_slope_family() const {
    return family_ == ScaleFamily::identity || family_ == ScaleFamily::fat_cantor;
}

double ScaleFunction::min_gap_width() const {
    double w = std::numeric_limits<double>::infinity();
    for (const Gap& g : gaps_) w = std::min(w, g.width());
    return w;
}

double ScaleFunction::min_piece_width() const {
    if (gaps_.empty()) return std::numeric_limits<double>::infinity();
    double w = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < breaks_.size(); ++i)
        w = std::min(w, breaks_[i + 1] - breaks_[i]);
    return w;
}

std::string ScaleFunction::to_json() const {
    nlohmann::json j;
    j["family"] = family_name(family_);
    nlohmann::json params = nlohmann::json::object();
    if (family_ == ScaleFamily::fat_cantor) params["lambda"] = lambda_;
    if (family_ == ScaleFamily::affine) params["c"] = slope_c_;
    if (family_ == ScaleFamily::identity || family_ == ScaleFamily::affine) {
        params["window"] = {domain_.lo, domain_.hi};
    }
    j["parameters"] = params;
    j["depth"] = depth_;
    j["anchor"] = anchor_;
    return j.dump();
}

ScaleFunction ScaleFunction::from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw_parse(std::string("scale descriptor: ") + e.what());
    }
    try {
        const std::string fam = j.at("family").get<std::string>();
        const nlohmann::json params = j.value("parameters", nlohmann::json::object());
        Interval window{0.0, 1.0};
        if (params.contains("window")) {
            window.lo = params["window"].at(0).get<double>();
            window.hi = params["window"].at(1).get<double>();
        }
        if (fam == "identity") return ScaleFunction::identity(window);
        if (fam == "affine") return ScaleFunction::affine(params.at("c").get<double>(), window);
        if (fam == "fat_cantor")
            return ScaleFunction::fat_cantor(params.at("lambda").get<double>(),
                                             j.at("depth").get<int>());
        if (fam == "inverse_cantor") return ScaleFunction::inverse_cantor(j.at("depth").get<int>());
        throw_parse("scale descriptor: unknown family '" + fam + "'");
    } catch (const nlohmann::json::exception& e) {
        throw_parse(std::string("scale descriptor: ") + e.what());
    }
}

std::string ScaleFunction::gaps_csv() const {
    std::ostringstream out;
    out << "left,right,level\n";
    char buf[80];
    for (const Gap& g : gaps_) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%d\n", g.left, g.right, g.level);
        out << buf;
    }
    return out.str();
}

}  // namespace dflab

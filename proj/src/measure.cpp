#include "measure.hpp"

#include <algorithm>
#include <cmath>

#include "errors.hpp"

namespace dflab {

namespace {

constexpr double kGaussNode[5] = {-0.906179845938664, -0.5384693101056831, 0.0,
                                  0.5384693101056831, 0.906179845938664};
constexpr double kGaussWeight[5] = {0.23692688505618908, 0.47862867049936647,
                                    0.5688888888888889, 0.47862867049936647,
                                    0.23692688505618908};

}  // namespace

double gauss_integrate(const std::function<double(double)>& g, double a, double b, int panels) {
    if (!(b > a)) return 0.0;
    if (panels < 1) panels = 1;
    const double w = (b - a) / panels;
    double sum = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double mid = a + (p + 0.5) * w;
        const double half = 0.5 * w;
        double acc = 0.0;
        for (int q = 0; q < 5; ++q) acc += kGaussWeight[q] * g(mid + half * kGaussNode[q]);
        sum += acc * half;
    }
    return sum;
}

MonotoneMeasure::MonotoneMeasure(std::vector<DensityPiece> pieces, std::vector<Atom> atoms,
                                 int depth)
    : pieces_(std::move(pieces)), atoms_(std::move(atoms)), depth_(depth) {
    for (const DensityPiece& p : pieces_) {
        if (!(p.hi >= p.lo) || p.density < 0.0)
            throw_invalid("MonotoneMeasure: pieces must be ordered with density >= 0");
    }
    for (const Atom& a : atoms_) {
        if (!(a.mass >= 0.0)) throw_invalid("MonotoneMeasure: atom masses must be >= 0");
    }
    std::sort(atoms_.begin(), atoms_.end(),
              [](const Atom& a, const Atom& b) { return a.location < b.location; });
    piece_lo_.reserve(pieces_.size());
    mass_prefix_.assign(pieces_.size() + 1, 0.0);
    for (std::size_t i = 0; i < pieces_.size(); ++i) {
        piece_lo_.push_back(pieces_[i].lo);
        mass_prefix_[i + 1] = mass_prefix_[i] + pieces_[i].density * (pieces_[i].hi - pieces_[i].lo);
    }
    atom_loc_.reserve(atoms_.size());
    atom_prefix_.reserve(atoms_.size());
    double acc = 0.0;
    for (const Atom& a : atoms_) {
        atom_loc_.push_back(a.location);
        acc += a.mass;
        atom_prefix_.push_back(acc);
    }
}

Interval MonotoneMeasure::window() const {
    if (pieces_.empty()) return {0.0, 0.0};
    return {pieces_.front().lo, pieces_.back().hi};
}

double MonotoneMeasure::total_mass() const {
    return mass_prefix_.back() + atom_mass_total();
}

double MonotoneMeasure::atom_mass_total() const {
    return atom_prefix_.empty() ? 0.0 : atom_prefix_.back();
}

double MonotoneMeasure::density_at(double y) const {
    if (pieces_.empty()) return 0.0;
    if (y < pieces_.front().lo || y >= pieces_.back().hi) return 1.0;  // unit-slope extension
    auto it = std::upper_bound(piece_lo_.begin(), piece_lo_.end(), y);
    const std::size_t i = static_cast<std::size_t>(it - piece_lo_.begin()) - 1;
    return pieces_[i].density;
}

double MonotoneMeasure::atom_mass_upto(double y) const {
    auto it = std::upper_bound(atom_loc_.begin(), atom_loc_.end(), y);
    if (it == atom_loc_.begin()) return 0.0;
    return atom_prefix_[static_cast<std::size_t>(it - atom_loc_.begin()) - 1];
}

double MonotoneMeasure::mass(double a, double b) const {
    if (!(a <= b)) std::swap(a, b);
    const auto density_prefix = [this](double y) {
        if (pieces_.empty()) return 0.0;
        if (y <= pieces_.front().lo) return 0.0;
        if (y >= pieces_.back().hi) return mass_prefix_.back();
        auto it = std::upper_bound(piece_lo_.begin(), piece_lo_.end(), y);
        const std::size_t i = static_cast<std::size_t>(it - piece_lo_.begin()) - 1;
        return mass_prefix_[i] + pieces_[i].density * (y - pieces_[i].lo);
    };
    double m = density_prefix(b) - density_prefix(a);
    // atoms in [a, b)
    auto lo = std::lower_bound(atom_loc_.begin(), atom_loc_.end(), a);
    auto hi = std::lower_bound(atom_loc_.begin(), atom_loc_.end(), b);
    for (auto it = lo; it != hi; ++it) m += atoms_[static_cast<std::size_t>(it - atom_loc_.begin())].mass;
    return m;
}

MonotoneMeasure stieltjes_measure(const ScaleFunction& s, Orientation orientation,
                                  Interval window) {
    if (!(window.lo < window.hi)) throw_invalid("stieltjes_measure: empty window");
    std::vector<DensityPiece> pieces;
    std::vector<Atom> atoms;

    const auto emit = [&pieces, &window](double lo, double hi, double density) {
        const double a = std::max(lo, window.lo);
        const double b = std::min(hi, window.hi);
        if (a < b) pieces.push_back({a, b, density});
    };

    if (orientation == Orientation::forward) {
        const auto& bx = s.breakpoints();
        const auto& sl = s.slopes();
        emit(-std::numeric_limits<double>::infinity(), bx.front(), 1.0);
        for (std::size_t i = 0; i + 1 < bx.size(); ++i) emit(bx[i], bx[i + 1], sl[i]);
        emit(bx.back(), std::numeric_limits<double>::infinity(), 1.0);
    } else {
        // measure of the generalized inverse, indexed by the value space of s
        const auto& bx = s.breakpoints();
        const auto& bv = s.values();
        const auto& sl = s.slopes();
        emit(-std::numeric_limits<double>::infinity(), bv.front(), 1.0);
        for (std::size_t i = 0; i + 1 < bx.size(); ++i) {
            if (sl[i] > 0.0) {
                emit(bv[i], bv[i + 1], 1.0 / sl[i]);
            } else {
                const double level = bv[i];
                if (level >= window.lo && level < window.hi)
                    atoms.push_back({level, bx[i + 1] - bx[i]});
            }
        }
        emit(bv.back(), std::numeric_limits<double>::infinity(), 1.0);
    }
    return MonotoneMeasure(std::move(pieces), std::move(atoms), s.depth());
}

double stieltjes_integrate(const std::function<double(double)>& g, const MonotoneMeasure& mu,
                           int subdivisions, const std::vector<double>& splits) {
    if (subdivisions < 1) subdivisions = 1;
    std::vector<double> cuts(splits);
    std::sort(cuts.begin(), cuts.end());
    double sum = 0.0;
    // keep the total panel count bounded when the measure has many pieces
    const int per_piece =
        mu.pieces().size() > 4096 ? 1 : subdivisions;
    for (const DensityPiece& p : mu.pieces()) {
        if (p.density == 0.0 || !(p.hi > p.lo)) continue;
        double a = p.lo;
        auto it = std::upper_bound(cuts.begin(), cuts.end(), p.lo);
        while (it != cuts.end() && *it < p.hi) {
            sum += p.density * gauss_integrate(g, a, *it, per_piece);
            a = *it;
            ++it;
        }
        sum += p.density * gauss_integrate(g, a, p.hi, per_piece);
    }
    for (const Atom& a : mu.atoms()) sum += g(a.location) * a.mass;
    return sum;
}

}  // namespace dflab

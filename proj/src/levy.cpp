#include "levy.hpp"

#include <fftw3.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <numeric>

#include "errors.hpp"
#include "json.hpp"

namespace dflab {

namespace {

std::mutex& fftw_mutex() {
    static std::mutex m;
    return m;
}

long flat_size(const std::vector<int>& n) {
    long s = 1;
    for (int v : n) s *= v;
    return s;
}

}  // namespace

LevySymbol::LevySymbol(int dim, std::vector<double> S_rowmajor, std::vector<SymbolAtom> atoms)
    : dim_(dim), S_(std::move(S_rowmajor)), atoms_(std::move(atoms)) {
    if (dim_ < 1 || dim_ > 3) throw_invalid("levy symbol: dimension must be 1, 2 or 3");
    if (S_.size() != static_cast<std::size_t>(dim_ * dim_))
        throw_invalid("levy symbol: S must be d x d");
    Eigen::MatrixXd S(dim_, dim_);
    for (int i = 0; i < dim_; ++i)
        for (int j = 0; j < dim_; ++j) {
            S(i, j) = S_[i * dim_ + j];
            if (S_[i * dim_ + j] != S_[j * dim_ + i])
                throw_invalid("levy symbol: S must be symmetric");
        }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
    const double lmin = es.eigenvalues().minCoeff();
    const double lmax = std::max(1.0, std::abs(es.eigenvalues().maxCoeff()));
    if (lmin < -1e-12 * lmax) throw_invalid("levy symbol: S must be positive semidefinite");

    for (const SymbolAtom& a : atoms_) {
        if (a.y.size() != static_cast<std::size_t>(dim_))
            throw_invalid("levy symbol: atom dimension mismatch");
        if (!(a.w > 0.0)) throw_invalid("levy symbol: atom weights must be > 0");
    }
    // the measure must be symmetric: every atom needs its mirror with equal weight
    for (const SymbolAtom& a : atoms_) {
        bool found = false;
        for (const SymbolAtom& b : atoms_) {
            bool mirror = b.w == a.w;
            for (int i = 0; i < dim_ && mirror; ++i) mirror = b.y[i] == -a.y[i];
            if (mirror) {
                found = true;
                break;
            }
        }
        if (!found) throw_invalid("levy symbol: atom list is not closed under y -> -y");
    }
}

double LevySymbol::eval(const std::vector<double>& x) const {
    if (x.size() != static_cast<std::size_t>(dim_)) throw_invalid("symbol eval: dimension mismatch");
    double quad = 0.0;
    for (int i = 0; i < dim_; ++i)
        for (int j = 0; j < dim_; ++j) quad += x[i] * S_[i * dim_ + j] * x[j];
    double jump = 0.0;
    for (const SymbolAtom& a : atoms_) {
        double dot = 0.0;
        for (int i = 0; i < dim_; ++i) dot += x[i] * a.y[i];
        jump += a.w * (1.0 - std::cos(dot));
    }
    return 0.5 * quad + jump;
}

double LevySymbol::max_atom_norm() const {
    double best = 0.0;
    for (const SymbolAtom& a : atoms_) {
        double n2 = 0.0;
        for (double v : a.y) n2 += v * v;
        best = std::max(best, std::sqrt(n2));
    }
    return best;
}

SymbolDiag LevySymbol::diagonalize() const {
    Eigen::MatrixXd S(dim_, dim_);
    for (int i = 0; i < dim_; ++i)
        for (int j = 0; j < dim_; ++j) S(i, j) = S_[i * dim_ + j];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);

    // Eigen sorts ascending; flip to descending
    SymbolDiag out;
    out.eigenvalues.resize(dim_);
    out.P.assign(dim_ * dim_, 0.0);
    for (int c = 0; c < dim_; ++c) {
        const int src = dim_ - 1 - c;
        out.eigenvalues[c] = es.eigenvalues()(src);
        for (int r = 0; r < dim_; ++r) out.P[r * dim_ + c] = es.eigenvectors()(r, src);
    }
    const double lmax = std::max(0.0, out.eigenvalues.front());
    for (double l : out.eigenvalues)
        if (l > 1e-10 * std::max(lmax, 1e-300) && l > 0.0) ++out.rank;

    // reconstruction sanity: P^T S P must be the sorted diagonal
    Eigen::MatrixXd P(dim_, dim_);
    for (int r = 0; r < dim_; ++r)
        for (int c = 0; c < dim_; ++c) P(r, c) = out.P[r * dim_ + c];
    Eigen::MatrixXd D = P.transpose() * S * P;
    for (int r = 0; r < dim_; ++r) D(r, r) -= out.eigenvalues[r];
    if (D.norm() > 1e-10 * std::max(1.0, S.norm()))
        throw_numeric("diagonalize: reconstruction defect above 1e-10");
    return out;
}

std::string LevySymbol::to_json() const {
    nlohmann::json j;
    j["S"] = S_;
    nlohmann::json atoms = nlohmann::json::array();
    for (const SymbolAtom& a : atoms_) atoms.push_back({a.y, a.w});
    j["atoms"] = atoms;
    return j.dump();
}

LevySymbol LevySymbol::from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw_parse(std::string("levy symbol: ") + e.what());
    }
    try {
        auto S = j.at("S").get<std::vector<double>>();
        const int d = static_cast<int>(std::lround(std::sqrt(static_cast<double>(S.size()))));
        if (static_cast<std::size_t>(d) * d != S.size())
            throw_parse("levy symbol: S length is not a perfect square");
        std::vector<SymbolAtom> atoms;
        for (const auto& entry : j.value("atoms", nlohmann::json::array())) {
            SymbolAtom a;
            if (entry.at(0).is_number())
                a.y = {entry.at(0).get<double>()};
            else
                a.y = entry.at(0).get<std::vector<double>>();
            a.w = entry.at(1).get<double>();
            atoms.push_back(std::move(a));
        }
        return LevySymbol(d, std::move(S), std::move(atoms));
    } catch (const nlohmann::json::exception& e) {
        throw_parse(std::string("levy symbol: ") + e.what());
    }
}

void GridFunction::zero_boundary() {
    const int d = dim();
    std::vector<int> idx(d, 0);
    for (long flat = 0; flat < size(); ++flat) {
        bool boundary = false;
        long rem = flat;
        for (int i = d - 1; i >= 0; --i) {
            idx[i] = static_cast<int>(rem % n_[i]);
            rem /= n_[i];
            boundary = boundary || idx[i] == 0 || idx[i] == n_[i] - 1;
        }
        if (boundary) values_[flat] = 0.0;
    }
}

GridFunction GridFunction::sample_unrestricted(
    std::vector<double> lo, double h, std::vector<int> n,
    const std::function<double(const std::vector<double>&)>& f) {
    if (n.empty() || n.size() > 3) throw_invalid("grid: dimension must be 1, 2 or 3");
    if (!(h > 0.0)) throw_invalid("grid: spacing must be > 0");
    if (lo.size() != n.size()) throw_invalid("grid: box dimension mismatch");
    for (int v : n)
        if (v < 4) throw_invalid("grid: need at least 4 cells per dimension");
    GridFunction g;
    g.lo_ = std::move(lo);
    g.h_ = h;
    g.n_ = std::move(n);
    g.values_.assign(flat_size(g.n_), 0.0);
    const int d = g.dim();
    std::vector<double> x(d, 0.0);
    std::vector<int> idx(d, 0);
    for (long flat = 0; flat < g.size(); ++flat) {
        long rem = flat;
        for (int i = d - 1; i >= 0; --i) {
            idx[i] = static_cast<int>(rem % g.n_[i]);
            rem /= g.n_[i];
            x[i] = g.lo_[i] + (idx[i] + 0.5) * g.h_;
        }
        const double v = f(x);
        if (!std::isfinite(v)) throw_invalid("grid: sampler produced a non-finite value");
        g.values_[flat] = v;
    }
    return g;
}

GridFunction GridFunction::sample(std::vector<double> lo, double h, std::vector<int> n,
                                  const std::function<double(const std::vector<double>&)>& f) {
    GridFunction g = sample_unrestricted(std::move(lo), h, std::move(n), f);
    g.zero_boundary();
    return g;
}

GridFunction GridFunction::gaussian_bump(std::vector<double> lo, double h, std::vector<int> n,
                                         std::vector<double> center, double sigma,
                                         double amplitude) {
    if (!(sigma > 0.0)) throw_invalid("grid bump: sigma must be > 0");
    return sample(std::move(lo), h, std::move(n), [&center, sigma, amplitude](const std::vector<double>& x) {
        double r2 = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) r2 += (x[i] - center[i]) * (x[i] - center[i]);
        return amplitude * std::exp(-r2 / (2.0 * sigma * sigma));
    });
}

double GridFunction::cell_volume() const {
    double v = 1.0;
    for (int i = 0; i < dim(); ++i) v *= h_;
    return v;
}

bool GridFunction::same_geometry(const GridFunction& other) const {
    return n_ == other.n_ && lo_ == other.lo_ && h_ == other.h_;
}

bool GridFunction::disjoint_support(const GridFunction& other) const {
    if (!same_geometry(other)) throw_precondition("grids have different geometry");
    for (long i = 0; i < size(); ++i)
        if (values_[i] != 0.0 && other.values_[i] != 0.0) return false;
    return true;
}

double GridFunction::max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

GridFunction GridFunction::scaled(double a) const {
    GridFunction g = *this;
    for (double& v : g.values_) v *= a;
    return g;
}

GridFunction GridFunction::plus(const GridFunction& other) const {
    if (!same_geometry(other)) throw_precondition("grids have different geometry");
    GridFunction g = *this;
    for (long i = 0; i < size(); ++i) g.values_[i] += other.values_[i];
    return g;
}

GridFunction GridFunction::minus(const GridFunction& other) const {
    if (!same_geometry(other)) throw_precondition("grids have different geometry");
    GridFunction g = *this;
    for (long i = 0; i < size(); ++i) g.values_[i] -= other.values_[i];
    return g;
}

double energy_fourier(const LevySymbol& sym, const GridFunction& u) {
    if (sym.dim() != u.dim()) throw_precondition("energy_fourier: dimension mismatch");
    if (sym.max_atom_norm() * u.h() > M_PI)
        throw Error(ErrorCode::invalid_argument,
                    "energy_fourier: grid too coarse for the largest atom (|y| h > pi)");

    const int d = u.dim();
    const long total = u.size();
    std::vector<std::complex<double>> buf(total);
    for (long i = 0; i < total; ++i) buf[i] = u.values()[i];

    {
        std::lock_guard<std::mutex> lock(fftw_mutex());
        fftw_plan plan = fftw_plan_dft(
            d, u.shape().data(), reinterpret_cast<fftw_complex*>(buf.data()),
            reinterpret_cast<fftw_complex*>(buf.data()), FFTW_FORWARD, FFTW_ESTIMATE);
        fftw_execute(plan);
        fftw_destroy_plan(plan);
    }

    const auto& n = u.shape();
    std::vector<double> xi(d, 0.0);
    std::vector<int> idx(d, 0);
    double acc = 0.0;
    for (long flat = 0; flat < total; ++flat) {
        long rem = flat;
        for (int i = d - 1; i >= 0; --i) {
            idx[i] = static_cast<int>(rem % n[i]);
            rem /= n[i];
            const int wrapped = idx[i] <= n[i] / 2 ? idx[i] : idx[i] - n[i];
            xi[i] = 2.0 * M_PI * wrapped / (n[i] * u.h());
        }
        acc += std::norm(buf[flat]) * sym.eval(xi);
    }
    double scale = u.cell_volume();
    for (int i = 0; i < d; ++i) scale /= n[i];
    return acc * scale;
}

namespace {

// value of u at index offset by an atom, with multilinear interpolation when
// the shift is not a whole number of cells
struct Shifter {
    const GridFunction& u;
    std::vector<int> int_shift;
    std::vector<double> frac;
    bool integral = true;

    Shifter(const GridFunction& g, const std::vector<double>& y) : u(g) {
        const int d = g.dim();
        int_shift.resize(d);
        frac.resize(d, 0.0);
        for (int i = 0; i < d; ++i) {
            const double cells = y[i] / g.h();
            const double rounded = std::round(cells);
            if (std::abs(cells - rounded) < 1e-9) {
                int_shift[i] = static_cast<int>(rounded);
            } else {
                integral = false;
                int_shift[i] = static_cast<int>(std::floor(cells));
                frac[i] = cells - std::floor(cells);
            }
        }
    }

    double value(const std::vector<int>& idx) const {
        const int d = u.dim();
        if (integral) {
            long flat = 0;
            for (int i = 0; i < d; ++i) {
                const int j = idx[i] + int_shift[i];
                if (j < 0 || j >= u.shape()[i]) return 0.0;
                flat = flat * u.shape()[i] + j;
            }
            return u.values()[flat];
        }
        // multilinear over the 2^d surrounding corners
        double out = 0.0;
        for (int corner = 0; corner < (1 << d); ++corner) {
            double weight = 1.0;
            long flat = 0;
            bool inside = true;
            for (int i = 0; i < d && inside; ++i) {
                const int off = (corner >> i) & 1;
                const int j = idx[i] + int_shift[i] + off;
                weight *= off ? frac[i] : 1.0 - frac[i];
                if (j < 0 || j >= u.shape()[i])
                    inside = false;
                else
                    flat = flat * u.shape()[i] + j;
            }
            if (inside) out += weight * u.values()[flat];
        }
        return out;
    }
};

template <typename F>
void for_each_index(const std::vector<int>& n, F&& f) {
    const int d = static_cast<int>(n.size());
    std::vector<int> idx(d, 0);
    const long total = flat_size(n);
    for (long flat = 0; flat < total; ++flat) {
        long rem = flat;
        for (int i = d - 1; i >= 0; --i) {
            idx[i] = static_cast<int>(rem % n[i]);
            rem /= n[i];
        }
        f(flat, idx);
    }
}

// central difference in the interior, one-sided at the box faces (identical
// for compactly supported samples, exact for face-constant probes)
double grad_component(const GridFunction& u, long flat, int face, int n_i, long stride) {
    if (face == 0) return (u.values()[flat + stride] - u.values()[flat]) / u.h();
    if (face == n_i - 1) return (u.values()[flat] - u.values()[flat - stride]) / u.h();
    return (u.values()[flat + stride] - u.values()[flat - stride]) / (2.0 * u.h());
}

double grad_dot(const LevySymbol& sym, const GridFunction& u, const GridFunction& v) {
    const int d = u.dim();
    const auto& n = u.shape();
    std::vector<long> stride(d, 1);
    for (int i = d - 2; i >= 0; --i) stride[i] = stride[i + 1] * n[i + 1];
    std::vector<double> gu(d, 0.0), gv(d, 0.0);
    double acc = 0.0;
    for_each_index(n, [&](long flat, const std::vector<int>& idx) {
        for (int i = 0; i < d; ++i) {
            gu[i] = grad_component(u, flat, idx[i], n[i], stride[i]);
            gv[i] = grad_component(v, flat, idx[i], n[i], stride[i]);
        }
        double cell = 0.0;
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) cell += gu[i] * sym.S()[i * d + j] * gv[j];
        acc += cell;
    });
    return acc * u.cell_volume();
}

}  // namespace

DirectEnergy energy_direct_pair(const LevySymbol& sym, const GridFunction& u,
                                const GridFunction& v) {
    if (sym.dim() != u.dim()) throw_precondition("energy_direct: dimension mismatch");
    if (!u.same_geometry(v)) throw_precondition("energy_direct: grids differ");

    DirectEnergy out;
    bool s_zero = true;
    for (double s : sym.S()) s_zero = s_zero && s == 0.0;
    if (!s_zero) out.local = 0.5 * grad_dot(sym, u, v);

    for (const SymbolAtom& a : sym.atoms()) {
        const Shifter su(u, a.y);
        const Shifter sv(v, a.y);
        out.interpolated = out.interpolated || !su.integral;
        double acc = 0.0;
        for_each_index(u.shape(), [&](long flat, const std::vector<int>& idx) {
            const double du = su.value(idx) - u.values()[flat];
            const double dv = sv.value(idx) - v.values()[flat];
            acc += du * dv;
        });
        out.jump += 0.5 * a.w * acc * u.cell_volume();
    }
    return out;
}

DirectEnergy energy_direct(const LevySymbol& sym, const GridFunction& u) {
    return energy_direct_pair(sym, u, u);
}

double pairing_identity_residual(const LevySymbol& sym, const GridFunction& u,
                                 const GridFunction& v) {
    if (!u.same_geometry(v)) throw_precondition("pairing residual: grids differ");
    if (!u.disjoint_support(v))
        throw_precondition("pairing residual: supports overlap on the grid");

    const DirectEnergy e = energy_direct_pair(sym, u, v);

    double kernel = 0.0;
    for (const SymbolAtom& a : sym.atoms()) {
        const Shifter sv(v, a.y);
        double acc = 0.0;
        for_each_index(u.shape(), [&](long flat, const std::vector<int>& idx) {
            if (u.values()[flat] != 0.0) acc += u.values()[flat] * sv.value(idx);
        });
        kernel += a.w * acc * u.cell_volume();
    }
    return std::abs(e.total() + kernel);
}

PositivityReport local_positivity_certificate(const LevySymbol& sym,
                                              const std::vector<const GridFunction*>& fixtures) {
    const SymbolDiag diag = sym.diagonalize();
    PositivityReport rep;
    if (diag.rank == 0) {
        rep.certified = true;
        rep.no_local_part = true;
        rep.excluded = static_cast<int>(fixtures.size());
        return rep;
    }
    rep.certified = true;
    const int d = sym.dim();
    for (const GridFunction* up : fixtures) {
        const GridFunction& u = *up;
        if (u.max_abs() == 0.0) {
            ++rep.excluded;
            continue;
        }
        // project the gradient field onto the positive-eigenvalue directions
        const auto& n = u.shape();
        std::vector<long> stride(d, 1);
        for (int i = d - 2; i >= 0; --i) stride[i] = stride[i + 1] * n[i + 1];
        double mass_pos = 0.0, mass_all = 0.0;
        std::vector<double> g(d, 0.0);
        for_each_index(n, [&](long flat, const std::vector<int>& idx) {
            for (int i = 0; i < d; ++i) g[i] = grad_component(u, flat, idx[i], n[i], stride[i]);
            for (int c = 0; c < d; ++c) {
                double proj = 0.0;
                for (int r = 0; r < d; ++r) proj += diag.P[r * d + c] * g[r];
                if (c < diag.rank) mass_pos += proj * proj;
                mass_all += proj * proj;
            }
        });
        if (mass_pos <= 1e-12 * std::max(mass_all, 1e-300)) {
            ++rep.excluded;
            continue;
        }
        ++rep.eligible;
        const double local = energy_direct(sym, u).local;
        rep.certified = rep.certified && local > 0.0;
    }
    return rep;
}

}  // namespace dflab

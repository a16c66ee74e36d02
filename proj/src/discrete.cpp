#include "discrete.hpp"

#include <algorithm>
#include <cmath>

#include "errors.hpp"
#include "json.hpp"

namespace dflab {

FiniteForm make_form(std::vector<std::string> states, std::vector<double> m,
                     std::vector<double> J, std::vector<double> k) {
    const std::size_t n = m.size();
    if (n == 0) throw_invalid("finite form: empty state space");
    if (states.empty())
        for (std::size_t i = 0; i < n; ++i) states.push_back("s" + std::to_string(i));
    if (states.size() != n || k.size() != n || J.size() != n * n)
        throw_invalid("finite form: inconsistent sizes");
    for (std::size_t i = 0; i < n; ++i) {
        if (!(m[i] > 0.0)) throw_invalid("finite form: reference weights must be > 0");
        if (!(k[i] >= 0.0)) throw_invalid("finite form: killing weights must be >= 0");
        if (J[i * n + i] != 0.0) throw_invalid("finite form: jump matrix must have zero diagonal");
        for (std::size_t j = 0; j < n; ++j) {
            if (!(J[i * n + j] >= 0.0)) throw_invalid("finite form: jump entries must be >= 0");
            if (J[i * n + j] != J[j * n + i]) throw_invalid("finite form: jump matrix must be symmetric");
        }
    }
    return FiniteForm{std::move(states), std::move(m), std::move(J), std::move(k)};
}

double form_energy(const FiniteForm& f, const std::vector<double>& u,
                   const std::vector<double>& v) {
    const std::size_t n = f.size();
    if (u.size() != n || v.size() != n) throw_precondition("form_energy: dimension mismatch");
    double e = 0.0;
    for (std::size_t x = 0; x < n; ++x)
        for (std::size_t y = x + 1; y < n; ++y)
            e += 2.0 * f.j_at(x, y) * (u[x] - u[y]) * (v[x] - v[y]);
    for (std::size_t x = 0; x < n; ++x) e += f.k[x] * u[x] * v[x];
    return e;
}

std::vector<double> form_matrix(const FiniteForm& f) {
    const std::size_t n = f.size();
    std::vector<double> q(n * n, 0.0);
    for (std::size_t x = 0; x < n; ++x) {
        double diag = f.k[x];
        for (std::size_t y = 0; y < n; ++y) {
            if (y == x) continue;
            q[x * n + y] = -2.0 * f.j_at(x, y);
            diag += 2.0 * f.j_at(x, y);
        }
        q[x * n + x] = diag;
    }
    return q;
}

FiniteForm bd_decompose(const std::vector<double>& Q, std::vector<double> m,
                        std::vector<std::string> states) {
    const std::size_t n = m.size();
    if (Q.size() != n * n) throw_invalid("bd_decompose: matrix size mismatch");
    double scale = 0.0;
    for (double q : Q) scale = std::max(scale, std::abs(q));
    for (std::size_t x = 0; x < n; ++x)
        for (std::size_t y = 0; y < n; ++y) {
            if (Q[x * n + y] != Q[y * n + x])
                throw_invalid("bd_decompose: matrix is not symmetric at (" + std::to_string(x) +
                              "," + std::to_string(y) + ")");
            if (y != x && Q[x * n + y] > 0.0)
                throw Error(ErrorCode::invalid_argument,
                            "bd_decompose: not Markovian, positive off-diagonal entry (" +
                                std::to_string(x) + "," + std::to_string(y) + ")");
        }

    std::vector<double> J(n * n, 0.0), k(n, 0.0);
    const double tol = 1e-12 * std::max(1.0, scale);
    for (std::size_t x = 0; x < n; ++x) {
        double row = 0.0;
        for (std::size_t y = 0; y < n; ++y) {
            row += Q[x * n + y];
            if (y != x) J[x * n + y] = -0.5 * Q[x * n + y];
        }
        if (row < -tol)
            throw Error(ErrorCode::invalid_argument,
                        "bd_decompose: not Markovian, negative row sum at row " +
                            std::to_string(x));
        k[x] = std::max(row, 0.0);
    }
    return make_form(std::move(states), std::move(m), std::move(J), std::move(k));
}

FiniteForm kill(const FiniteForm& f, const std::vector<double>& extra_k) {
    if (extra_k.size() != f.size()) throw_precondition("kill: weight size mismatch");
    for (double v : extra_k)
        if (!(v >= 0.0)) throw_precondition("kill: weights must be >= 0");
    FiniteForm out = f;
    for (std::size_t i = 0; i < f.size(); ++i) out.k[i] += extra_k[i];
    return out;
}

FiniteForm resurrect(const FiniteForm& f) {
    FiniteForm out = f;
    std::fill(out.k.begin(), out.k.end(), 0.0);
    return out;
}

FiniteForm homeomorph(const FiniteForm& f, const std::vector<std::size_t>& sigma) {
    const std::size_t n = f.size();
    if (sigma.size() != n) throw_precondition("homeomorph: map size mismatch");
    std::vector<bool> seen(n, false);
    for (std::size_t v : sigma) {
        if (v >= n || seen[v]) throw_precondition("homeomorph: map is not a bijection");
        seen[v] = true;
    }
    FiniteForm out;
    out.states.resize(n);
    out.m.resize(n);
    out.k.resize(n);
    out.J.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        out.states[sigma[i]] = f.states[i];
        out.m[sigma[i]] = f.m[i];
        out.k[sigma[i]] = f.k[i];
        for (std::size_t j = 0; j < n; ++j) out.J[sigma[i] * n + sigma[j]] = f.j_at(i, j);
    }
    return out;
}

FiniteForm time_change(const FiniteForm& f, const std::vector<double>& mu) {
    if (mu.size() != f.size()) throw_precondition("time_change: weight size mismatch");
    for (double v : mu)
        if (!(v > 0.0)) throw_precondition("time_change: weights must be > 0 (full support)");
    FiniteForm out = f;
    out.m = mu;
    return out;
}

SubspaceReport subspace_check(const FiniteForm& f_sub, const FiniteForm& f,
                              const std::vector<std::vector<double>>& core) {
    const std::size_t n = f.size();
    if (f_sub.size() != n || f_sub.states != f.states)
        throw_precondition("subspace_check: state sets differ");
    if (f_sub.m != f.m) throw_precondition("subspace_check: reference weights differ");

    SubspaceReport rep;
    rep.triples_match = f_sub.J == f.J && f_sub.k == f.k;

    std::vector<std::vector<double>> basis;
    const std::vector<std::vector<double>>* funcs = &core;
    if (core.empty()) {
        basis.resize(n, std::vector<double>(n, 0.0));
        for (std::size_t i = 0; i < n; ++i) basis[i][i] = 1.0;
        funcs = &basis;
    }
    rep.is_subspace = true;
    const auto probe = [&](std::size_t a, std::size_t b) {
        if (!rep.is_subspace) return;
        if (form_energy(f_sub, (*funcs)[a], (*funcs)[b]) !=
            form_energy(f, (*funcs)[a], (*funcs)[b])) {
            rep.is_subspace = false;
            rep.has_witness = true;
            rep.witness_x = a;
            rep.witness_y = b;
        }
    };
    // disjoint pairs first: they isolate jump-entry differences
    for (std::size_t a = 0; a < funcs->size(); ++a)
        for (std::size_t b = a + 1; b < funcs->size(); ++b) probe(a, b);
    for (std::size_t a = 0; a < funcs->size(); ++a) probe(a, a);
    return rep;
}

std::string form_to_json(const FiniteForm& f) {
    const std::size_t n = f.size();
    nlohmann::json j;
    j["states"] = f.states;
    j["m"] = f.m;
    j["k"] = f.k;
    std::vector<double> upper;
    upper.reserve(n * (n - 1) / 2);
    for (std::size_t x = 0; x < n; ++x)
        for (std::size_t y = x + 1; y < n; ++y) upper.push_back(f.j_at(x, y));
    j["J"] = upper;
    return j.dump();
}

FiniteForm form_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw_parse(std::string("finite form: ") + e.what());
    }
    try {
        auto states = j.at("states").get<std::vector<std::string>>();
        auto m = j.at("m").get<std::vector<double>>();
        auto k = j.at("k").get<std::vector<double>>();
        auto upper = j.at("J").get<std::vector<double>>();
        const std::size_t n = states.size();
        if (upper.size() != n * (n - 1) / 2)
            throw_parse("finite form: upper-triangle length mismatch");
        std::vector<double> J(n * n, 0.0);
        std::size_t idx = 0;
        for (std::size_t x = 0; x < n; ++x)
            for (std::size_t y = x + 1; y < n; ++y) {
                J[x * n + y] = upper[idx];
                J[y * n + x] = upper[idx];
                ++idx;
            }
        return make_form(std::move(states), std::move(m), std::move(J), std::move(k));
    } catch (const nlohmann::json::exception& e) {
        throw_parse(std::string("finite form: ") + e.what());
    }
}

}  // namespace dflab

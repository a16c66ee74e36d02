#include "dflab/dflab.h"

#include <cstdlib>
#include <cstring>
#include <string>

#include "coupling.hpp"
#include "discrete.hpp"
#include "errors.hpp"
#include "forms1d.hpp"
#include "json.hpp"
#include "lab.hpp"
#include "levy.hpp"
#include "profile.hpp"
#include "scale.hpp"
#include "simulate.hpp"

struct dflab_scale {
    dflab::ScalePtr impl;
};
struct dflab_profile {
    dflab::Profile impl;
};
struct dflab_form {
    dflab::FiniteForm impl;
};
struct dflab_symbol {
    dflab::LevySymbol impl;
};
struct dflab_grid {
    dflab::GridFunction impl;
};

namespace {

thread_local std::string g_last_error;

dflab_status status_of(const dflab::Error& e) {
    switch (e.code()) {
        case dflab::ErrorCode::invalid_argument: return DFLAB_ERR_INVALID_ARGUMENT;
        case dflab::ErrorCode::domain_error: return DFLAB_ERR_DOMAIN;
        case dflab::ErrorCode::precondition: return DFLAB_ERR_PRECONDITION;
        case dflab::ErrorCode::numeric: return DFLAB_ERR_NUMERIC;
        case dflab::ErrorCode::unsupported: return DFLAB_ERR_UNSUPPORTED;
        case dflab::ErrorCode::parse: return DFLAB_ERR_PARSE;
        case dflab::ErrorCode::check_failed: return DFLAB_ERR_CHECK_FAILED;
    }
    return DFLAB_ERR_INTERNAL;
}

template <typename Fn>
dflab_status guarded(Fn&& fn) {
    try {
        fn();
        return DFLAB_OK;
    } catch (const dflab::Error& e) {
        g_last_error = e.what();
        return status_of(e);
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return DFLAB_ERR_INTERNAL;
    } catch (...) {
        g_last_error = "unknown error";
        return DFLAB_ERR_INTERNAL;
    }
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

template <typename T>
void require(const T* p, const char* what) {
    if (!p) dflab::throw_invalid(std::string(what) + " is null");
}

}  // namespace

extern "C" {

const char* dflab_last_error(void) { return g_last_error.c_str(); }

void dflab_string_free(char* s) { std::free(s); }
void dflab_buffer_free(double* buf) { std::free(buf); }

/* ----------------------------------------------------------- scale ----- */

dflab_status dflab_scale_identity(dflab_scale** out) {
    return guarded([&] {
        require(out, "out");
        *out = new dflab_scale{
            std::make_shared<dflab::ScaleFunction>(dflab::ScaleFunction::identity())};
    });
}

dflab_status dflab_scale_affine(double c, dflab_scale** out) {
    return guarded([&] {
        require(out, "out");
        *out = new dflab_scale{
            std::make_shared<dflab::ScaleFunction>(dflab::ScaleFunction::affine(c))};
    });
}

dflab_status dflab_scale_fat_cantor(double lambda, int depth, dflab_scale** out) {
    return guarded([&] {
        require(out, "out");
        *out = new dflab_scale{
            std::make_shared<dflab::ScaleFunction>(dflab::ScaleFunction::fat_cantor(lambda, depth))};
    });
}

dflab_status dflab_scale_inverse_cantor(int depth, dflab_scale** out) {
    return guarded([&] {
        require(out, "out");
        *out = new dflab_scale{
            std::make_shared<dflab::ScaleFunction>(dflab::ScaleFunction::inverse_cantor(depth))};
    });
}

dflab_status dflab_scale_from_json(const char* json, dflab_scale** out) {
    return guarded([&] {
        require(json, "json");
        require(out, "out");
        *out = new dflab_scale{
            std::make_shared<dflab::ScaleFunction>(dflab::ScaleFunction::from_json(json))};
    });
}

dflab_status dflab_scale_to_json(const dflab_scale* s, char** json_out) {
    return guarded([&] {
        require(s, "scale");
        require(json_out, "json_out");
        *json_out = dup_string(s->impl->to_json());
    });
}

dflab_status dflab_scale_gaps_csv(const dflab_scale* s, char** csv_out) {
    return guarded([&] {
        require(s, "scale");
        require(csv_out, "csv_out");
        *csv_out = dup_string(s->impl->gaps_csv());
    });
}

void dflab_scale_free(dflab_scale* s) { delete s; }

dflab_status dflab_scale_eval(const dflab_scale* s, double x, double* out) {
    return guarded([&] {
        require(s, "scale");
        require(out, "out");
        *out = s->impl->eval(x);
    });
}

dflab_status dflab_scale_inverse_eval(const dflab_scale* s, double y, double* out) {
    return guarded([&] {
        require(s, "scale");
        require(out, "out");
        *out = s->impl->inverse(y);
    });
}

dflab_status dflab_scale_flat_mass(const dflab_scale* s, double a, double b, double* out) {
    return guarded([&] {
        require(s, "scale");
        require(out, "out");
        *out = s->impl->flat_mass(a, b);
    });
}

dflab_status dflab_scale_domain(const dflab_scale* s, double* lo, double* hi) {
    return guarded([&] {
        require(s, "scale");
        require(lo, "lo");
        require(hi, "hi");
        *lo = s->impl->domain().lo;
        *hi = s->impl->domain().hi;
    });
}

dflab_status dflab_cantor_value(double x, int depth, double* out) {
    return guarded([&] {
        require(out, "out");
        *out = dflab::cantor_function(x, depth);
    });
}

/* --------------------------------------------------- profiles, forms --- */

dflab_status dflab_profile_bump(double center, double radius, double amplitude,
                                dflab_profile** out) {
    return guarded([&] {
        require(out, "out");
        *out = new dflab_profile{dflab::Profile::bump(center, radius, amplitude)};
    });
}

dflab_status dflab_profile_hat(double left, double right, double slope, dflab_profile** out) {
    return guarded([&] {
        require(out, "out");
        *out = new dflab_profile{dflab::Profile::hat(left, right, slope)};
    });
}

dflab_status dflab_profile_clamped(const dflab_profile* p, double lo, double hi,
                                   dflab_profile** out) {
    return guarded([&] {
        require(p, "profile");
        require(out, "out");
        *out = new dflab_profile{p->impl.clamped(lo, hi)};
    });
}

void dflab_profile_free(dflab_profile* p) { delete p; }

dflab_status dflab_energy_es(const dflab_scale* s, const dflab_profile* phi, int quad_n,
                             double* out) {
    return guarded([&] {
        require(s, "scale");
        require(phi, "profile");
        require(out, "out");
        *out = dflab::energy_es(dflab::make_core(phi->impl, s->impl), quad_n);
    });
}

dflab_status dflab_dirichlet_energy(const dflab_scale* s, const dflab_profile* phi, long grid_n,
                                    double* out) {
    return guarded([&] {
        require(s, "scale");
        require(phi, "profile");
        require(out, "out");
        *out = dflab::dirichlet_energy(dflab::make_core(phi->impl, s->impl), grid_n);
    });
}

dflab_status dflab_subspace_identity(const dflab_scale* s, const dflab_profile* phi, double tol,
                                     double* residual_out, int* converged_out) {
    return guarded([&] {
        require(s, "scale");
        require(phi, "profile");
        require(residual_out, "residual_out");
        require(converged_out, "converged_out");
        const dflab::IdentityReport rep =
            dflab::verify_subspace_identity(dflab::make_core(phi->impl, s->impl), tol);
        *residual_out = rep.residual;
        *converged_out = rep.converged ? 1 : 0;
    });
}

dflab_status dflab_weak_generator_residual(const dflab_scale* s, const dflab_profile* phi_u,
                                           const dflab_profile* phi_v, double* out) {
    return guarded([&] {
        require(s, "scale");
        require(phi_u, "phi_u");
        require(phi_v, "phi_v");
        require(out, "out");
        *out = dflab::weak_generator_residual(dflab::make_core(phi_u->impl, s->impl),
                                              dflab::make_core(phi_v->impl, s->impl));
    });
}

/* ---------------------------------------------------- finite forms ----- */

dflab_status dflab_form_create(size_t n, const double* m, const double* J_rowmajor,
                               const double* k, dflab_form** out) {
    return guarded([&] {
        require(m, "m");
        require(J_rowmajor, "J");
        require(k, "k");
        require(out, "out");
        *out = new dflab_form{dflab::make_form({}, std::vector<double>(m, m + n),
                                               std::vector<double>(J_rowmajor, J_rowmajor + n * n),
                                               std::vector<double>(k, k + n))};
    });
}

dflab_status dflab_form_from_json(const char* json, dflab_form** out) {
    return guarded([&] {
        require(json, "json");
        require(out, "out");
        *out = new dflab_form{dflab::form_from_json(json)};
    });
}

dflab_status dflab_form_to_json(const dflab_form* f, char** json_out) {
    return guarded([&] {
        require(f, "form");
        require(json_out, "json_out");
        *json_out = dup_string(dflab::form_to_json(f->impl));
    });
}

void dflab_form_free(dflab_form* f) { delete f; }

dflab_status dflab_bd_decompose(size_t n, const double* Q_rowmajor, const double* m,
                                dflab_form** out) {
    return guarded([&] {
        require(Q_rowmajor, "Q");
        require(m, "m");
        require(out, "out");
        *out = new dflab_form{dflab::bd_decompose(
            std::vector<double>(Q_rowmajor, Q_rowmajor + n * n), std::vector<double>(m, m + n))};
    });
}

dflab_status dflab_form_energy(const dflab_form* f, const double* u, const double* v,
                               double* out) {
    return guarded([&] {
        require(f, "form");
        require(u, "u");
        require(v, "v");
        require(out, "out");
        const size_t n = f->impl.size();
        *out = dflab::form_energy(f->impl, std::vector<double>(u, u + n),
                                  std::vector<double>(v, v + n));
    });
}

dflab_status dflab_form_kill(const dflab_form* f, const double* extra_k, dflab_form** out) {
    return guarded([&] {
        require(f, "form");
        require(extra_k, "extra_k");
        require(out, "out");
        *out = new dflab_form{
            dflab::kill(f->impl, std::vector<double>(extra_k, extra_k + f->impl.size()))};
    });
}

dflab_status dflab_form_resurrect(const dflab_form* f, dflab_form** out) {
    return guarded([&] {
        require(f, "form");
        require(out, "out");
        *out = new dflab_form{dflab::resurrect(f->impl)};
    });
}

dflab_status dflab_form_homeomorph(const dflab_form* f, const size_t* sigma, dflab_form** out) {
    return guarded([&] {
        require(f, "form");
        require(sigma, "sigma");
        require(out, "out");
        *out = new dflab_form{dflab::homeomorph(
            f->impl, std::vector<std::size_t>(sigma, sigma + f->impl.size()))};
    });
}

dflab_status dflab_form_time_change(const dflab_form* f, const double* mu, dflab_form** out) {
    return guarded([&] {
        require(f, "form");
        require(mu, "mu");
        require(out, "out");
        *out = new dflab_form{
            dflab::time_change(f->impl, std::vector<double>(mu, mu + f->impl.size()))};
    });
}

dflab_status dflab_subspace_check(const dflab_form* candidate, const dflab_form* full,
                                  int* is_subspace, int* triples_match) {
    return guarded([&] {
        require(candidate, "candidate");
        require(full, "full");
        require(is_subspace, "is_subspace");
        require(triples_match, "triples_match");
        const dflab::SubspaceReport rep = dflab::subspace_check(candidate->impl, full->impl);
        *is_subspace = rep.is_subspace ? 1 : 0;
        *triples_match = rep.triples_match ? 1 : 0;
    });
}

/* ------------------------------------------------------------ levy ----- */

dflab_status dflab_symbol_create(int dim, const double* S_rowmajor, size_t n_atoms,
                                 const double* atom_locs, const double* atom_weights,
                                 dflab_symbol** out) {
    return guarded([&] {
        require(S_rowmajor, "S");
        require(out, "out");
        std::vector<dflab::SymbolAtom> atoms;
        for (size_t i = 0; i < n_atoms; ++i) {
            dflab::SymbolAtom a;
            a.y.assign(atom_locs + i * dim, atom_locs + (i + 1) * dim);
            a.w = atom_weights[i];
            atoms.push_back(std::move(a));
        }
        *out = new dflab_symbol{dflab::LevySymbol(
            dim, std::vector<double>(S_rowmajor, S_rowmajor + dim * dim), std::move(atoms))};
    });
}

dflab_status dflab_symbol_from_json(const char* json, dflab_symbol** out) {
    return guarded([&] {
        require(json, "json");
        require(out, "out");
        *out = new dflab_symbol{dflab::LevySymbol::from_json(json)};
    });
}

dflab_status dflab_symbol_to_json(const dflab_symbol* s, char** json_out) {
    return guarded([&] {
        require(s, "symbol");
        require(json_out, "json_out");
        *json_out = dup_string(s->impl.to_json());
    });
}

void dflab_symbol_free(dflab_symbol* s) { delete s; }

dflab_status dflab_symbol_eval(const dflab_symbol* s, const double* x, double* out) {
    return guarded([&] {
        require(s, "symbol");
        require(x, "x");
        require(out, "out");
        *out = s->impl.eval(std::vector<double>(x, x + s->impl.dim()));
    });
}

dflab_status dflab_symbol_diagonalize(const dflab_symbol* s, double* P_rowmajor,
                                      double* eigenvalues, int* rank) {
    return guarded([&] {
        require(s, "symbol");
        require(P_rowmajor, "P");
        require(eigenvalues, "eigenvalues");
        require(rank, "rank");
        const dflab::SymbolDiag d = s->impl.diagonalize();
        std::memcpy(P_rowmajor, d.P.data(), d.P.size() * sizeof(double));
        std::memcpy(eigenvalues, d.eigenvalues.data(), d.eigenvalues.size() * sizeof(double));
        *rank = d.rank;
    });
}

dflab_status dflab_grid_gaussian(int dim, const double* lo, double h, const int* n,
                                 const double* center, double sigma, dflab_grid** out) {
    return guarded([&] {
        require(lo, "lo");
        require(n, "n");
        require(center, "center");
        require(out, "out");
        *out = new dflab_grid{dflab::GridFunction::gaussian_bump(
            std::vector<double>(lo, lo + dim), h, std::vector<int>(n, n + dim),
            std::vector<double>(center, center + dim), sigma)};
    });
}

dflab_status dflab_grid_sample(int dim, const double* lo, double h, const int* n,
                               double (*f)(const double* x, void* ctx), void* ctx,
                               dflab_grid** out) {
    return guarded([&] {
        require(lo, "lo");
        require(n, "n");
        require(out, "out");
        if (!f) dflab::throw_invalid("sampler is null");
        *out = new dflab_grid{dflab::GridFunction::sample(
            std::vector<double>(lo, lo + dim), h, std::vector<int>(n, n + dim),
            [f, ctx](const std::vector<double>& x) { return f(x.data(), ctx); })};
    });
}

void dflab_grid_free(dflab_grid* g) { delete g; }

dflab_status dflab_energy_fourier(const dflab_symbol* s, const dflab_grid* u, double* out) {
    return guarded([&] {
        require(s, "symbol");
        require(u, "grid");
        require(out, "out");
        *out = dflab::energy_fourier(s->impl, u->impl);
    });
}

dflab_status dflab_energy_direct(const dflab_symbol* s, const dflab_grid* u, double* local_out,
                                 double* jump_out, int* interpolated_out) {
    return guarded([&] {
        require(s, "symbol");
        require(u, "grid");
        const dflab::DirectEnergy de = dflab::energy_direct(s->impl, u->impl);
        if (local_out) *local_out = de.local;
        if (jump_out) *jump_out = de.jump;
        if (interpolated_out) *interpolated_out = de.interpolated ? 1 : 0;
    });
}

dflab_status dflab_pairing_residual(const dflab_symbol* s, const dflab_grid* u,
                                    const dflab_grid* v, double* out) {
    return guarded([&] {
        require(s, "symbol");
        require(u, "u");
        require(v, "v");
        require(out, "out");
        *out = dflab::pairing_identity_residual(s->impl, u->impl, v->impl);
    });
}

/* -------------------------------------------------------- simulate ----- */

dflab_status dflab_brownian_path(double x0, double horizon, double dt, uint64_t seed,
                                 double** times_out, double** positions_out, size_t* len_out) {
    return guarded([&] {
        require(times_out, "times_out");
        require(positions_out, "positions_out");
        require(len_out, "len_out");
        const dflab::PathSample p = dflab::brownian_path(x0, horizon, dt, seed);
        const size_t len = p.times.size();
        *times_out = static_cast<double*>(std::malloc(len * sizeof(double)));
        *positions_out = static_cast<double*>(std::malloc(len * sizeof(double)));
        std::memcpy(*times_out, p.times.data(), len * sizeof(double));
        std::memcpy(*positions_out, p.positions.data(), len * sizeof(double));
        *len_out = len;
    });
}

dflab_status dflab_exit_statistics(const dflab_scale* s, double a, double b, double x0, double dt,
                                   double epsilon, long n_paths, uint64_t seed, int threads,
                                   double* p_out, double* p_se_out, double* p_exact_out,
                                   double* time_out, double* time_se_out) {
    return guarded([&] {
        require(s, "scale");
        dflab::ExitConfig cfg;
        cfg.a = a;
        cfg.b = b;
        cfg.x0 = x0;
        cfg.dt = dt;
        cfg.epsilon = epsilon;
        cfg.n_paths = n_paths;
        cfg.seed = seed;
        cfg.threads = threads;
        const dflab::ExitStats st = dflab::exit_statistics(*s->impl, cfg);
        if (p_out) *p_out = st.p_hit_b.value;
        if (p_se_out) *p_se_out = st.p_hit_b.se;
        if (p_exact_out) *p_exact_out = st.exact_p;
        if (time_out) *time_out = st.mean_exit_time.value;
        if (time_se_out) *time_se_out = st.mean_exit_time.se;
    });
}

dflab_status dflab_chain_solve(const dflab_scale* s, double a, double b, double x0, long n,
                               int problem, double* out) {
    return guarded([&] {
        require(s, "scale");
        require(out, "out");
        const dflab::ChainOracle chain = dflab::build_chain(*s->impl, a, b, x0, n);
        *out = dflab::chain_oracle_solve(chain, problem == 0
                                                    ? dflab::ChainProblem::hit_probability
                                                    : dflab::ChainProblem::expected_exit_time);
    });
}

/* -------------------------------------------------------- coupling ----- */

dflab_status dflab_product_energy_json(const char* product_json, const char* profiles_json,
                                       double* out) {
    return guarded([&] {
        require(product_json, "product_json");
        require(profiles_json, "profiles_json");
        require(out, "out");
        const dflab::ProductForm p = dflab::product_from_json(product_json);
        nlohmann::json pj;
        try {
            pj = nlohmann::json::parse(profiles_json);
        } catch (const nlohmann::json::exception& e) {
            dflab::throw_parse(std::string("profiles: ") + e.what());
        }
        std::vector<dflab::Profile> profiles;
        for (const auto& item : pj) {
            const std::string kind = item.value("kind", "bump");
            if (kind == "bump")
                profiles.push_back(dflab::Profile::bump(item.at("center").get<double>(),
                                                        item.at("radius").get<double>(),
                                                        item.value("amplitude", 1.0)));
            else if (kind == "hat")
                profiles.push_back(dflab::Profile::hat(item.at("left").get<double>(),
                                                       item.at("right").get<double>(),
                                                       item.at("slope").get<double>()));
            else
                dflab::throw_parse("profiles: unknown kind '" + kind + "'");
        }
        *out = dflab::product_energy(p, dflab::make_tensor(p, std::move(profiles)));
    });
}

dflab_status dflab_properness_json(const char* product_json, double* masses_out,
                                   int* proper_out) {
    return guarded([&] {
        require(product_json, "product_json");
        require(masses_out, "masses_out");
        require(proper_out, "proper_out");
        const dflab::ProductForm p = dflab::product_from_json(product_json);
        const dflab::PropernessReport rep = dflab::properness_certificate(p);
        for (std::size_t i = 0; i < rep.flat_masses.size(); ++i) masses_out[i] = rep.flat_masses[i];
        *proper_out = rep.proper ? 1 : 0;
    });
}

/* ------------------------------------------------ experiment runner ---- */

dflab_status dflab_run_command(const char* command, const char* config_json,
                               long long seed_override, int sweep, char** csv_out,
                               char** report_out, int* run_status_out) {
    return guarded([&] {
        require(command, "command");
        require(run_status_out, "run_status_out");
        const dflab::lab::RunResult res = dflab::lab::run_command(
            command, config_json ? config_json : "", seed_override, sweep != 0);
        if (csv_out) *csv_out = dup_string(res.csv);
        if (report_out) *report_out = dup_string(res.report);
        *run_status_out = static_cast<int>(res.status);
    });
}

} /* extern "C" */

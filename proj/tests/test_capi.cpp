// Exercises the shared-library C surface end to end: handles, error codes,
// string ownership, and the experiment runner.
#include <cmath>
#include <cstring>
#include <string>

#include "dflab/dflab.h"
#include "doctest.h"

TEST_CASE("scale handles round trip through the C API") {
    dflab_scale* s = nullptr;
    REQUIRE(dflab_scale_fat_cantor(0.5, 8, &s) == DFLAB_OK);
    double v = 0.0;
    CHECK(dflab_scale_eval(s, 0.0, &v) == DFLAB_OK);
    CHECK(v == 0.0);
    CHECK(dflab_scale_eval(s, 1.0, &v) == DFLAB_OK);
    CHECK(v == doctest::Approx(0.5 + std::ldexp(1.0, -9)));
    CHECK(dflab_scale_flat_mass(s, 0.0, 1.0, &v) == DFLAB_OK);
    CHECK(v == doctest::Approx(0.5 * (1.0 - std::ldexp(1.0, -8))));

    double y = 0.0;
    CHECK(dflab_scale_eval(s, 0.3, &y) == DFLAB_OK);
    double back = 0.0;
    CHECK(dflab_scale_inverse_eval(s, y, &back) == DFLAB_OK);
    CHECK(back <= 0.3);

    char* json = nullptr;
    REQUIRE(dflab_scale_to_json(s, &json) == DFLAB_OK);
    dflab_scale* copy = nullptr;
    REQUIRE(dflab_scale_from_json(json, &copy) == DFLAB_OK);
    double lo = 0.0, hi = 0.0;
    CHECK(dflab_scale_domain(copy, &lo, &hi) == DFLAB_OK);
    CHECK(lo == 0.0);
    CHECK(hi == 1.0);
    dflab_string_free(json);

    char* csv = nullptr;
    REQUIRE(dflab_scale_gaps_csv(s, &csv) == DFLAB_OK);
    CHECK(std::strncmp(csv, "left,right,level", 16) == 0);
    dflab_string_free(csv);

    dflab_scale_free(copy);
    dflab_scale_free(s);

    // invalid parameters surface as status codes with a message
    dflab_scale* bad = nullptr;
    CHECK(dflab_scale_fat_cantor(1.5, 4, &bad) == DFLAB_ERR_INVALID_ARGUMENT);
    CHECK(std::strlen(dflab_last_error()) > 0);
    CHECK(dflab_scale_eval(nullptr, 0.0, &v) == DFLAB_ERR_INVALID_ARGUMENT);
}

TEST_CASE("cantor values and energies through the C API") {
    double v = 0.0;
    CHECK(dflab_cantor_value(0.5, 40, &v) == DFLAB_OK);
    CHECK(v == 0.5);
    CHECK(dflab_cantor_value(0.5, 0, &v) == DFLAB_ERR_INVALID_ARGUMENT);

    dflab_scale* id = nullptr;
    REQUIRE(dflab_scale_identity(&id) == DFLAB_OK);
    dflab_profile* hat = nullptr;
    REQUIRE(dflab_profile_hat(0.0, 1.0, 2.0, &hat) == DFLAB_OK);
    CHECK(dflab_energy_es(id, hat, 64, &v) == DFLAB_OK);
    CHECK(v == doctest::Approx(2.0));
    CHECK(dflab_dirichlet_energy(id, hat, 1 << 16, &v) == DFLAB_OK);
    CHECK(v == doctest::Approx(2.0).epsilon(1e-5));

    dflab_profile* bump = nullptr;
    REQUIRE(dflab_profile_bump(0.5, 0.3, 1.0, &bump) == DFLAB_OK);
    double residual = 1.0;
    int converged = 0;
    CHECK(dflab_subspace_identity(id, bump, 1e-3, &residual, &converged) == DFLAB_OK);
    CHECK(converged == 1);
    CHECK(dflab_weak_generator_residual(id, bump, bump, &v) == DFLAB_OK);
    CHECK(v <= 1e-10);
    // hat profiles carry no second derivative
    CHECK(dflab_weak_generator_residual(id, hat, bump, &v) == DFLAB_ERR_UNSUPPORTED);

    dflab_profile* cut = nullptr;
    REQUIRE(dflab_profile_clamped(bump, 0.0, 0.5, &cut) == DFLAB_OK);
    double e_cut = 0.0, e_full = 0.0;
    CHECK(dflab_energy_es(id, cut, 64, &e_cut) == DFLAB_OK);
    CHECK(dflab_energy_es(id, bump, 64, &e_full) == DFLAB_OK);
    CHECK(e_cut < e_full);

    dflab_profile_free(cut);
    dflab_profile_free(bump);
    dflab_profile_free(hat);
    dflab_scale_free(id);
}

TEST_CASE("finite forms through the C API") {
    const double m[3] = {1, 1, 1};
    const double L[9] = {1, -1, 0, -1, 2, -1, 0, -1, 1};
    dflab_form* f = nullptr;
    REQUIRE(dflab_bd_decompose(3, L, m, &f) == DFLAB_OK);

    const double u[3] = {1, 0, 0}, v[3] = {0, 1, 0};
    double e = 0.0;
    CHECK(dflab_form_energy(f, u, v, &e) == DFLAB_OK);
    CHECK(e == -1.0);  // -2 J_01 with J_01 = 1/2

    const double extra[3] = {0.25, 0.0, 0.5};
    dflab_form* killed = nullptr;
    REQUIRE(dflab_form_kill(f, extra, &killed) == DFLAB_OK);
    dflab_form* res = nullptr;
    REQUIRE(dflab_form_resurrect(killed, &res) == DFLAB_OK);
    int is_sub = 0, triples = 0;
    CHECK(dflab_subspace_check(res, f, &is_sub, &triples) == DFLAB_OK);
    CHECK(is_sub == 1);
    CHECK(triples == 1);
    CHECK(dflab_subspace_check(killed, f, &is_sub, &triples) == DFLAB_OK);
    CHECK(is_sub == 0);
    CHECK(triples == 0);

    char* json = nullptr;
    REQUIRE(dflab_form_to_json(f, &json) == DFLAB_OK);
    dflab_form* back = nullptr;
    REQUIRE(dflab_form_from_json(json, &back) == DFLAB_OK);
    dflab_string_free(json);

    const size_t sigma[3] = {1, 2, 0};
    dflab_form* h = nullptr;
    REQUIRE(dflab_form_homeomorph(f, sigma, &h) == DFLAB_OK);
    const double mu[3] = {2, 1, 0.5};
    dflab_form* tc = nullptr;
    REQUIRE(dflab_form_time_change(f, mu, &tc) == DFLAB_OK);

    // not Markovian: positive off-diagonal
    const double bad[4] = {1, 0.5, 0.5, 1};
    const double m2[2] = {1, 1};
    dflab_form* nope = nullptr;
    CHECK(dflab_bd_decompose(2, bad, m2, &nope) == DFLAB_ERR_INVALID_ARGUMENT);

    dflab_form_free(tc);
    dflab_form_free(h);
    dflab_form_free(back);
    dflab_form_free(res);
    dflab_form_free(killed);
    dflab_form_free(f);
}

namespace {
double capi_bump(const double* x, void* ctx) {
    const double c = *static_cast<const double*>(ctx);
    const double z2 = (x[0] - c) * (x[0] - c) / (0.2 * 0.2);
    return z2 >= 1.0 ? 0.0 : (1.0 - z2) * (1.0 - z2);
}
}  // namespace

TEST_CASE("spectral energies through the C API") {
    const double S[1] = {1.0};
    const double locs[2] = {0.25, -0.25};
    const double ws[2] = {1.0, 1.0};
    dflab_symbol* sym = nullptr;
    REQUIRE(dflab_symbol_create(1, S, 2, locs, ws, &sym) == DFLAB_OK);

    double psi = 0.0;
    const double x = 3.14159265358979;
    CHECK(dflab_symbol_eval(sym, &x, &psi) == DFLAB_OK);
    CHECK(psi > 0.0);

    double P[1], ev[1];
    int rank = 0;
    CHECK(dflab_symbol_diagonalize(sym, P, ev, &rank) == DFLAB_OK);
    CHECK(rank == 1);
    CHECK(ev[0] == doctest::Approx(1.0));

    const double lo = -0.5;
    const int n = 2048;
    double center = 0.5;
    dflab_grid* u = nullptr;
    REQUIRE(dflab_grid_sample(1, &lo, 2.0 / n, &n, capi_bump, &center, &u) == DFLAB_OK);
    double ef = 0.0, local = 0.0, jump = 0.0;
    int interp = 0;
    CHECK(dflab_energy_fourier(sym, u, &ef) == DFLAB_OK);
    CHECK(dflab_energy_direct(sym, u, &local, &jump, &interp) == DFLAB_OK);
    CHECK(std::abs(ef - (local + jump)) / ef <= 1e-3);
    CHECK(interp == 0);

    double vc = 1.1;  // shifted copy: disjoint support (support radius is 0.2)
    dflab_grid* v = nullptr;
    REQUIRE(dflab_grid_sample(1, &lo, 2.0 / n, &n, capi_bump, &vc, &v) == DFLAB_OK);
    double resid = 1.0;
    CHECK(dflab_pairing_residual(sym, u, v, &resid) == DFLAB_OK);
    CHECK(resid <= 1e-3);

    dflab_grid_free(v);
    dflab_grid_free(u);
    dflab_symbol_free(sym);
}

TEST_CASE("simulation and coupling through the C API") {
    double *times = nullptr, *pos = nullptr;
    size_t len = 0;
    REQUIRE(dflab_brownian_path(0.0, 0.1, 1e-3, 42, &times, &pos, &len) == DFLAB_OK);
    CHECK(len == 101);
    CHECK(pos[0] == 0.0);
    dflab_buffer_free(times);
    dflab_buffer_free(pos);

    dflab_scale* s = nullptr;
    REQUIRE(dflab_scale_fat_cantor(0.5, 6, &s) == DFLAB_OK);
    double p = 0, p_se = 0, p_exact = 0, t = 0, t_se = 0;
    REQUIRE(dflab_exit_statistics(s, 0.0, 1.0, 0.3, 5e-4, 0.0, 1500, 9, 2, &p, &p_se, &p_exact,
                                  &t, &t_se) == DFLAB_OK);
    CHECK(std::abs(p - p_exact) <= 3.0 * p_se);

    double chain_p = 0.0;
    REQUIRE(dflab_chain_solve(s, 0.0, 1.0, 0.3, 1500, 0, &chain_p) == DFLAB_OK);
    CHECK(chain_p == doctest::Approx(p_exact).epsilon(1e-9));

    const char* product =
        R"({"components":[{"family":"fat_cantor","parameters":{"lambda":0.5},"depth":6,"anchor":0},
            {"family":"identity","parameters":{"window":[0,1]},"depth":0,"anchor":0}]})";
    double masses[2] = {-1, -1};
    int proper = 0;
    REQUIRE(dflab_properness_json(product, masses, &proper) == DFLAB_OK);
    CHECK(proper == 1);
    CHECK(masses[0] == 0.5 * (1.0 - std::ldexp(1.0, -6)));
    CHECK(masses[1] == 0.0);

    const char* profiles =
        R"([{"kind":"bump","center":0.25,"radius":0.2},{"kind":"bump","center":0.5,"radius":0.3}])";
    double pe = 0.0;
    REQUIRE(dflab_product_energy_json(product, profiles, &pe) == DFLAB_OK);
    CHECK(pe > 0.0);

    dflab_scale_free(s);
}

TEST_CASE("experiment runner through the C API") {
    char* csv = nullptr;
    char* report = nullptr;
    int run_status = -1;

    // schema violations are usage errors with a machine-readable report
    REQUIRE(dflab_run_command("levy", R"({"bogus": 1})", -1, 0, &csv, &report, &run_status) ==
            DFLAB_OK);
    CHECK(run_status == 2);
    CHECK(std::string(report).find("bogus") != std::string::npos);
    dflab_string_free(csv);
    dflab_string_free(report);

    // a small spectral run passes end to end
    const char* cfg =
        R"({"symbol":{"S":[1,0,0,1],"atoms":[[[0.25,0],1],[[-0.25,0],1]]},
            "grid":{"n":64,"box_halfwidth":2.0,"sigma":0.5},"tolerance":0.05})";
    REQUIRE(dflab_run_command("levy", cfg, -1, 0, &csv, &report, &run_status) == DFLAB_OK);
    CHECK(run_status == 0);
    CHECK(std::string(csv).find("fourier_vs_direct") != std::string::npos);
    dflab_string_free(csv);
    dflab_string_free(report);

    // unknown command
    REQUIRE(dflab_run_command("conquer", "", -1, 0, &csv, &report, &run_status) == DFLAB_OK);
    CHECK(run_status == 2);
    dflab_string_free(csv);
    dflab_string_free(report);
}

TEST_CASE("remaining C surface: inverse-Cantor scale, symbol JSON, Gaussian grids") {
    dflab_scale* ic = nullptr;
    REQUIRE(dflab_scale_inverse_cantor(6, &ic) == DFLAB_OK);
    double v = 0.0;
    CHECK(dflab_scale_eval(ic, 2.0, &v) == DFLAB_OK);
    CHECK(v == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(dflab_scale_flat_mass(ic, 0.0, 2.0, &v) == DFLAB_OK);
    CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
    dflab_scale_free(ic);

    const double S[4] = {1, 0, 0, 2};
    dflab_symbol* sym = nullptr;
    REQUIRE(dflab_symbol_create(2, S, 0, nullptr, nullptr, &sym) == DFLAB_OK);
    char* json = nullptr;
    REQUIRE(dflab_symbol_to_json(sym, &json) == DFLAB_OK);
    dflab_symbol* back = nullptr;
    REQUIRE(dflab_symbol_from_json(json, &back) == DFLAB_OK);
    dflab_string_free(json);

    const double lo[2] = {-1.0, -1.0};
    const int n[2] = {32, 32};
    const double center[2] = {0.0, 0.0};
    dflab_grid* g = nullptr;
    REQUIRE(dflab_grid_gaussian(2, lo, 2.0 / 32, n, center, 0.25, &g) == DFLAB_OK);
    double ef = 0.0;
    CHECK(dflab_energy_fourier(sym, g, &ef) == DFLAB_OK);
    CHECK(ef > 0.0);

    dflab_grid_free(g);
    dflab_symbol_free(back);
    dflab_symbol_free(sym);

    // the depth sweep converges for the fat-Cantor family through the C API
    dflab_scale* fc = nullptr;
    REQUIRE(dflab_scale_fat_cantor(0.5, 10, &fc) == DFLAB_OK);
    dflab_profile* bump = nullptr;
    REQUIRE(dflab_profile_bump(0.25, 0.2, 1.0, &bump) == DFLAB_OK);
    double residual = 1.0;
    int converged = 0;
    CHECK(dflab_subspace_identity(fc, bump, 1e-3, &residual, &converged) == DFLAB_OK);
    CHECK(converged == 1);
    CHECK(residual <= 1e-3);
    dflab_profile_free(bump);
    dflab_scale_free(fc);
}

#include "coupling.hpp"

#include <cmath>

#include "errors.hpp"
#include "json.hpp"

namespace dflab {

ProductForm make_product(std::vector<ScalePtr> scales) {
    if (scales.empty()) throw_invalid("product form: need at least one component");
    if (scales.size() > 4)
        throw_invalid("product form: closed-form path supports dimension <= 4");
    ProductForm p;
    for (ScalePtr& s : scales) {
        if (!s) throw_invalid("product form: null component scale");
        const Interval iv = s->domain();
        p.components.push_back({std::move(s), iv});
    }
    return p;
}

TensorFunction make_tensor(const ProductForm& p, std::vector<Profile> profiles) {
    if (static_cast<int>(profiles.size()) != p.dim())
        throw_precondition("tensor function: factor count must equal the dimension");
    TensorFunction u;
    for (int i = 0; i < p.dim(); ++i)
        u.factors.push_back(make_core(std::move(profiles[i]), p.components[i].s));
    return u;
}

double product_energy(const ProductForm& p, const TensorFunction& u, int quad_n) {
    const int d = p.dim();
    if (static_cast<int>(u.factors.size()) != d)
        throw_precondition("product_energy: factor count must equal the dimension");
    for (int i = 0; i < d; ++i)
        if (u.factors[i].s != p.components[i].s)
            throw_precondition("product_energy: factor scale differs from its component");

    std::vector<double> energies(d), norms(d);
    for (int i = 0; i < d; ++i) {
        energies[i] = energy_es(u.factors[i], quad_n);
        norms[i] = l2_norm_sq(u.factors[i], quad_n);
    }
    double total = 0.0;
    for (int i = 0; i < d; ++i) {
        double term = energies[i];
        for (int j = 0; j < d; ++j)
            if (j != i) term *= norms[j];
        total += term;
    }
    return total;
}

PropernessReport properness_certificate(const ProductForm& p) {
    PropernessReport rep;
    for (const ProductComponent& c : p.components) {
        const double mass = c.s->flat_mass(c.interval.lo, c.interval.hi);
        rep.flat_masses.push_back(mass);
        rep.proper = rep.proper || mass > 0.0;
    }
    return rep;
}

bool rectangle_admits(const ProductForm& p, const Rectangle& g, const TensorFunction& u) {
    const int d = p.dim();
    if (static_cast<int>(g.sides.size()) != d)
        throw_precondition("rectangle: side count must equal the dimension");
    if (static_cast<int>(u.factors.size()) != d)
        throw_precondition("rectangle: factor count must equal the dimension");
    const double slack = 1e-12;
    for (int i = 0; i < d; ++i) {
        const Interval& side = g.sides[i];
        const Interval& comp = p.components[i].interval;
        if (side.lo < comp.lo - slack || side.hi > comp.hi + slack)
            throw_precondition("rectangle: side exceeds the component interval");
        const Interval sup = u.factors[i].support_x();
        if (sup.lo < side.lo - slack || sup.hi > side.hi + slack) return false;
    }
    return true;
}

double dirichlet_energy_2d(const TensorFunction& u, long nx, long ny) {
    if (u.factors.size() != 2) throw_precondition("dirichlet_energy_2d: needs two factors");
    if (nx < 16 || ny < 16) throw_precondition("dirichlet_energy_2d: grid too coarse");
    const Interval sx = u.factors[0].support_x();
    const Interval sy = u.factors[1].support_x();
    const double hx = sx.length() / static_cast<double>(nx);
    const double hy = sy.length() / static_cast<double>(ny);
    const double lox = sx.lo - 4.0 * hx;
    const double loy = sy.lo - 4.0 * hy;
    const long mx = nx + 8, my = ny + 8;

    // sample u on the node lattice
    std::vector<double> fx(mx + 1), fy(my + 1);
    for (long i = 0; i <= mx; ++i) {
        const double x = lox + i * hx;
        fx[i] = u.factors[0].phi(u.factors[0].s->eval(x));
    }
    for (long j = 0; j <= my; ++j) {
        const double y = loy + j * hy;
        fy[j] = u.factors[1].phi(u.factors[1].s->eval(y));
    }

    double acc = 0.0;
    for (long i = 0; i < mx; ++i) {
        for (long j = 0; j < my; ++j) {
            const double u00 = fx[i] * fy[j];
            const double qx = (fx[i + 1] * fy[j] - u00) / hx;
            const double qy = (fx[i] * fy[j + 1] - u00) / hy;
            acc += (qx * qx + qy * qy);
        }
    }
    return 0.5 * acc * hx * hy;
}

std::string product_to_json(const ProductForm& p) {
    nlohmann::json arr = nlohmann::json::array();
    for (const ProductComponent& c : p.components)
        arr.push_back(nlohmann::json::parse(c.s->to_json()));
    nlohmann::json j;
    j["components"] = arr;
    return j.dump();
}

ProductForm product_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw_parse(std::string("product form: ") + e.what());
    }
    if (!j.contains("components") || !j["components"].is_array() || j["components"].empty())
        throw_parse("product form: missing components array");
    std::vector<ScalePtr> scales;
    for (const auto& c : j["components"])
        scales.push_back(std::make_shared<ScaleFunction>(ScaleFunction::from_json(c.dump())));
    return make_product(std::move(scales));
}

}  // namespace dflab

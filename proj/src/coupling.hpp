#pragma once

#include <string>
#include <vector>

#include "forms1d.hpp"
#include "scale.hpp"

namespace dflab {

struct ProductComponent {
    ScalePtr s;
    Interval interval;  // the coordinate interval I_i (defaults to the scale window)
};

// Independent coupling of one-dimensional components; the energy of a tensor
// function is sum_i E_i(f_i, f_i) prod_{j != i} |f_j|^2_{L2(dx)}.
struct ProductForm {
    std::vector<ProductComponent> components;
    int dim() const { return static_cast<int>(components.size()); }
};

ProductForm make_product(std::vector<ScalePtr> scales);

struct TensorFunction {
    std::vector<CoreFunction> factors;
};

// Factors must reference the product's component scales, in order.
TensorFunction make_tensor(const ProductForm& p, std::vector<Profile> profiles);

double product_energy(const ProductForm& p, const TensorFunction& u, int quad_n = 64);

struct PropernessReport {
    std::vector<double> flat_masses;  // exact |E_{s_i}| per component
    bool proper = false;              // true when any entry is > 0
};

PropernessReport properness_certificate(const ProductForm& p);

struct Rectangle {
    std::vector<Interval> sides;
};

// Membership test for the part-form core on an open rectangle G: every
// factor's closed x-support must lie inside the corresponding side.
bool rectangle_admits(const ProductForm& p, const Rectangle& g, const TensorFunction& u);

// Direct two-dimensional finite-difference Dirichlet energy
// (1/2) int |grad (f1 x f2)|^2, the independent oracle for product_energy.
double dirichlet_energy_2d(const TensorFunction& u, long nx, long ny);

std::string product_to_json(const ProductForm& p);
ProductForm product_from_json(const std::string& text);

}  // namespace dflab

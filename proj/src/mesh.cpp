#include "phrod/mesh.hpp"

#include <cmath>

namespace phrod {

ShapeEval shape_eval(int order, double xi) {
  ShapeEval e;
  if (order == 1) {
    e.count = 2;
    e.value = {0.5 * (1.0 - xi), 0.5 * (1.0 + xi), 0.0};
    e.deriv = {-0.5, 0.5, 0.0};
  } else if (order == 2) {
    e.count = 3;
    e.value = {0.5 * xi * (xi - 1.0), 1.0 - xi * xi, 0.5 * xi * (xi + 1.0)};
    e.deriv = {xi - 0.5, -2.0 * xi, xi + 0.5};
  } else {
    throw ConfigError("polynomial order must be 1 or 2");
  }
  return e;
}

StressShapeEval stress_shape_eval(int order_minus_one, double xi) {
  StressShapeEval e;
  if (order_minus_one == 0) {
    e.count = 1;
    e.value = {1.0, 0.0};
  } else if (order_minus_one == 1) {
    const double a = 1.0 / std::sqrt(3.0);
    e.count = 2;
    e.value = {(a - xi) / (2.0 * a), (a + xi) / (2.0 * a)};
  } else {
    throw ConfigError("stress order must be 0 or 1");
  }
  return e;
}

QuadratureRule quadrature_rule() {
  const double r = std::sqrt(3.0 / 5.0);
  return {{-r, 0.0, r}, {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0}};
}

RodMesh::RodMesh(double length, int n_elements, int order)
    : length_(length), n_elements_(n_elements), order_(order) {
  if (!(length > 0.0)) throw ConfigError("rod length must be positive");
  if (n_elements < 1) throw ConfigError("element count must be at least 1");
  if (order != 1 && order != 2) throw ConfigError("polynomial order must be 1 or 2");
  n_nodes_ = n_elements_ * order_ + 1;
  n_stress_nodes_ = n_elements_ * order_;
}

double RodMesh::node_coord(int node) const {
  return length_ * static_cast<double>(node) / static_cast<double>(n_nodes_ - 1);
}

int RodMesh::element_node(int element, int local) const {
  return element * order_ + local;
}

int RodMesh::element_stress_node(int element, int local) const {
  return element * order_ + local;
}

double RodMesh::gauss_coord(int element, int gp) const {
  const double xi = quadrature_rule().points[static_cast<std::size_t>(gp)];
  return (static_cast<double>(element) + 0.5 * (xi + 1.0)) * element_length();
}

}  // namespace phrod

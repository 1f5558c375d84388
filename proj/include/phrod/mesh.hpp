#ifndef PHROD_MESH_HPP
#define PHROD_MESH_HPP

#include <array>
#include <vector>

#include "phrod/types.hpp"

namespace phrod {

// Values and reference-coordinate derivatives of the continuous Lagrange
// basis of order p at xi in [-1,1]. Nodes are equispaced: (-1,1) for p=1,
// (-1,0,1) for p=2.
struct ShapeEval {
  std::array<double, 3> value{};
  std::array<double, 3> deriv{};
  int count = 0;
};

ShapeEval shape_eval(int order, double xi);

// Discontinuous stress basis of order p-1. For order 0 a single constant;
// for order 1 the Lagrange pair located at the two-point Gauss abscissae
// xi = -+1/sqrt(3), which renders the element compliance blocks diagonal.
struct StressShapeEval {
  std::array<double, 2> value{};
  int count = 0;
};

StressShapeEval stress_shape_eval(int order_minus_one, double xi);

struct QuadratureRule {
  std::array<double, 3> points;
  std::array<double, 3> weights;
};

// Three-point Gauss-Legendre on [-1,1]; exact for polynomials of degree <= 5.
QuadratureRule quadrature_rule();

// Uniform 1-D mesh with C0 displacement nodes of order p and per-element
// stress nodes of order p-1.
class RodMesh {
public:
  RodMesh(double length, int n_elements, int order);

  double length() const { return length_; }
  int n_elements() const { return n_elements_; }
  int order() const { return order_; }
  int n_nodes() const { return n_nodes_; }
  int n_stress_nodes() const { return n_stress_nodes_; }
  int nodes_per_element() const { return order_ + 1; }
  int stress_nodes_per_element() const { return order_; }

  double element_length() const { return length_ / n_elements_; }
  // Constant isoparametric Jacobian ds/dxi.
  double jacobian() const { return 0.5 * element_length(); }

  double node_coord(int node) const;
  int element_node(int element, int local) const;
  int element_stress_node(int element, int local) const;

  // Arc-length position of a quadrature point.
  double gauss_coord(int element, int gp) const;

private:
  double length_;
  int n_elements_;
  int order_;
  int n_nodes_;
  int n_stress_nodes_;
};

}  // namespace phrod

#endif

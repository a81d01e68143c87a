#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <stdexcept>
#include <vector>

#include "fowler/mesh.hpp"
#include "fowler/quadrature.hpp"

namespace fowler {

// Periodic C0 Lagrange space of degree r-1 on the mesh. Local Lagrange
// nodes are equispaced on each element, endpoints identified globally.
// Degrees of freedom per element: r-1, dof_count = (r-1) * num_elements.
struct FemSpace {
  Mesh mesh;
  int r = 2;
  int dof_count = 0;
  int quadrature_order = 4;

  // monomial coefficients of local shape functions and derivatives in t on [0,1]
  std::vector<std::vector<double>> shape_coeffs;        // [local_node][power]
  std::vector<std::vector<double>> shape_deriv_coeffs;  // [local_node][power]

  int dofs_per_element() const { return r - 1; }
  int local_nodes() const { return r; }

  double shape(int k, double t) const {
    double v = 0.0;
    for (int p = static_cast<int>(shape_coeffs[k].size()) - 1; p >= 0; --p) v = v * t + shape_coeffs[k][p];
    return v;
  }
  double shape_deriv(int k, double t) const {
    double v = 0.0;
    for (int p = static_cast<int>(shape_deriv_coeffs[k].size()) - 1; p >= 0; --p) v = v * t + shape_deriv_coeffs[k][p];
    return v;
  }

  // global dof of local node k (0..r-1) in element e
  int global_dof(int e, int k) const { return ((r - 1) * e + k) % dof_count; }

  double lagrange_point(int j) const {
    const int d = r - 1;
    const int e = j / d;
    const int k = j % d;
    return mesh.nodes[e] + mesh.width(e) * k / d;
  }
};

inline std::shared_ptr<const FemSpace> make_space(const Mesh& mesh, int r, int quad_order = -1) {
  if (r < 2) throw std::invalid_argument("fem_space: order parameter r must be >= 2");
  auto sp = std::make_shared<FemSpace>();
  sp->mesh = mesh;
  sp->r = r;
  sp->dof_count = (r - 1) * mesh.num_elements();
  sp->quadrature_order = quad_order > 0 ? quad_order : r + 2;

  // Lagrange basis on equispaced t_k = k/(r-1), k = 0..r-1
  const int n = r;
  std::vector<double> tk(n);
  for (int k = 0; k < n; ++k) tk[k] = static_cast<double>(k) / (n - 1);
  sp->shape_coeffs.assign(n, {});
  sp->shape_deriv_coeffs.assign(n, {});
  for (int k = 0; k < n; ++k) {
    std::vector<double> poly{1.0};
    double denom = 1.0;
    for (int m = 0; m < n; ++m) {
      if (m == k) continue;
      denom *= tk[k] - tk[m];
      // poly *= (t - t_m)
      std::vector<double> next(poly.size() + 1, 0.0);
      for (size_t p = 0; p < poly.size(); ++p) {
        next[p + 1] += poly[p];
        next[p] -= tk[m] * poly[p];
      }
      poly = std::move(next);
    }
    for (double& c : poly) c /= denom;
    sp->shape_coeffs[k] = poly;
    std::vector<double> dpoly(poly.size() > 1 ? poly.size() - 1 : 1, 0.0);
    for (size_t p = 1; p < poly.size(); ++p) dpoly[p - 1] = p * poly[p];
    sp->shape_deriv_coeffs[k] = dpoly;
  }
  return sp;
}

struct StateVector {
  Eigen::VectorXd coefficients;
  std::shared_ptr<const FemSpace> space;
  double time = 0.0;
};

inline double basis_eval(const FemSpace& sp, int j, double x) {
  if (j < 0 || j >= sp.dof_count) throw std::out_of_range("basis_eval: dof index out of range");
  const double y = wrap_coordinate(sp.mesh, x);
  const int e = element_containing(sp.mesh, y);
  const double t = (y - sp.mesh.nodes[e]) / sp.mesh.width(e);
  double v = 0.0;
  for (int k = 0; k < sp.local_nodes(); ++k)
    if (sp.global_dof(e, k) == j) v += sp.shape(k, t);
  return v;
}

inline double basis_deriv(const FemSpace& sp, int j, double x) {
  if (j < 0 || j >= sp.dof_count) throw std::out_of_range("basis_deriv: dof index out of range");
  const double y = wrap_coordinate(sp.mesh, x);
  const int e = element_containing(sp.mesh, y);
  const double h = sp.mesh.width(e);
  const double t = (y - sp.mesh.nodes[e]) / h;
  double v = 0.0;
  for (int k = 0; k < sp.local_nodes(); ++k)
    if (sp.global_dof(e, k) == j) v += sp.shape_deriv(k, t) / h;
  return v;
}

inline double evaluate(const StateVector& u, double x) {
  const FemSpace& sp = *u.space;
  const double y = wrap_coordinate(sp.mesh, x);
  const int e = element_containing(sp.mesh, y);
  const double t = (y - sp.mesh.nodes[e]) / sp.mesh.width(e);
  double v = 0.0;
  for (int k = 0; k < sp.local_nodes(); ++k) v += u.coefficients[sp.global_dof(e, k)] * sp.shape(k, t);
  return v;
}

inline double evaluate_deriv(const StateVector& u, double x) {
  const FemSpace& sp = *u.space;
  const double y = wrap_coordinate(sp.mesh, x);
  const int e = element_containing(sp.mesh, y);
  const double h = sp.mesh.width(e);
  const double t = (y - sp.mesh.nodes[e]) / h;
  double v = 0.0;
  for (int k = 0; k < sp.local_nodes(); ++k) v += u.coefficients[sp.global_dof(e, k)] * sp.shape_deriv(k, t) / h;
  return v;
}

inline StateVector interpolate(std::shared_ptr<const FemSpace> sp, const std::function<double(double)>& f) {
  StateVector u;
  u.space = sp;
  u.coefficients.resize(sp->dof_count);
  for (int j = 0; j < sp->dof_count; ++j) u.coefficients[j] = f(sp->lagrange_point(j));
  return u;
}

// Integrate f over one period with per-element Gauss quadrature.
template <typename F>
double integrate_mesh(const Mesh& mesh, F&& f, int pts) {
  double sum = 0.0;
  for (int e = 0; e < mesh.num_elements(); ++e) sum += gauss_integrate(mesh.nodes[e], mesh.nodes[e + 1], f, pts);
  return sum;
}

inline double l2_norm_fn(const Mesh& mesh, const std::function<double(double)>& f, int pts = 10) {
  return std::sqrt(integrate_mesh(mesh, [&](double x) { double v = f(x); return v * v; }, pts));
}

inline double l2_error(const StateVector& u, const std::function<double(double)>& f, int pts = 10) {
  return l2_norm_fn(u.space->mesh, [&](double x) { return evaluate(u, x) - f(x); }, pts);
}

inline double h1_seminorm_error(const StateVector& u, const std::function<double(double)>& df, int pts = 10) {
  return l2_norm_fn(u.space->mesh, [&](double x) { return evaluate_deriv(u, x) - df(x); }, pts);
}

}  // namespace fowler

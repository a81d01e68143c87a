#pragma once

#include <Eigen/Dense>
#include <functional>

#include "fowler/assembly.hpp"

namespace fowler {

struct ProjectionProblem {
  const OperatorSet* ops = nullptr;
  std::function<double(double)> target;
  std::function<double(double)> target_deriv;
};

// Elliptic projection: solve (K - N + lambda M) c = rhs with
//   rhs_i = (v', phi_i') - (J[v], phi_i') + lambda (v, phi_i).
// J[v] on the continuous target uses the singularity-subtracted quadrature
// path, independent of the kernel-moment assembly.
inline StateVector elliptic_project(const ProjectionProblem& pb) {
  const OperatorSet& ops = *pb.ops;
  const FemSpace& sp = *ops.space;
  const double lambda = ops.lambda;

  Eigen::VectorXd rhs = assemble_load_deriv(sp, [&](double x) {
    return pb.target_deriv(x) - apply_J_continuous(pb.target_deriv, x, ops.kernel);
  });
  rhs += lambda * assemble_load(sp, pb.target);

  Eigen::MatrixXd A = ops.K - ops.N + lambda * ops.M;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
  StateVector out;
  out.space = ops.space;
  out.coefficients = lu.solve(rhs);
  const double resid = (A * out.coefficients - rhs).norm();
  if (!(resid < 1e-8 * std::max(1.0, rhs.norm())))
    throw std::runtime_error("elliptic_project: singular system (is lambda > alpha0?)");
  return out;
}

struct ProjectionOrderRow {
  int elements = 0;
  double err_l2 = 0.0;
  double err_h1 = 0.0;
};

struct ProjectionOrderStudy {
  std::vector<ProjectionOrderRow> rows;
  double slope_l2 = 0.0;
  double slope_h1 = 0.0;
};

// Least-squares slope of log(err) against log(h) over a refinement ladder.
inline double fit_slope(const std::vector<double>& h, const std::vector<double>& err) {
  const int n = static_cast<int>(h.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    const double x = std::log(h[i]);
    const double y = std::log(err[i]);
    sx += x; sy += y; sxx += x * x; sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

inline ProjectionOrderStudy projection_order_study(double L, int r, const std::vector<int>& ladder,
                                                   const KernelConfig& cfg,
                                                   const std::function<double(double)>& v,
                                                   const std::function<double(double)>& dv,
                                                   double margin = 2.0, double lambda_floor = 1.0) {
  ProjectionOrderStudy study;
  std::vector<double> hs, e2, e1;
  for (int N : ladder) {
    auto sp = make_space(build_uniform_mesh(L, N), r);
    OperatorSet ops = build_operator_set(sp, cfg);
    CoercivityShift cs = coercivity_shift(ops, margin);
    // any lambda > alpha0 defines the same projection family; keep it positive
    ops.lambda = std::max(cs.lambda, lambda_floor);
    ProjectionProblem pb{&ops, v, dv};
    StateVector p = elliptic_project(pb);
    ProjectionOrderRow row;
    row.elements = N;
    row.err_l2 = l2_error(p, v, 12);
    row.err_h1 = h1_seminorm_error(p, dv, 12);
    study.rows.push_back(row);
    hs.push_back(2.0 * L / N);
    e2.push_back(row.err_l2);
    e1.push_back(row.err_h1);
  }
  study.slope_l2 = fit_slope(hs, e2);
  study.slope_h1 = fit_slope(hs, e1);
  return study;
}

}  // namespace fowler

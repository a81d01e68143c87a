#pragma once

#include <Eigen/Dense>
#include <memory>
#include <stdexcept>

#include "fowler/fem_space.hpp"
#include "fowler/kernel.hpp"

namespace fowler {

// Assembled discrete operators of the variational form.
//   M_ij = (phi_j, phi_i)   K_ij = (phi_j', phi_i')   N_ij = (J[phi_j], phi_i')
struct OperatorSet {
  Eigen::MatrixXd M, K, N;
  double lambda = 0.0;  // coercivity shift
  double eps = 1.0;     // diffusion coefficient
  std::shared_ptr<const FemSpace> space;
  KernelConfig kernel;
};

inline Eigen::MatrixXd assemble_mass(const FemSpace& sp) {
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(sp.dof_count, sp.dof_count);
  const GaussRule& rule = gauss_rule(sp.quadrature_order);
  const int nl = sp.local_nodes();
  for (int e = 0; e < sp.mesh.num_elements(); ++e) {
    const double he = sp.mesh.width(e);
    for (size_t q = 0; q < rule.points.size(); ++q) {
      const double t = 0.5 * (1.0 + rule.points[q]);
      const double w = 0.5 * he * rule.weights[q];
      for (int a = 0; a < nl; ++a) {
        const double sa = sp.shape(a, t);
        for (int b = 0; b < nl; ++b) M(sp.global_dof(e, a), sp.global_dof(e, b)) += w * sa * sp.shape(b, t);
      }
    }
  }
  return M;
}

inline Eigen::MatrixXd assemble_stiffness(const FemSpace& sp) {
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(sp.dof_count, sp.dof_count);
  const GaussRule& rule = gauss_rule(sp.quadrature_order);
  const int nl = sp.local_nodes();
  for (int e = 0; e < sp.mesh.num_elements(); ++e) {
    const double he = sp.mesh.width(e);
    for (size_t q = 0; q < rule.points.size(); ++q) {
      const double t = 0.5 * (1.0 + rule.points[q]);
      const double w = 0.5 * he * rule.weights[q];
      for (int a = 0; a < nl; ++a) {
        const double da = sp.shape_deriv(a, t) / he;
        for (int b = 0; b < nl; ++b) K(sp.global_dof(e, a), sp.global_dof(e, b)) += w * da * sp.shape_deriv(b, t) / he;
      }
    }
  }
  return K;
}

namespace detail {

// Generic path: outer Gauss quadrature in x, exact inner kernel moments.
// test_deriv == true pairs against phi_i', otherwise against phi_i.
inline Eigen::MatrixXd assemble_nonlocal_quadrature(const FemSpace& sp, const KernelConfig& cfg,
                                                    bool test_deriv, int max_column = -1) {
  const int cols = max_column > 0 ? max_column : sp.dof_count;
  Eigen::MatrixXd N = Eigen::MatrixXd::Zero(sp.dof_count, sp.dof_count);
  if (!cfg.enabled) return N;
  const GaussRule& rule = gauss_rule(sp.r + 3);
  const int nl = sp.local_nodes();
  Eigen::VectorXd row(sp.dof_count);
  for (int e = 0; e < sp.mesh.num_elements(); ++e) {
    const double he = sp.mesh.width(e);
    for (size_t q = 0; q < rule.points.size(); ++q) {
      const double t = 0.5 * (1.0 + rule.points[q]);
      const double w = 0.5 * he * rule.weights[q];
      const double x = sp.mesh.nodes[e] + he * t;
      apply_J_basis_row(sp, x, cfg, row);
      for (int a = 0; a < nl; ++a) {
        const int i = sp.global_dof(e, a);
        const double test = test_deriv ? sp.shape_deriv(a, t) / he : sp.shape(a, t);
        const double wt = w * test;
        if (max_column > 0) {
          for (int j = 0; j < cols; ++j) N(i, j) += wt * row[j];
        } else {
          N.row(i).noalias() += wt * row.transpose();
        }
      }
    }
  }
  return N;
}

}  // namespace detail

inline Eigen::MatrixXd assemble_nonlocal_generic(const FemSpace& sp, const KernelConfig& cfg) {
  return detail::assemble_nonlocal_quadrature(sp, cfg, true);
}

// On a uniform mesh the kernel is translation invariant, so N is circulant
// with blocks of size r-1: compute the first block of columns and shift.
inline Eigen::MatrixXd assemble_nonlocal(const FemSpace& sp, const KernelConfig& cfg) {
  if (!cfg.enabled) return Eigen::MatrixXd::Zero(sp.dof_count, sp.dof_count);
  if (!sp.mesh.uniform) return assemble_nonlocal_generic(sp, cfg);
  const int d = sp.dofs_per_element();
  const int n = sp.dof_count;
  Eigen::MatrixXd first = detail::assemble_nonlocal_quadrature(sp, cfg, true, d);
  Eigen::MatrixXd N(n, n);
  for (int shift = 0; shift < n / d; ++shift) {
    for (int j = 0; j < d; ++j)
      for (int i = 0; i < n; ++i) N((i + shift * d) % n, j + shift * d) = first(i, j);
  }
  return N;
}

// Mass-paired kernel matrix G_ij = (J[phi_j], phi_i); used by the stability
// constants to realize the L2 inverse inequality for J.
inline Eigen::MatrixXd assemble_nonlocal_mass_paired(const FemSpace& sp, const KernelConfig& cfg) {
  return detail::assemble_nonlocal_quadrature(sp, cfg, false);
}

// b_i = (u_h u_h', phi_i), exact Gauss quadrature.
inline Eigen::VectorXd assemble_nonlinear(const StateVector& u) {
  const FemSpace& sp = *u.space;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(sp.dof_count);
  const int pts = sp.quadrature_order;
  const GaussRule& rule = gauss_rule(pts);
  const int nl = sp.local_nodes();
  for (int e = 0; e < sp.mesh.num_elements(); ++e) {
    const double he = sp.mesh.width(e);
    for (size_t q = 0; q < rule.points.size(); ++q) {
      const double t = 0.5 * (1.0 + rule.points[q]);
      const double w = 0.5 * he * rule.weights[q];
      double uval = 0.0, uder = 0.0;
      for (int k = 0; k < nl; ++k) {
        const double c = u.coefficients[sp.global_dof(e, k)];
        uval += c * sp.shape(k, t);
        uder += c * sp.shape_deriv(k, t) / he;
      }
      const double f = w * uval * uder;
      for (int a = 0; a < nl; ++a) b[sp.global_dof(e, a)] += f * sp.shape(a, t);
    }
  }
  return b;
}

// Load vectors (f, phi_i) and (g, phi_i').
inline Eigen::VectorXd assemble_load(const FemSpace& sp, const std::function<double(double)>& f, int pts = -1) {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(sp.dof_count);
  const GaussRule& rule = gauss_rule(pts > 0 ? pts : sp.quadrature_order + 2);
  const int nl = sp.local_nodes();
  for (int e = 0; e < sp.mesh.num_elements(); ++e) {
    const double he = sp.mesh.width(e);
    for (size_t q = 0; q < rule.points.size(); ++q) {
      const double t = 0.5 * (1.0 + rule.points[q]);
      const double w = 0.5 * he * rule.weights[q];
      const double fx = f(sp.mesh.nodes[e] + he * t);
      for (int a = 0; a < nl; ++a) b[sp.global_dof(e, a)] += w * fx * sp.shape(a, t);
    }
  }
  return b;
}

inline Eigen::VectorXd assemble_load_deriv(const FemSpace& sp, const std::function<double(double)>& g, int pts = -1) {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(sp.dof_count);
  const GaussRule& rule = gauss_rule(pts > 0 ? pts : sp.quadrature_order + 2);
  const int nl = sp.local_nodes();
  for (int e = 0; e < sp.mesh.num_elements(); ++e) {
    const double he = sp.mesh.width(e);
    for (size_t q = 0; q < rule.points.size(); ++q) {
      const double t = 0.5 * (1.0 + rule.points[q]);
      const double w = 0.5 * he * rule.weights[q];
      const double gx = g(sp.mesh.nodes[e] + he * t);
      for (int a = 0; a < nl; ++a) b[sp.global_dof(e, a)] += w * gx * sp.shape_deriv(a, t) / he;
    }
  }
  return b;
}

// L2 projection: solve M c = (f, phi_i).
inline StateVector l2_project(std::shared_ptr<const FemSpace> sp, const std::function<double(double)>& f) {
  Eigen::LLT<Eigen::MatrixXd> llt(assemble_mass(*sp));
  if (llt.info() != Eigen::Success) throw std::runtime_error("l2_project: singular mass matrix");
  StateVector u;
  u.space = sp;
  u.coefficients = llt.solve(assemble_load(*sp, f));
  return u;
}

// Garding constant alpha0 = max(0, -lambda_min) of sym(K - N) against M;
// returns {lambda = margin * alpha0, alpha0}.
struct CoercivityShift {
  double lambda = 0.0;
  double alpha0 = 0.0;
};

inline CoercivityShift coercivity_shift(const OperatorSet& ops, double margin = 2.0) {
  if (!(margin > 1.0)) throw std::invalid_argument("coercivity_shift: margin must exceed 1");
  Eigen::MatrixXd A = ops.K - ops.N;
  Eigen::MatrixXd S = 0.5 * (A + A.transpose());
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(S, ops.M);
  if (es.info() != Eigen::Success) throw std::runtime_error("coercivity_shift: eigensolver failure");
  const double lmin = es.eigenvalues().minCoeff();
  const double scale = es.eigenvalues().cwiseAbs().maxCoeff();
  CoercivityShift out;
  out.alpha0 = (-lmin > 1e-12 * std::max(1.0, scale)) ? -lmin : 0.0;
  out.lambda = margin * out.alpha0;
  return out;
}

inline OperatorSet build_operator_set(std::shared_ptr<const FemSpace> sp, const KernelConfig& cfg,
                                      double eps = 1.0) {
  OperatorSet ops;
  ops.space = sp;
  ops.kernel = cfg;
  ops.eps = eps;
  ops.M = assemble_mass(*sp);
  ops.K = assemble_stiffness(*sp);
  ops.N = assemble_nonlocal(*sp, cfg);
  return ops;
}

// Text dump of a matrix as (row, col, value) triplets.
inline std::string matrix_triplets(const Eigen::MatrixXd& A, double drop_tol = 0.0) {
  std::string out;
  char buf[80];
  for (int i = 0; i < A.rows(); ++i)
    for (int j = 0; j < A.cols(); ++j) {
      if (drop_tol > 0.0 && std::abs(A(i, j)) <= drop_tol) continue;
      std::snprintf(buf, sizeof(buf), "%d %d %.17g\n", i, j, A(i, j));
      out += buf;
    }
  return out;
}

}  // namespace fowler

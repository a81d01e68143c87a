#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "fowler/assembly.hpp"

namespace fowler {

struct SolverConfig {
  double dt = 1e-3;
  double t_end = 0.1;
  double picard_tol = 1e-11;
  int picard_max = 50;
  bool stability_override = false;
  bool lenient_picard = false;  // keep the last iterate instead of throwing
  bool include_nonlinearity = true;
  int snapshot_every = 0;  // 0 keeps only initial and final states
};

// Discrete inverse-inequality constants entering the step size gate
//   lhs = C1 dt / h^2 + C2 dt / h^{4/3} <= 1.
// C1 tracks the diffusion operator, C2 the nonlocal term through the
// mass-paired matrix G_ij = (J[phi_j], phi_i).
struct InverseConstants {
  double C1 = 0.0;
  double C2 = 0.0;
  double h = 0.0;
};

struct StabilityEstimate {
  double C1 = 0.0;
  double C2 = 0.0;
  double lhs = 0.0;
  bool pass = true;
};

inline double m_norm(const Eigen::MatrixXd& M, const Eigen::VectorXd& c) {
  return std::sqrt(std::max(0.0, c.dot(M * c)));
}

inline double mean_value(const OperatorSet& ops, const Eigen::VectorXd& c) {
  return (ops.M * c).sum() / (2.0 * ops.space->mesh.L);
}

inline InverseConstants estimate_inverse_constants(const OperatorSet& ops) {
  InverseConstants out;
  double hmin = ops.space->mesh.width(0);
  for (int e = 1; e < ops.space->mesh.num_elements(); ++e) hmin = std::min(hmin, ops.space->mesh.width(e));
  out.h = hmin;

  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(ops.K, ops.M);
  if (es.info() != Eigen::Success) throw std::runtime_error("estimate_inverse_constants: eigensolver failure");
  out.C1 = 0.25 * hmin * hmin * es.eigenvalues().maxCoeff();

  if (ops.kernel.enabled) {
    Eigen::MatrixXd G = assemble_nonlocal_mass_paired(*ops.space, ops.kernel);
    Eigen::LLT<Eigen::MatrixXd> llt(ops.M);
    Eigen::MatrixXd B = G.transpose() * llt.solve(G);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> eg(0.5 * (B + B.transpose()), ops.M);
    if (eg.info() != Eigen::Success) throw std::runtime_error("estimate_inverse_constants: eigensolver failure");
    out.C2 = 0.25 * std::pow(hmin, 4.0 / 3.0) * eg.eigenvalues().maxCoeff();
  }
  return out;
}

inline StabilityEstimate check_stability(const InverseConstants& ic, double dt) {
  StabilityEstimate st;
  st.C1 = ic.C1;
  st.C2 = ic.C2;
  st.lhs = ic.C1 * dt / (ic.h * ic.h) + ic.C2 * dt / std::pow(ic.h, 4.0 / 3.0);
  st.pass = st.lhs <= 1.0;
  return st;
}

// Largest dt with lhs <= 1 (the gate is linear in dt).
inline double max_stable_dt(const InverseConstants& ic) {
  const double slope = ic.C1 / (ic.h * ic.h) + ic.C2 / std::pow(ic.h, 4.0 / 3.0);
  return slope > 0.0 ? 1.0 / slope : std::numeric_limits<double>::infinity();
}

struct StabilityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PicardError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct StepReport {
  int iterations = 0;
  bool converged = true;
  double increment = 0.0;
};

// Midpoint form of Crank-Nicolson: with V = (u^n + u^{n+1})/2,
//   (2/dt M + eps K - N) V = (2/dt) M u^n - b(V),   u^{n+1} = 2V - u^n,
// where b(v)_i = (v v', phi_i). The fixed point is resolved by Picard
// iteration; the matrix is factored once per step size.
class CrankNicolsonStepper {
 public:
  CrankNicolsonStepper(const OperatorSet& ops, const SolverConfig& cfg, std::vector<int> masked_dofs = {})
      : ops_(ops), cfg_(cfg), mask_(std::move(masked_dofs)) {}

  StepReport advance(StateVector& u, double dt) {
    if (dt != factored_dt_) factor(dt);
    const Eigen::VectorXd rhs0 = (2.0 / dt) * (ops_.M * u.coefficients);
    Eigen::VectorXd V = u.coefficients;
    StepReport rep;
    rep.converged = false;
    for (int it = 0; it < cfg_.picard_max; ++it) {
      Eigen::VectorXd rhs = rhs0;
      if (cfg_.include_nonlinearity) {
        StateVector vs{V, ops_.space, u.time + 0.5 * dt};
        rhs -= assemble_nonlinear(vs);
      }
      for (int j : mask_) rhs[j] = 0.0;
      Eigen::VectorXd Vn = lu_.solve(rhs);
      rep.increment = m_norm(ops_.M, Vn - V);
      rep.iterations = it + 1;
      V = std::move(Vn);
      if (rep.increment < cfg_.picard_tol * std::max(1.0, m_norm(ops_.M, V))) {
        rep.converged = true;
        break;
      }
      if (!cfg_.include_nonlinearity) {  // linear problem: one solve is exact
        rep.converged = true;
        break;
      }
      if (!std::isfinite(rep.increment)) break;
    }
    if (!rep.converged && !cfg_.lenient_picard)
      throw PicardError("crank_nicolson: picard iteration did not converge");
    u.coefficients = 2.0 * V - u.coefficients;
    for (int j : mask_) u.coefficients[j] = 0.0;
    u.time += dt;
    return rep;
  }

 private:
  void factor(double dt) {
    Eigen::MatrixXd A = (2.0 / dt) * ops_.M + ops_.eps * ops_.K - ops_.N;
    for (int j : mask_) {
      A.row(j).setZero();
      A(j, j) = 1.0;
    }
    lu_.compute(A);
    factored_dt_ = dt;
  }

  const OperatorSet& ops_;
  SolverConfig cfg_;
  std::vector<int> mask_;
  double factored_dt_ = 0.0;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
};

struct RunResult {
  StateVector final_state;
  std::vector<StateVector> snapshots;
  int steps = 0;
  int picard_total = 0;
  int picard_max_seen = 0;
  bool all_converged = true;
  double norm_ratio = 1.0;  // final M-norm over initial M-norm
  double mean_drift = 0.0;
  StabilityEstimate stability;
};

inline RunResult run_simulation(const OperatorSet& ops, const StateVector& u0, const SolverConfig& cfg,
                                const std::vector<int>& masked_dofs = {}) {
  if (!(cfg.dt > 0.0) || !(cfg.t_end > 0.0)) throw std::invalid_argument("run_simulation: dt and t_end must be positive");
  RunResult out;
  out.stability = check_stability(estimate_inverse_constants(ops), cfg.dt);
  if (!out.stability.pass && !cfg.stability_override)
    throw StabilityError("run_simulation: step size gate violated (lhs = " + std::to_string(out.stability.lhs) + ")");

  CrankNicolsonStepper stepper(ops, cfg, masked_dofs);
  StateVector u = u0;
  u.space = ops.space;
  for (int j : masked_dofs) u.coefficients[j] = 0.0;
  const double mean0 = mean_value(ops, u.coefficients);
  const double norm0 = m_norm(ops.M, u.coefficients);
  out.snapshots.push_back(u);

  const double tiny = 1e-12 * cfg.t_end;
  while (u.time < cfg.t_end - tiny) {
    const double dt = std::min(cfg.dt, cfg.t_end - u.time);
    StepReport rep = stepper.advance(u, dt);
    ++out.steps;
    out.picard_total += rep.iterations;
    out.picard_max_seen = std::max(out.picard_max_seen, rep.iterations);
    out.all_converged = out.all_converged && rep.converged;
    if (cfg.snapshot_every > 0 && out.steps % cfg.snapshot_every == 0) out.snapshots.push_back(u);
    if (!std::isfinite(u.coefficients.norm())) break;
  }
  if (out.snapshots.back().time != u.time) out.snapshots.push_back(u);
  out.final_state = u;
  const double normT = m_norm(ops.M, u.coefficients);
  out.norm_ratio = norm0 > 0.0 ? normT / norm0 : normT;
  out.mean_drift = std::abs(mean_value(ops, u.coefficients) - mean0);
  return out;
}

// Semidiscrete right hand side M^{-1}(-b(u) - eps K u + N u), for the
// explicit cross-check integrator.
inline Eigen::VectorXd semidiscrete_rhs(const OperatorSet& ops, const Eigen::LLT<Eigen::MatrixXd>& mass_llt,
                                        const Eigen::VectorXd& c, double t, bool nonlinear) {
  Eigen::VectorXd r = ops.N * c - ops.eps * (ops.K * c);
  if (nonlinear) {
    StateVector u{c, ops.space, t};
    r -= assemble_nonlinear(u);
  }
  return mass_llt.solve(r);
}

inline StateVector run_rk4(const OperatorSet& ops, const StateVector& u0, double dt, double t_end,
                           bool nonlinear = true) {
  Eigen::LLT<Eigen::MatrixXd> mass(ops.M);
  StateVector u = u0;
  u.space = ops.space;
  const double tiny = 1e-12 * t_end;
  while (u.time < t_end - tiny) {
    const double h = std::min(dt, t_end - u.time);
    const Eigen::VectorXd& c = u.coefficients;
    Eigen::VectorXd k1 = semidiscrete_rhs(ops, mass, c, u.time, nonlinear);
    Eigen::VectorXd k2 = semidiscrete_rhs(ops, mass, c + 0.5 * h * k1, u.time + 0.5 * h, nonlinear);
    Eigen::VectorXd k3 = semidiscrete_rhs(ops, mass, c + 0.5 * h * k2, u.time + 0.5 * h, nonlinear);
    Eigen::VectorXd k4 = semidiscrete_rhs(ops, mass, c + h * k3, u.time + h, nonlinear);
    u.coefficients += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    u.time += h;
  }
  return u;
}

}  // namespace fowler

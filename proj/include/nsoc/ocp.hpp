#pragma once

// Direct single-shooting evaluation: parameterize the control on a uniform
// grid, run the augmented DAE integration, and read off the Mayer objective
// (the auxiliary state, stored last) together with a generalized-gradient
// element mu = X_aux(t_f)^T and terminal-constraint Jacobian rows.

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nsoc/control_grid.hpp"
#include "nsoc/dae.hpp"
#include "nsoc/errors.hpp"

namespace nsoc {

struct TerminalConstraint {
  Eigen::Index state_index = 0;
  double target = 0.0;
};

struct OcpProblem {
  SemiExplicitDae dae;  // auxiliary Mayer state is the last differential state
  double t0 = 0.0;
  double tf = 1.0;
  Eigen::Index n_s = 1;
  Eigen::Index n_u = 1;
  Eigen::VectorXd x0;       // length n_x, x0[aux] == 0
  Eigen::VectorXd y_guess;  // length n_y
  Eigen::VectorXd lower, upper;  // per-control bounds, length n_u
  std::vector<TerminalConstraint> terminal;
  IntegratorConfig integrator;

  Eigen::Index n_p() const { return n_s * n_u; }
  Eigen::Index aux_index() const { return dae.n_x - 1; }
};

struct ShootingResult {
  double phi = 0.0;
  Eigen::VectorXd mu;                 // generalized gradient element, length n_p
  Eigen::VectorXd terminal_values;    // x_i(t_f) for each constraint
  Eigen::MatrixXd terminal_jacobian;  // rows of X(t_f) for each constraint
  TrajectoryRecord trajectory;        // branch log in trajectory.switches
};

namespace detail {

inline void check_bounds_membership(const OcpProblem& prob, const Eigen::VectorXd& p) {
  if (p.size() != prob.n_p()) {
    throw DimensionError("evaluate: decision vector length " +
                         std::to_string(p.size()) + " != n_s*n_u");
  }
  for (Eigen::Index j = 0; j < p.size(); ++j) {
    const Eigen::Index c = j % prob.n_u;
    if (p(j) < prob.lower(c) || p(j) > prob.upper(c)) {
      throw RangeError("evaluate: p(" + std::to_string(j) + ") = " +
                       std::to_string(p(j)) + " violates bounds [" +
                       std::to_string(prob.lower(c)) + ", " +
                       std::to_string(prob.upper(c)) + "]");
    }
  }
}

inline ShootingResult shoot(const OcpProblem& prob, const Eigen::VectorXd& p,
                            bool with_sensitivities);

}  // namespace detail

inline ShootingResult evaluate(const OcpProblem& prob, const Eigen::VectorXd& p,
                               bool with_sensitivities = true) {
  detail::check_bounds_membership(prob, p);
  return detail::shoot(prob, p, with_sensitivities);
}

// Shooting without the NLP-level bound membership check; used by FD oracles
// whose stencils may poke just outside an active bound.
inline ShootingResult detail::shoot(const OcpProblem& prob, const Eigen::VectorXd& p,
                                    bool with_sensitivities) {
  if (prob.x0(prob.aux_index()) != 0.0) {
    throw RangeError("evaluate: auxiliary Mayer state must start at zero");
  }

  ControlGrid grid = ControlGrid::from_vector(p, prob.n_s, prob.n_u, prob.t0, prob.tf);
  IntegratorConfig cfg = prob.integrator;
  cfg.propagate_sensitivities = with_sensitivities;
  const Eigen::Index np = with_sensitivities ? prob.n_p() : 0;

  ShootingResult res;
  try {
    auto init = consistent_init(prob.dae, cfg, prob.t0, prob.x0, prob.y_guess, np);
    res.trajectory = integrate(prob.dae, cfg, grid, init);
  } catch (const IntegrationError& e) {
    throw IntegrationError(std::string(e.what()) + " (while evaluating p with p(0)=" +
                               std::to_string(p.size() ? p(0) : 0.0) + ")",
                           e.t);
  }

  const auto& fin = res.trajectory.final_state;
  res.phi = fin.x(prob.aux_index());
  if (with_sensitivities) {
    res.mu = fin.X.row(prob.aux_index()).transpose();
  } else {
    res.mu.resize(0);
  }
  res.terminal_values.resize(Eigen::Index(prob.terminal.size()));
  res.terminal_jacobian.resize(Eigen::Index(prob.terminal.size()),
                               with_sensitivities ? prob.n_p() : 0);
  for (size_t k = 0; k < prob.terminal.size(); ++k) {
    res.terminal_values(Eigen::Index(k)) = fin.x(prob.terminal[k].state_index);
    if (with_sensitivities) {
      res.terminal_jacobian.row(Eigen::Index(k)) = fin.X.row(prob.terminal[k].state_index);
    }
  }
  return res;
}

struct RecoveryReport {
  double max_rel_error = 0.0;
  Eigen::VectorXd mu;
  Eigen::VectorXd fd;
};

// Compare mu against central finite differences of phi componentwise.
// Meaningful when the problem is built from smooth RHS/objective or the
// trajectory stays off kinks.
inline RecoveryReport classical_recovery_check(const OcpProblem& prob,
                                               const Eigen::VectorXd& p,
                                               double fd_step = 1e-6) {
  RecoveryReport rep;
  rep.mu = evaluate(prob, p, true).mu;
  rep.fd.resize(p.size());
  for (Eigen::Index j = 0; j < p.size(); ++j) {
    Eigen::VectorXd pp = p, pm = p;
    pp(j) += fd_step;
    pm(j) -= fd_step;
    const double fp = detail::shoot(prob, pp, false).phi;
    const double fm = detail::shoot(prob, pm, false).phi;
    rep.fd(j) = (fp - fm) / (2.0 * fd_step);
    const double denom = std::max(std::fabs(rep.fd(j)), 1e-8);
    rep.max_rel_error =
        std::max(rep.max_rel_error, std::fabs(rep.mu(j) - rep.fd(j)) / denom);
  }
  return rep;
}

}  // namespace nsoc

#pragma once

// Frictionless block-move benchmark: drive a unit block from rest at
// position 0 to rest at position 1 over [0, 1] while minimizing the absolute
// work |u x2| done by the force u. States: x1 position, x2 velocity,
// x3 accumulated work (the Mayer auxiliary state).

#include <Eigen/Core>

#include "nsoc/dae.hpp"
#include "nsoc/ocp.hpp"

namespace nsoc {

enum class BlockObjective {
  AbsWork,       // |u x2|
  TanhSmoothed,  // (u x2) tanh(u x2 / alpha)
  SquaredWork,   // (u x2)^2, smooth variant for recovery checks
};

namespace detail {

template <class T>
T block_work_integrand(const T& u, const T& x2, BlockObjective kind, double alpha,
                       Select<T>& sel) {
  using std::tanh;
  const T w = u * x2;
  switch (kind) {
    case BlockObjective::AbsWork:
      return sel.abs(w);
    case BlockObjective::TanhSmoothed:
      return w * tanh(w / alpha);
    case BlockObjective::SquaredWork:
    default:
      return w * w;
  }
}

}  // namespace detail

inline SemiExplicitDae make_block_move_dae(BlockObjective kind, double alpha = 1.0) {
  SemiExplicitDae d;
  d.n_x = 3;
  d.n_y = 0;
  d.n_u = 1;
  d.rhs_h = [kind, alpha](double, const Eigen::VectorXd& u, const Eigen::VectorXd& x,
                          const Eigen::VectorXd&, Eigen::VectorXd& h) {
    Select<double> sel;
    h(0) = x(1);
    h(1) = u(0);
    h(2) = detail::block_work_integrand(u(0), x(1), kind, alpha, sel);
  };
  d.ld_rhs_h = [kind, alpha](const LdScalar&, const LdVector& u, const LdVector& x,
                             const LdVector&, LdVector& h, BranchRecorder* rec) {
    Select<LdScalar> sel{rec};
    h.clear();
    h.push_back(x[1]);
    h.push_back(u[0]);
    h.push_back(detail::block_work_integrand(u[0], x[1], kind, alpha, sel));
  };
  return d;
}

inline OcpProblem make_block_move_ocp(Eigen::Index n_s, BlockObjective kind,
                                      double alpha = 1.0, double t0 = 0.0,
                                      double tf = 1.0) {
  OcpProblem prob;
  prob.dae = make_block_move_dae(kind, alpha);
  prob.t0 = t0;
  prob.tf = tf;
  prob.n_s = n_s;
  prob.n_u = 1;
  prob.x0 = Eigen::VectorXd::Zero(3);
  prob.y_guess.resize(0);
  prob.lower = Eigen::VectorXd::Constant(1, -50.0);
  prob.upper = Eigen::VectorXd::Constant(1, 50.0);
  prob.terminal = {{0, 1.0}, {1, 0.0}};
  prob.integrator.steps_per_interval = 20;
  return prob;
}

}  // namespace nsoc

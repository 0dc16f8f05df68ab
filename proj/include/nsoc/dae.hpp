#pragma once

// Fixed-step implicit trapezoidal integration of semi-explicit index-1 DAE
// systems together with their LD-derivative sensitivity system.
//
//   x'(t) = h(t, u(t), x(t), y(t))
//   0     = g(t, x(t), y(t))
//
// The state step solves the coupled trapezoidal/algebraic residual with a
// full Newton corrector (finite-difference Jacobian). The sensitivity step is
// a single linear solve: the trapezoidal stencil applied to the LD sensitivity
// system with the fsign/slmin selections frozen at the step endpoints. The
// selection-frozen Jacobians at the new point come from one LD evaluation
// with unit probing directions over (x, y, u); the explicit half reuses the
// LD evaluation with the actual direction seeds at the old point, which is
// also where branch switches are detected and logged.

#include <cstdint>
#include <fstream>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "nsoc/control_grid.hpp"
#include "nsoc/errors.hpp"
#include "nsoc/io.hpp"
#include "nsoc/ld.hpp"

namespace nsoc {

struct SemiExplicitDae {
  Eigen::Index n_x = 0;
  Eigen::Index n_y = 0;
  Eigen::Index n_u = 1;

  std::function<void(double t, const Eigen::VectorXd& u, const Eigen::VectorXd& x,
                     const Eigen::VectorXd& y, Eigen::VectorXd& h)>
      rhs_h;
  std::function<void(double t, const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                     Eigen::VectorXd& g)>
      alg_g;  // unused when n_y == 0

  // Same maps lifted to LdScalar arguments; direction width is the caller's.
  std::function<void(const LdScalar& t, const LdVector& u, const LdVector& x,
                     const LdVector& y, LdVector& h, BranchRecorder* rec)>
      ld_rhs_h;
  std::function<void(const LdScalar& t, const LdVector& x, const LdVector& y,
                     LdVector& g, BranchRecorder* rec)>
      ld_alg_g;
};

enum class SensitivityRecord { EveryStep, Breakpoints, FinalOnly };

struct IntegratorConfig {
  int steps_per_interval = 100;
  double newton_tol = 1e-10;
  int newton_max_iter = 25;
  double regularity_floor = 1e-8;  // minimum |dg/dy| pivot magnitude
  bool propagate_sensitivities = true;
  SensitivityRecord sensitivity_record = SensitivityRecord::EveryStep;
};

struct AugmentedDaeState {
  double t = 0.0;
  Eigen::VectorXd x;  // n_x
  Eigen::VectorXd y;  // n_y
  Eigen::MatrixXd X;  // n_x x n_p
  Eigen::MatrixXd Y;  // n_y x n_p
};

struct SwitchEvent {
  double t = 0.0;
  int site = -1;        // selection call-site index within one RHS evaluation
  std::int8_t code = 0;  // branch code now active at that site
};

struct TrajectoryRecord {
  std::vector<double> t;
  std::vector<Eigen::VectorXd> x;
  std::vector<Eigen::VectorXd> y;
  std::vector<Eigen::VectorXd> u;

  // Sensitivities sampled per IntegratorConfig::sensitivity_record.
  std::vector<double> sens_t;
  std::vector<Eigen::MatrixXd> X;
  std::vector<Eigen::MatrixXd> Y;

  std::vector<SwitchEvent> switches;
  AugmentedDaeState final_state;

  double max_alg_residual = 0.0;       // max ||g||_inf over accepted states
  double max_sens_alg_residual = 0.0;  // max ||g' rows||_inf (actual seeds)
  long total_newton_iters = 0;

  Eigen::Index sample_count() const { return Eigen::Index(t.size()); }
};

namespace detail {

inline void check_finite_vec(const char* what, double t, const Eigen::VectorXd& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v(i))) {
      throw ModelError(std::string(what) + ": non-finite output at t=" +
                       std::to_string(t));
    }
  }
}

inline void eval_rhs(const SemiExplicitDae& dae, double t, const Eigen::VectorXd& u,
                     const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                     Eigen::VectorXd& h) {
  h.resize(dae.n_x);
  dae.rhs_h(t, u, x, y, h);
  check_finite_vec("rhs h", t, h);
}

inline void eval_alg(const SemiExplicitDae& dae, double t, const Eigen::VectorXd& x,
                     const Eigen::VectorXd& y, Eigen::VectorXd& g) {
  g.resize(dae.n_y);
  if (dae.n_y == 0) return;
  dae.alg_g(t, x, y, g);
  check_finite_vec("alg g", t, g);
}

// Selection-frozen Jacobians from one LD evaluation with unit probing
// directions over (x, y, u).
struct ProbedJacobians {
  Eigen::MatrixXd A_x, A_y, B_u;  // rows of h'
  Eigen::MatrixXd C_x, C_y;       // rows of g'
};

inline ProbedJacobians probe_jacobians(const SemiExplicitDae& dae, double t,
                                       const Eigen::VectorXd& u,
                                       const Eigen::VectorXd& x,
                                       const Eigen::VectorXd& y) {
  const Eigen::Index nx = dae.n_x, ny = dae.n_y, nu = dae.n_u;
  const Eigen::Index k = nx + ny + nu;
  LdScalar t_ld = LdScalar::constant(t, k);
  LdVector x_ld, y_ld, u_ld;
  x_ld.reserve(nx);
  y_ld.reserve(ny);
  u_ld.reserve(nu);
  for (Eigen::Index j = 0; j < nx; ++j) x_ld.push_back(LdScalar::seeded(x(j), k, j));
  for (Eigen::Index j = 0; j < ny; ++j) y_ld.push_back(LdScalar::seeded(y(j), k, nx + j));
  for (Eigen::Index j = 0; j < nu; ++j) u_ld.push_back(LdScalar::seeded(u(j), k, nx + ny + j));

  LdVector h_ld, g_ld;
  dae.ld_rhs_h(t_ld, u_ld, x_ld, y_ld, h_ld, nullptr);
  ProbedJacobians out;
  out.A_x.resize(nx, nx);
  out.A_y.resize(nx, ny);
  out.B_u.resize(nx, nu);
  for (Eigen::Index r = 0; r < nx; ++r) {
    out.A_x.row(r) = h_ld[r].der.segment(0, nx);
    out.A_y.row(r) = h_ld[r].der.segment(nx, ny);
    out.B_u.row(r) = h_ld[r].der.segment(nx + ny, nu);
  }
  out.C_x.resize(ny, nx);
  out.C_y.resize(ny, ny);
  if (ny > 0) {
    dae.ld_alg_g(t_ld, x_ld, y_ld, g_ld, nullptr);
    for (Eigen::Index r = 0; r < ny; ++r) {
      out.C_x.row(r) = g_ld[r].der.segment(0, nx);
      out.C_y.row(r) = g_ld[r].der.segment(nx, ny);
    }
  }
  return out;
}

// LD evaluation with the actual sensitivity seeds: u rows are the control
// seed block for the active subinterval, x/y rows are the current X, Y.
struct SeededEval {
  Eigen::MatrixXd H;  // n_x x n_p
  Eigen::MatrixXd G;  // n_y x n_p
};

inline SeededEval seeded_eval(const SemiExplicitDae& dae, double t,
                              const Eigen::VectorXd& u, const Eigen::VectorXd& x,
                              const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
                              const Eigen::MatrixXd& Y, const Eigen::MatrixXd& seed_u,
                              BranchRecorder* rec) {
  const Eigen::Index nx = dae.n_x, ny = dae.n_y, nu = dae.n_u;
  const Eigen::Index np = X.cols();
  LdScalar t_ld = LdScalar::constant(t, np);
  LdVector x_ld, y_ld, u_ld;
  x_ld.reserve(nx);
  y_ld.reserve(ny);
  u_ld.reserve(nu);
  for (Eigen::Index j = 0; j < nx; ++j) x_ld.emplace_back(x(j), X.row(j));
  for (Eigen::Index j = 0; j < ny; ++j) y_ld.emplace_back(y(j), Y.row(j));
  for (Eigen::Index j = 0; j < nu; ++j) u_ld.emplace_back(u(j), seed_u.row(j));

  if (rec) rec->clear();
  LdVector h_ld, g_ld;
  dae.ld_rhs_h(t_ld, u_ld, x_ld, y_ld, h_ld, rec);
  SeededEval out;
  out.H.resize(nx, np);
  for (Eigen::Index r = 0; r < nx; ++r) out.H.row(r) = h_ld[r].der;
  out.G.resize(ny, np);
  if (ny > 0) {
    dae.ld_alg_g(t_ld, x_ld, y_ld, g_ld, rec);
    for (Eigen::Index r = 0; r < ny; ++r) out.G.row(r) = g_ld[r].der;
  }
  return out;
}

inline void check_pivots(const Eigen::MatrixXd& dg_dy, double floor, double t) {
  if (dg_dy.rows() == 0) return;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(dg_dy);
  const auto diag = lu.matrixLU().diagonal();
  for (Eigen::Index i = 0; i < diag.size(); ++i) {
    if (std::abs(diag(i)) < floor) {
      throw RegularityError("regularity: |dg/dy| pivot " + std::to_string(std::abs(diag(i))) +
                                " below floor at t=" + std::to_string(t),
                            t);
    }
  }
}

// Finite-difference Jacobian of dg/dy, used when sensitivities are off.
inline Eigen::MatrixXd fd_alg_jacobian(const SemiExplicitDae& dae, double t,
                                       const Eigen::VectorXd& x,
                                       const Eigen::VectorXd& y,
                                       const Eigen::VectorXd& g0) {
  const Eigen::Index ny = dae.n_y;
  Eigen::MatrixXd J(ny, ny);
  Eigen::VectorXd yp = y, gp(ny);
  for (Eigen::Index j = 0; j < ny; ++j) {
    const double eps = 1e-7 * std::max(1.0, std::abs(y(j)));
    yp(j) = y(j) + eps;
    eval_alg(dae, t, x, yp, gp);
    J.col(j) = (gp - g0) / eps;
    yp(j) = y(j);
  }
  return J;
}

struct NewtonResult {
  Eigen::VectorXd x, y, h, g;
  int iters = 0;
};

// Solve the coupled trapezoidal residual
//   x+ - x - dt/2 (h_left + h(t+, u, x+, y+)) = 0
//   g(t+, x+, y+) = 0
// by full Newton with a finite-difference Jacobian built once (rebuilt once
// more if the first sweep stalls). One polish iteration after convergence
// keeps the map p -> trajectory smooth at the level of FD gradient checks.
inline NewtonResult newton_step(const SemiExplicitDae& dae, const IntegratorConfig& cfg,
                                double t_old, const Eigen::VectorXd& x_old,
                                const Eigen::VectorXd& y_old, const Eigen::VectorXd& h_left,
                                const Eigen::VectorXd& u, double t_new, double dt) {
  const Eigen::Index nx = dae.n_x, ny = dae.n_y, n = nx + ny;
  (void)t_old;

  Eigen::VectorXd z(n);
  z.head(nx) = x_old;
  z.tail(ny) = y_old;

  Eigen::VectorXd h(nx), g(ny), r(n);
  auto residual = [&](const Eigen::VectorXd& zz, Eigen::VectorXd& rr) {
    const Eigen::VectorXd xx = zz.head(nx);
    const Eigen::VectorXd yy = zz.tail(ny);
    eval_rhs(dae, t_new, u, xx, yy, h);
    eval_alg(dae, t_new, xx, yy, g);
    rr.resize(n);
    rr.head(nx) = xx - x_old - 0.5 * dt * (h_left + h);
    rr.tail(ny) = g;
  };

  residual(z, r);
  double rnorm = r.size() ? r.lpNorm<Eigen::Infinity>() : 0.0;

  Eigen::PartialPivLU<Eigen::MatrixXd> lu;
  auto build_jacobian = [&]() {
    Eigen::MatrixXd J(n, n);
    Eigen::VectorXd zp = z, rp(n);
    for (Eigen::Index j = 0; j < n; ++j) {
      const double eps = 1e-7 * std::max(1.0, std::abs(z(j)));
      zp(j) = z(j) + eps;
      residual(zp, rp);
      J.col(j) = (rp - r) / eps;
      zp(j) = z(j);
    }
    lu.compute(J);
  };

  int iters = 0;
  int rebuilds = 0;
  if (rnorm >= cfg.newton_tol) {
    build_jacobian();
    while (true) {
      z -= lu.solve(r);
      ++iters;
      residual(z, r);
      rnorm = r.lpNorm<Eigen::Infinity>();
      if (rnorm < cfg.newton_tol) break;
      if (iters >= cfg.newton_max_iter * (rebuilds + 1)) {
        if (rebuilds >= 1) {
          throw IntegrationError("newton corrector stalled at t=" + std::to_string(t_new) +
                                     " (residual " + std::to_string(rnorm) + ")",
                                 t_new);
        }
        ++rebuilds;
        build_jacobian();
      }
    }
    if (rnorm > 1e-14) {  // polish
      Eigen::VectorXd z_keep = z, r_keep = r;
      z -= lu.solve(r);
      residual(z, r);
      if (r.lpNorm<Eigen::Infinity>() > rnorm) {
        z = z_keep;
        residual(z, r);
      }
    }
  }

  NewtonResult out;
  out.x = z.head(nx);
  out.y = z.tail(ny);
  out.h = h;
  out.g = g;
  out.iters = iters;
  return out;
}

}  // namespace detail

// Solve the algebraic conditions at (t0, x0) for consistent (y0, Y0). The
// sensitivity condition is the linear system C_y Y0 = -C_x X0 with the
// selection-frozen Jacobians probed at the solution; for smooth g and zero X0
// this forces Y0 = 0.
inline AugmentedDaeState consistent_init(const SemiExplicitDae& dae,
                                         const IntegratorConfig& cfg, double t0,
                                         const Eigen::VectorXd& x0,
                                         const Eigen::VectorXd& y_guess,
                                         const Eigen::MatrixXd& X0) {
  const Eigen::Index ny = dae.n_y;
  AugmentedDaeState s;
  s.t = t0;
  s.x = x0;
  s.X = X0;
  s.y = y_guess;
  s.Y.resize(ny, X0.cols());

  if (ny > 0) {
    Eigen::VectorXd g(ny);
    detail::eval_alg(dae, t0, x0, s.y, g);
    double rnorm = g.lpNorm<Eigen::Infinity>();
    int iters = 0;
    while (rnorm >= cfg.newton_tol) {
      if (iters++ >= cfg.newton_max_iter) {
        throw InitError("consistent_init: newton failed, |g| = " + std::to_string(rnorm));
      }
      Eigen::MatrixXd J = detail::fd_alg_jacobian(dae, t0, x0, s.y, g);
      detail::check_pivots(J, cfg.regularity_floor, t0);
      s.y -= J.lu().solve(g);
      detail::eval_alg(dae, t0, x0, s.y, g);
      rnorm = g.lpNorm<Eigen::Infinity>();
    }
    // Regularity must hold at the solution even when the guess was exact.
    detail::check_pivots(detail::fd_alg_jacobian(dae, t0, x0, s.y, g),
                         cfg.regularity_floor, t0);

    if (cfg.propagate_sensitivities && X0.cols() > 0) {
      const auto pj = detail::probe_jacobians(dae, t0,
                                              Eigen::VectorXd::Zero(dae.n_u), x0, s.y);
      detail::check_pivots(pj.C_y, cfg.regularity_floor, t0);
      s.Y = pj.C_y.lu().solve(Eigen::MatrixXd(-pj.C_x * X0));
    } else {
      s.Y.setZero();
    }
  }
  return s;
}

inline AugmentedDaeState consistent_init(const SemiExplicitDae& dae,
                                         const IntegratorConfig& cfg, double t0,
                                         const Eigen::VectorXd& x0,
                                         const Eigen::VectorXd& y_guess,
                                         Eigen::Index n_p = 0) {
  return consistent_init(dae, cfg, t0, x0, y_guess,
                         Eigen::MatrixXd::Zero(dae.n_x, n_p));
}

namespace detail {

// Carries left-endpoint quantities between chained steps so each step costs
// one Newton solve, one probing LD evaluation and one seeded LD evaluation.
struct StepContext {
  Eigen::VectorXd h_left;
  Eigen::MatrixXd H_left;
  std::vector<std::int8_t> signature;
  bool has_left = false;
  bool has_signature = false;
  double sens_alg_residual = 0.0;
  std::vector<SwitchEvent>* events = nullptr;
};

inline AugmentedDaeState step_impl(const SemiExplicitDae& dae, const IntegratorConfig& cfg,
                                   const AugmentedDaeState& state, const Eigen::VectorXd& u,
                                   const Eigen::MatrixXd& seed_u, double dt, double t_new,
                                   StepContext& ctx, long* newton_iters,
                                   BranchRecorder* rec) {
  const bool sens = cfg.propagate_sensitivities && state.X.cols() > 0;

  if (!ctx.has_left) {
    eval_rhs(dae, state.t, u, state.x, state.y, ctx.h_left);
    if (sens) {
      auto se = seeded_eval(dae, state.t, u, state.x, state.y, state.X, state.Y,
                            seed_u, rec);
      ctx.H_left = std::move(se.H);
      if (rec) {
        ctx.signature = rec->codes();
        ctx.has_signature = true;
      }
    }
    ctx.has_left = true;
  }

  auto nr = newton_step(dae, cfg, state.t, state.x, state.y, ctx.h_left, u, t_new, dt);
  if (newton_iters) *newton_iters += nr.iters;

  AugmentedDaeState next;
  next.t = t_new;
  next.x = std::move(nr.x);
  next.y = std::move(nr.y);
  next.X.resize(state.X.rows(), state.X.cols());
  next.Y.resize(state.Y.rows(), state.Y.cols());

  if (sens) {
    const Eigen::Index nx = dae.n_x, ny = dae.n_y, n = nx + ny;
    const Eigen::Index np = state.X.cols();

    const auto pj = probe_jacobians(dae, t_new, u, next.x, next.y);
    check_pivots(pj.C_y, cfg.regularity_floor, t_new);

    Eigen::MatrixXd K(n, n);
    K.topLeftCorner(nx, nx) =
        Eigen::MatrixXd::Identity(nx, nx) - 0.5 * dt * pj.A_x;
    K.topRightCorner(nx, ny) = -0.5 * dt * pj.A_y;
    K.bottomLeftCorner(ny, nx) = pj.C_x;
    K.bottomRightCorner(ny, ny) = pj.C_y;

    Eigen::MatrixXd rhs(n, np);
    rhs.topRows(nx) = state.X + 0.5 * dt * (ctx.H_left + pj.B_u * seed_u);
    rhs.bottomRows(ny).setZero();

    Eigen::MatrixXd Z = K.lu().solve(rhs);
    next.X = Z.topRows(nx);
    next.Y = Z.bottomRows(ny);

    auto se = seeded_eval(dae, t_new, u, next.x, next.y, next.X, next.Y, seed_u, rec);
    ctx.h_left = std::move(nr.h);
    ctx.H_left = std::move(se.H);
    ctx.sens_alg_residual =
        se.G.size() ? se.G.array().abs().maxCoeff() : 0.0;
    if (rec) {
      const auto& codes = rec->codes();
      if (ctx.has_signature && ctx.events) {
        const size_t nsites = std::min(codes.size(), ctx.signature.size());
        for (size_t sidx = 0; sidx < nsites; ++sidx) {
          if (codes[sidx] != ctx.signature[sidx]) {
            ctx.events->push_back(SwitchEvent{t_new, int(sidx), codes[sidx]});
          }
        }
      }
      ctx.signature = codes;
      ctx.has_signature = true;
    }
  } else {
    if (dae.n_y > 0) {
      // regularity monitoring without the LD machinery
      check_pivots(fd_alg_jacobian(dae, t_new, next.x, next.y, nr.g),
                   cfg.regularity_floor, t_new);
    }
    ctx.h_left = std::move(nr.h);
  }

  return next;
}

}  // namespace detail

// One implicit trapezoidal step from `state` with control value `u` held
// fixed and `seed_u` as the control's direction rows (n_u x n_p).
inline AugmentedDaeState step(const SemiExplicitDae& dae, const IntegratorConfig& cfg,
                              const AugmentedDaeState& state, const Eigen::VectorXd& u,
                              const Eigen::MatrixXd& seed_u, double dt) {
  if (!(dt > 0.0)) throw RangeError("step: dt must be positive");
  detail::StepContext ctx;
  BranchRecorder rec;
  return detail::step_impl(dae, cfg, state, u, seed_u, dt, state.t + dt, ctx,
                           nullptr, &rec);
}

// Integrate over the control grid's horizon from a consistent initial state.
// Within subinterval i the control direction seed is the i-th unit block.
inline TrajectoryRecord integrate(const SemiExplicitDae& dae, const IntegratorConfig& cfg,
                                  const ControlGrid& grid, const AugmentedDaeState& init) {
  const Eigen::Index n_s = grid.n_s, n_u = grid.n_u;
  const Eigen::Index np = init.X.cols();
  const int m = cfg.steps_per_interval;
  if (m < 1) throw RangeError("integrate: steps_per_interval must be >= 1");
  if (grid.n_u != dae.n_u) throw DimensionError("integrate: grid n_u != dae n_u");
  const bool sens = cfg.propagate_sensitivities && np > 0;

  TrajectoryRecord rec;
  rec.switches.clear();
  AugmentedDaeState state = init;

  BranchRecorder branch_rec;
  detail::StepContext ctx;
  ctx.events = &rec.switches;

  auto record_sample = [&](const AugmentedDaeState& s, const Eigen::VectorXd& u,
                           bool at_breakpoint) {
    rec.t.push_back(s.t);
    rec.x.push_back(s.x);
    rec.y.push_back(s.y);
    rec.u.push_back(u);
    if (sens) {
      const bool want = cfg.sensitivity_record == SensitivityRecord::EveryStep ||
                        (cfg.sensitivity_record == SensitivityRecord::Breakpoints &&
                         at_breakpoint);
      if (want) {
        rec.sens_t.push_back(s.t);
        rec.X.push_back(s.X);
        rec.Y.push_back(s.Y);
      }
    }
  };

  {
    Eigen::VectorXd g0(dae.n_y);
    detail::eval_alg(dae, init.t, init.x, init.y, g0);
    if (dae.n_y > 0) {
      const double gnorm = g0.lpNorm<Eigen::Infinity>();
      if (gnorm > 10.0 * cfg.newton_tol) {
        throw InitError("integrate: initial state is not consistent, |g| = " +
                        std::to_string(gnorm));
      }
      rec.max_alg_residual = gnorm;
    }
  }

  record_sample(state, grid.values.row(0).transpose(), true);

  const double dt_total = grid.tf - grid.t0;
  const long total_steps = long(n_s) * long(m);

  for (Eigen::Index i = 0; i < n_s; ++i) {
    const Eigen::VectorXd u = grid.values.row(i).transpose();
    Eigen::MatrixXd seed_u = Eigen::MatrixXd::Zero(n_u, np);
    if (sens) {
      seed_u.block(0, i * n_u, n_u, n_u) =
          Eigen::MatrixXd::Identity(n_u, n_u);
    }
    // the RHS jumps at breakpoints: refresh the left-endpoint quantities
    ctx.has_left = false;

    for (int j = 1; j <= m; ++j) {
      const long gstep = long(i) * m + j;
      const double t_new = (gstep == total_steps)
                               ? grid.tf
                               : grid.t0 + dt_total * double(gstep) / double(total_steps);
      const double dt = t_new - state.t;
      if (!(dt > 0.0)) {
        if (dt_total == 0.0) break;  // zero-length horizon
        throw RangeError("integrate: nonpositive step size");
      }
      state = detail::step_impl(dae, cfg, state, u, seed_u, dt, t_new, ctx,
                                &rec.total_newton_iters,
                                sens ? &branch_rec : nullptr);
      Eigen::VectorXd g_now(dae.n_y);
      detail::eval_alg(dae, state.t, state.x, state.y, g_now);
      if (dae.n_y > 0) {
        rec.max_alg_residual =
            std::max(rec.max_alg_residual, g_now.lpNorm<Eigen::Infinity>());
      }
      rec.max_sens_alg_residual =
          std::max(rec.max_sens_alg_residual, ctx.sens_alg_residual);
      record_sample(state, u, j == m);
    }
  }

  if (sens && cfg.sensitivity_record == SensitivityRecord::FinalOnly) {
    rec.sens_t.push_back(state.t);
    rec.X.push_back(state.X);
    rec.Y.push_back(state.Y);
  }
  rec.final_state = state;
  return rec;
}

// Trajectory dump: header row `t,x1..x{n_x},y1..y{n_y}` at accepted steps.
inline void write_trajectory_csv(const TrajectoryRecord& rec, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open " + path + " for writing");
  const Eigen::Index nx = rec.x.empty() ? 0 : rec.x.front().size();
  const Eigen::Index ny = rec.y.empty() ? 0 : rec.y.front().size();
  out << "t";
  for (Eigen::Index j = 0; j < nx; ++j) out << ",x" << (j + 1);
  for (Eigen::Index j = 0; j < ny; ++j) out << ",y" << (j + 1);
  out << "\n";
  for (size_t s = 0; s < rec.t.size(); ++s) {
    out << io::fmt(rec.t[s]);
    for (Eigen::Index j = 0; j < nx; ++j) out << "," << io::fmt(rec.x[s](j));
    for (Eigen::Index j = 0; j < ny; ++j) out << "," << io::fmt(rec.y[s](j));
    out << "\n";
  }
}

}  // namespace nsoc

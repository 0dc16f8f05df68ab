#pragma once

// Quasi-Newton minimization driven by generalized-gradient elements: damped
// inverse-BFGS on an augmented-Lagrangian merit for terminal equality
// constraints, gradient projection for box bounds, Armijo backtracking line
// search. The Hessian model never assumes smoothness; at kinks the curvature
// skip rule keeps the inverse approximation positive definite.

#include <cmath>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nsoc/errors.hpp"
#include "nsoc/io.hpp"

namespace nsoc {

struct LineSearchError : Error {
  using Error::Error;
};

struct NlpEval {
  double phi = 0.0;
  Eigen::VectorXd grad;  // generalized gradient element (empty if !need_grad)
  Eigen::VectorXd c;     // equality constraint values (c = 0 wanted)
  Eigen::MatrixXd J;     // constraint Jacobian rows (empty if !need_grad)
};

struct NlpSpec {
  Eigen::Index n = 0;
  std::function<NlpEval(const Eigen::VectorXd& p, bool need_grad)> eval;
  Eigen::VectorXd lower, upper;  // length n
  Eigen::Index n_eq = 0;
  double grad_tol = 1e-6;
  double step_tol = 1e-10;
  double constraint_tol = 1e-6;
  int max_iter = 500;
  double penalty_init = 10.0;
  std::string iter_log_path;  // optional CSV
};

enum class NlpStatus { Converged, MaxIter, LineSearchFailure, EvaluationError };

inline const char* to_string(NlpStatus s) {
  switch (s) {
    case NlpStatus::Converged: return "converged";
    case NlpStatus::MaxIter: return "max_iter";
    case NlpStatus::LineSearchFailure: return "line_search_failure";
    case NlpStatus::EvaluationError: return "evaluation_error";
  }
  return "unknown";
}

struct NlpIterRow {
  int iter = 0;
  int outer = 0;
  double phi = 0.0;
  double merit = 0.0;
  double step = 0.0;
  double grad_norm = 0.0;
  double constraint_violation = 0.0;
};

struct NlpResult {
  Eigen::VectorXd p_star;
  double phi_star = 0.0;
  double grad_norm_final = 0.0;
  double constraint_violation_final = 0.0;
  int iterations = 0;
  NlpStatus status = NlpStatus::MaxIter;
  std::vector<NlpIterRow> iterate_history;
  std::string message;
  Eigen::VectorXd failing_p;  // set on evaluation_error
};

// Inverse BFGS update with a curvature skip: H is left unchanged when
// s'y <= 1e-10 |s||y|, which absorbs generalized-gradient jumps at kinks.
inline void bfgs_update(Eigen::MatrixXd& H_inv, const Eigen::VectorXd& s,
                        const Eigen::VectorXd& y_diff) {
  const double sy = s.dot(y_diff);
  if (sy <= 1e-10 * s.norm() * y_diff.norm()) return;
  const double rho = 1.0 / sy;
  const Eigen::Index n = H_inv.rows();
  Eigen::MatrixXd V = Eigen::MatrixXd::Identity(n, n) - rho * s * y_diff.transpose();
  H_inv = V * H_inv * V.transpose();
  H_inv.noalias() += rho * s * s.transpose();
}

// Armijo backtracking: largest step in {1, 1/2, ..., 2^-20} with sufficient
// decrease (c1 = 1e-4). The supplied directional derivative must be negative.
inline double line_search(const std::function<double(const Eigen::VectorXd&)>& merit,
                          const Eigen::VectorXd& p, const Eigen::VectorXd& direction,
                          double dir_deriv) {
  if (!(dir_deriv < 0.0)) {
    throw LineSearchError("line_search: direction is not a descent direction "
                          "(directional derivative " + std::to_string(dir_deriv) + ")");
  }
  const double c1 = 1e-4;
  const double m0 = merit(p);
  double gamma = 1.0;
  for (int k = 0; k <= 20; ++k, gamma *= 0.5) {
    if (merit(p + gamma * direction) <= m0 + c1 * gamma * dir_deriv) return gamma;
  }
  throw LineSearchError("line_search: no Armijo step down to 2^-20");
}

namespace detail {

inline Eigen::VectorXd clamp_to_bounds(const Eigen::VectorXd& p, const NlpSpec& spec) {
  return p.cwiseMax(spec.lower).cwiseMin(spec.upper);
}

inline double projected_grad_norm(const Eigen::VectorXd& p, const Eigen::VectorXd& g,
                                  const NlpSpec& spec) {
  return (p - clamp_to_bounds(p - g, spec)).lpNorm<Eigen::Infinity>();
}

inline void write_iter_log(const NlpSpec& spec, const std::vector<NlpIterRow>& rows) {
  if (spec.iter_log_path.empty()) return;
  std::ofstream out(spec.iter_log_path);
  if (!out) return;
  out << "iter,phi,merit,step,grad_norm,constraint_violation\n";
  for (const auto& r : rows) {
    out << r.iter << "," << io::fmt(r.phi) << "," << io::fmt(r.merit) << ","
        << io::fmt(r.step) << "," << io::fmt(r.grad_norm) << ","
        << io::fmt(r.constraint_violation) << "\n";
  }
}

}  // namespace detail

inline NlpResult minimize(const NlpSpec& spec, const Eigen::VectorXd& p0) {
  if (p0.size() != spec.n) throw DimensionError("minimize: p0 has wrong length");
  for (Eigen::Index j = 0; j < spec.n; ++j) {
    if (p0(j) < spec.lower(j) || p0(j) > spec.upper(j)) {
      throw RangeError("minimize: p0(" + std::to_string(j) + ") violates bounds");
    }
  }

  NlpResult res;
  Eigen::VectorXd p = p0;
  Eigen::VectorXd lambda = Eigen::VectorXd::Zero(spec.n_eq);
  double rho = spec.n_eq > 0 ? spec.penalty_init : 0.0;

  NlpEval cur;
  auto safe_eval = [&](const Eigen::VectorXd& pp, bool need_grad, NlpEval& out) {
    try {
      out = spec.eval(pp, need_grad);
      return true;
    } catch (const std::exception& e) {
      res.status = NlpStatus::EvaluationError;
      res.message = e.what();
      res.failing_p = pp;
      return false;
    }
  };

  auto merit_of = [&](const NlpEval& ev) {
    double m = ev.phi;
    if (spec.n_eq > 0) m += lambda.dot(ev.c) + 0.5 * rho * ev.c.squaredNorm();
    return m;
  };
  auto al_grad = [&](const NlpEval& ev) {
    Eigen::VectorXd g = ev.grad;
    if (spec.n_eq > 0) g.noalias() += ev.J.transpose() * (lambda + rho * ev.c);
    return g;
  };
  auto viol_of = [&](const NlpEval& ev) {
    return spec.n_eq > 0 ? ev.c.lpNorm<Eigen::Infinity>() : 0.0;
  };

  auto finalize = [&](const NlpEval& ev, const Eigen::VectorXd& g) {
    res.p_star = p;
    res.phi_star = ev.phi;
    res.grad_norm_final = detail::projected_grad_norm(p, g, spec);
    res.constraint_violation_final = viol_of(ev);
    detail::write_iter_log(spec, res.iterate_history);
  };

  if (!safe_eval(p, true, cur)) {
    res.p_star = p;
    detail::write_iter_log(spec, res.iterate_history);
    return res;
  }

  const int outer_max = spec.n_eq > 0 ? 15 : 1;
  int global_iter = 0;
  bool done = false;
  double prev_outer_viol = std::numeric_limits<double>::infinity();

  for (int outer = 0; outer < outer_max && !done; ++outer) {
    Eigen::MatrixXd H = Eigen::MatrixXd::Identity(spec.n, spec.n);
    bool first_update = true;
    int stagnate = 0;

    while (true) {
      Eigen::VectorXd g = al_grad(cur);
      const double pg = detail::projected_grad_norm(p, g, spec);
      const double viol = viol_of(cur);

      if (pg < spec.grad_tol) {
        if (viol < spec.constraint_tol) {
          res.status = NlpStatus::Converged;
          finalize(cur, g);
          return res;
        }
        break;  // stationary for this multiplier estimate; update lambda
      }
      if (global_iter >= spec.max_iter) {
        res.status = NlpStatus::MaxIter;
        finalize(cur, g);
        return res;
      }

      Eigen::VectorXd d = -(H * g);
      bool used_steepest = false;
      if (!(d.dot(g) < 0.0)) {
        H.setIdentity();
        d = -g;
        used_steepest = true;
      }

      const double merit0 = merit_of(cur);
      auto armijo_at = [&](const Eigen::VectorXd& dir, double gamma,
                           Eigen::VectorXd& p_out, NlpEval& ev_out,
                           bool& eval_failed) {
        Eigen::VectorXd pt = detail::clamp_to_bounds(p + gamma * dir, spec);
        const double pred = g.dot(pt - p);
        if (!(pred < 0.0)) return false;  // projection removed all descent
        NlpEval ev;
        if (!safe_eval(pt, false, ev)) {
          eval_failed = true;
          return false;
        }
        if (merit_of(ev) > merit0 + 1e-4 * pred) return false;
        p_out = pt;
        ev_out = ev;
        return true;
      };
      auto try_backtrack = [&](const Eigen::VectorXd& dir, double& gamma_out,
                               Eigen::VectorXd& p_out, NlpEval& ev_out,
                               bool& eval_failed) {
        eval_failed = false;
        double gamma = 1.0;
        for (int k = 0; k <= 20 && !eval_failed; ++k, gamma *= 0.5) {
          if (armijo_at(dir, gamma, p_out, ev_out, eval_failed)) {
            gamma_out = gamma;
            // When the unit step already satisfies Armijo the quasi-Newton
            // model has underestimated the step scale (typical while
            // curvature skips leave H at identity on concave stretches):
            // expand geometrically while sufficient decrease keeps holding.
            if (k == 0) {
              Eigen::VectorXd p_try;
              NlpEval ev_try;
              double best = merit_of(ev_out);
              for (double ge = 2.0; ge <= 4096.0 && !eval_failed; ge *= 2.0) {
                if (!armijo_at(dir, ge, p_try, ev_try, eval_failed)) break;
                const double m_try = merit_of(ev_try);
                if (!(m_try < best)) break;  // past the 1-D minimizer
                best = m_try;
                gamma_out = ge;
                p_out = p_try;
                ev_out = ev_try;
              }
              if (eval_failed) return false;
            }
            return true;
          }
        }
        return false;
      };

      double gamma = 0.0;
      Eigen::VectorXd p_new;
      NlpEval ev_val;
      bool eval_failed = false;
      bool ok = try_backtrack(d, gamma, p_new, ev_val, eval_failed);
      if (!ok && !eval_failed && !used_steepest) {
        H.setIdentity();
        first_update = true;
        ok = try_backtrack(Eigen::VectorXd(-g), gamma, p_new, ev_val, eval_failed);
      }
      if (eval_failed) {
        res.p_star = p;
        detail::write_iter_log(spec, res.iterate_history);
        return res;
      }
      if (!ok) {
        if (viol < spec.constraint_tol && (stagnate >= 1 || pg < 10.0 * spec.grad_tol)) {
          res.status = NlpStatus::Converged;
          finalize(cur, g);
          return res;
        }
        res.status = NlpStatus::LineSearchFailure;
        res.message = "no Armijo step at iter " + std::to_string(global_iter) +
                      " (projected grad " + std::to_string(pg) + ", merit " +
                      std::to_string(merit0) + ")";
        finalize(cur, g);
        return res;
      }

      const Eigen::VectorXd s = p_new - p;
      const double step_len = s.norm();
      p = p_new;
      NlpEval next;
      if (!safe_eval(p, true, next)) {
        res.p_star = p;
        detail::write_iter_log(spec, res.iterate_history);
        return res;
      }
      Eigen::VectorXd g_new = al_grad(next);
      Eigen::VectorXd y = g_new - g;
      if (first_update) {
        const double sy = s.dot(y);
        const double yy = y.squaredNorm();
        if (sy > 0.0 && yy > 0.0) H *= sy / yy;  // Shanno-Phua scaling
        first_update = false;
      }
      bfgs_update(H, s, y);
      cur = next;
      ++global_iter;

      const double merit_new = merit_of(cur);
      res.iterate_history.push_back(NlpIterRow{
          global_iter, outer, cur.phi, merit_new, step_len,
          detail::projected_grad_norm(p, g_new, spec), viol_of(cur)});
      res.iterations = global_iter;

      if (std::fabs(merit_new - merit0) <= 1e-12 * std::max(1.0, std::fabs(merit0))) {
        ++stagnate;
      } else {
        stagnate = 0;
      }
      const bool tiny_step = step_len < spec.step_tol;
      if (tiny_step || stagnate >= 5) {
        if (viol_of(cur) < spec.constraint_tol) {
          res.status = NlpStatus::Converged;
          finalize(cur, g_new);
          return res;
        }
        break;  // constraints still violated: tighten the outer problem
      }
    }

    // outer (multiplier / penalty) update
    const double viol = viol_of(cur);
    if (spec.n_eq > 0) {
      lambda += rho * cur.c;
      if (viol > 0.5 * prev_outer_viol && rho < 1e8) rho *= 10.0;
      prev_outer_viol = viol;
    }
  }

  res.status = NlpStatus::MaxIter;
  res.message = "outer loop budget exhausted";
  finalize(cur, al_grad(cur));
  return res;
}

}  // namespace nsoc

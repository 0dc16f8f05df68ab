#pragma once

// Full wind-turbine power system model: two-mass drivetrain, power and
// reactive-voltage control loops, infinite-bus terminal voltage (algebraic),
// Cp-polynomial aerodynamics, nonsmooth reference-speed and rated-power
// unification, wind profiles, steady-state initialization and the smoothed
// (log-sum-exp) objective variant. The right-hand side is written once,
// templated over the scalar type, so the LdScalar instantiation reproduces
// the sensitivity equations through the sharp calculus rules with values
// bitwise-identical to the plain double path.

#include <array>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "nsoc/dae.hpp"
#include "nsoc/errors.hpp"
#include "nsoc/io.hpp"
#include "nsoc/ld.hpp"
#include "nsoc/ocp.hpp"

namespace nsoc {

// Per-unit / SI parameter set. Defaults are the representative values the
// model is normally run with.
struct WtpsParams {
  double w0 = 1.0;
  double X_eq = 0.8;
  double D_tg = 1.5;
  double K_tg = 1.11;
  double w_base = 125.66;
  double half_rho_Ar = 0.00159;
  double K_b = 56.6;
  double H = 4.94;
  double H_g = 0.62;
  double K_itrq = 0.6;
  double T_pc = 0.05;
  double K_ptrq = 3.0;
  double T_pwr = 0.05;
  double K_Qi = 0.1;
  double P_stl = 1.0;
  double w_ref_star = 1.2;
  double K_vi = 40.0;
  double R = 0.02;
  double E = 1.0164;
  double X_l = 0.0243;
  double X_tr = 0.00557;
  double pfe = 0.0;  // power-factor angle (rad); 0 keeps Q_cmd = 0

  double pitch_lower = 0.0;   // deg
  double pitch_upper = 30.0;  // deg

  double reactance() const { return X_l + X_tr; }
};

// Power-coefficient polynomial Cp(theta, lambda) = sum alpha_ij theta^i lambda^j.
struct CpPoly {
  std::array<std::array<double, 5>, 5> alpha{};  // alpha[i][j]

  static CpPoly reference() {
    CpPoly c;
    c.alpha[4] = {1.4787e-5, -9.4839e-6, 1.6167e-6, -7.1535e-8, 4.9686e-10};
    c.alpha[3] = {-8.6018e-4, 5.7051e-4, -1.0479e-4, 5.9924e-6, -8.9194e-8};
    c.alpha[2] = {1.5727e-2, -1.0996e-2, 2.1495e-3, -1.4855e-4, 2.7937e-6};
    c.alpha[1] = {-6.7606e-2, 6.0405e-2, -1.3934e-2, 1.0683e-3, -2.3895e-5};
    c.alpha[0] = {-4.1909e-1, 2.1808e-1, -1.2406e-2, -1.3365e-4, 1.1524e-5};
    return c;
  }

  template <class T>
  T row_eval(int i, const T& lambda) const {
    T r = lambda * alpha[size_t(i)][4] + alpha[size_t(i)][3];
    for (int j = 2; j >= 0; --j) r = r * lambda + alpha[size_t(i)][j];
    return r;
  }

  template <class T>
  T eval(const T& theta, const T& lambda) const {
    T acc = row_eval(4, lambda);
    for (int i = 3; i >= 0; --i) acc = acc * theta + row_eval(i, lambda);
    return acc;
  }
};

// ---- wind profiles ---------------------------------------------------------

struct RampWind {
  double v0 = 10.0;
  double slope = 1.0;
  double t_on = 19.0;
  double t_off = 21.0;
};

struct GaussianWind {
  double v0 = 10.0;
  double mu = 20.0;
  double sigma = 0.5;
};

struct SampledWind {
  std::vector<double> t;
  std::vector<double> v;

  static SampledWind load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("wind data: cannot open " + path);
    SampledWind w;
    std::string line;
    bool first = true;
    size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      std::istringstream ss(line);
      std::string a, b;
      if (!std::getline(ss, a, ',') || !std::getline(ss, b)) {
        throw DataError("wind data: malformed line " + std::to_string(lineno));
      }
      char* end = nullptr;
      const double tv = std::strtod(a.c_str(), &end);
      if (first && end == a.c_str()) {
        first = false;  // header row
        continue;
      }
      const double vv = std::strtod(b.c_str(), &end);
      if (!std::isfinite(tv) || !std::isfinite(vv)) {
        throw DataError("wind data: non-finite entry at line " + std::to_string(lineno));
      }
      if (!w.t.empty() && tv <= w.t.back()) {
        throw DataError("wind data: time column must be strictly increasing (line " +
                        std::to_string(lineno) + ")");
      }
      w.t.push_back(tv);
      w.v.push_back(vv);
      first = false;
    }
    if (w.t.size() < 2) throw DataError("wind data: need at least two samples");
    return w;
  }

  void save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw DataError("wind data: cannot open " + path + " for writing");
    out << "t_seconds,v_mps\n";
    for (size_t i = 0; i < t.size(); ++i) {
      out << io::fmt(t[i]) << "," << io::fmt(v[i]) << "\n";
    }
  }

  double span_begin() const { return t.front(); }
  double span_end() const { return t.back(); }
};

using WindProfile = std::variant<RampWind, GaussianWind, SampledWind>;

template <class T>
T wind_eval(const WindProfile& profile, const T& t, Select<T>& sel) {
  using std::exp;
  using std::sqrt;
  if (const auto* r = std::get_if<RampWind>(&profile)) {
    return r->v0 + r->slope * (sel.max(t - r->t_on, 0.0) - sel.max(t - r->t_off, 0.0));
  }
  if (const auto* g = std::get_if<GaussianWind>(&profile)) {
    const T z = (t - g->mu) * (1.0 / g->sigma);
    return g->v0 + exp(-0.5 * z * z) * (1.0 / (g->sigma * std::sqrt(2.0 * M_PI)));
  }
  const auto& s = std::get<SampledWind>(profile);
  const double tv = value_of(t);
  if (tv < s.span_begin() || tv > s.span_end()) {
    throw RangeError("sampled wind: query time " + std::to_string(tv) +
                     " outside table span");
  }
  auto it = std::upper_bound(s.t.begin(), s.t.end(), tv);
  size_t hi = size_t(it - s.t.begin());
  if (hi == 0) hi = 1;
  if (hi >= s.t.size()) hi = s.t.size() - 1;
  const size_t lo = hi - 1;
  const double slope = (s.v[hi] - s.v[lo]) / (s.t[hi] - s.t[lo]);
  return s.v[lo] + (t - s.t[lo]) * slope;
}

inline double wind_eval(const WindProfile& profile, double t) {
  Select<double> sel;
  return wind_eval<double>(profile, t, sel);
}

// ---- elemental model pieces -------------------------------------------------

template <class T>
T cp_eval(const CpPoly& cp, const T& theta, const T& lambda) {
  return cp.eval(theta, lambda);
}

// lambda = K_b (w_t + w0) / v_wind, P_mech = half_rho_Ar Cp(theta, lambda) v^3
template <class T>
T pmech(const WtpsParams& P, const CpPoly& cp, const T& theta, const T& w_t,
        const T& v_wind) {
  if (!(value_of(v_wind) > 0.0)) {
    throw ModelError("pmech: wind speed must be positive");
  }
  const T lambda = (w_t + P.w0) * P.K_b / v_wind;
  return cp.eval(theta, lambda) * P.half_rho_Ar * (v_wind * v_wind * v_wind);
}

// w_ref = min(-0.75 P_elec^2 + 1.59 P_elec + 0.63, w_ref_star)
template <class T>
T w_ref_eval(const WtpsParams& P, const T& p_elec, Select<T>& sel) {
  const T quad = p_elec * p_elec * -0.75 + p_elec * 1.59 + 0.63;
  return sel.min(quad, P.w_ref_star);
}

inline double w_ref_eval(const WtpsParams& P, double p_elec) {
  Select<double> sel;
  return w_ref_eval<double>(P, p_elec, sel);
}

// omega = min(P_stl, P_mech) - min(0, P_stl - P_mech) (P_stl - P_mech)
template <class T>
T omega(const WtpsParams& P, const T& p_mech, Select<T>& sel) {
  const T gap = P.P_stl - p_mech;
  return sel.min(p_mech, P.P_stl) - sel.min(gap, 0.0) * gap;
}

inline double omega(const WtpsParams& P, double p_mech) {
  Select<double> sel;
  return omega<double>(P, p_mech, sel);
}

namespace detail {

// Smooth two-term log-sum-exp minimum, shifted by the value-level minimum to
// stay overflow-safe. The shift is a plain double tare; the expression stays
// differentiable through exp/log.
template <class T>
T lse_min2(double a, const T& b, double N) {
  using std::exp;
  using std::log;
  const double m = a < value_of(b) ? a : value_of(b);
  return m - log(std::exp(-N * (a - m)) + exp(-N * (b - m))) * (1.0 / N);
}

}  // namespace detail

// Log-sum-exp smoothing of omega with parameter N (omega_hat -> omega as
// N -> infinity).
template <class T>
T omega_smoothed(const WtpsParams& P, const T& p_mech, double N) {
  if (!(N > 0.0)) throw RangeError("omega_smoothed: N must be positive");
  const T gap = P.P_stl - p_mech;
  return detail::lse_min2(P.P_stl, p_mech, N) - detail::lse_min2(0.0, gap, N) * gap;
}

inline double omega_smoothed(const WtpsParams& P, double p_mech, double N) {
  return omega_smoothed<double>(P, p_mech, N);
}

enum class ObjectiveKind { Nonsmooth, SmoothedLse };

// State layout of the differential vector x.
enum WtpsStateIndex : Eigen::Index {
  kWg = 0,
  kWt,
  kDthetaM,
  kF1,
  kPinp,
  kP1elec,
  kVref,
  kEqcmd,
  kEq,
  kIplv,
  kAux,
  kNx  // = 11
};

template <class T>
struct WtpsOutputs {
  std::array<T, kNx> h;
  T g;
  T p_elec, q_gen, w_ref, v_wind, p_mech, omega_value;
};

// Right-hand sides h1..h11 and the algebraic residual g, plus the
// intermediate quantities. Evaluation order of the nonsmooth selections is
// fixed: wind profile sites first (ramp max's), then w_ref, then the two
// omega selections.
template <class T>
WtpsOutputs<T> wtps_core(const WtpsParams& P, const CpPoly& cp, const WindProfile& wind,
                         ObjectiveKind kind, double smoothing_N, const T& t,
                         const T& theta, const std::array<T, kNx>& x, const T& V,
                         Select<T>& sel) {
  using std::tan;
  WtpsOutputs<T> o;

  const T& w_g = x[kWg];
  const T& w_t = x[kWt];
  const T& dtheta_m = x[kDthetaM];
  const T& f1 = x[kF1];
  const T& p_inp = x[kPinp];
  const T& p_1elec = x[kP1elec];
  const T& v_ref = x[kVref];
  const T& e_qcmd = x[kEqcmd];
  const T& e_q = x[kEq];
  const T& i_plv = x[kIplv];

  o.v_wind = wind_eval(wind, t, sel);
  o.p_elec = i_plv * V;
  o.q_gen = V * (e_q - V) / P.X_eq;
  const T q_cmd = std::tan(P.pfe) * p_1elec;
  o.w_ref = w_ref_eval(P, o.p_elec, sel);
  o.p_mech = pmech(P, cp, theta, w_t, o.v_wind);

  o.h[kWg] = (o.p_elec / (w_g + P.w0) * -1.0 - P.D_tg * (w_g - w_t) -
              P.K_tg * dtheta_m) *
             (1.0 / (2.0 * P.H_g));
  o.h[kWt] = (o.p_mech / (w_t + P.w0) + P.D_tg * (w_g - w_t) + P.K_tg * dtheta_m) *
             (1.0 / (2.0 * P.H));
  o.h[kDthetaM] = P.w_base * (w_g - w_t);
  o.h[kF1] = w_g + P.w0 - o.w_ref;
  o.h[kPinp] = ((w_g + P.w0) * (P.K_ptrq * (w_g + P.w0 - o.w_ref) + P.K_itrq * f1) -
                p_inp) *
               (1.0 / P.T_pc);
  o.h[kP1elec] = (o.p_elec - p_1elec) * (1.0 / P.T_pwr);
  o.h[kVref] = P.K_Qi * (q_cmd - o.q_gen);
  o.h[kEqcmd] = P.K_vi * (v_ref - V);
  o.h[kEq] = (e_qcmd - e_q) * (1.0 / 0.02);
  o.h[kIplv] = (p_inp / V - i_plv) * (1.0 / 0.02);

  o.omega_value = omega(P, o.p_mech, sel);
  o.h[kAux] = kind == ObjectiveKind::Nonsmooth
                  ? o.omega_value
                  : omega_smoothed(P, o.p_mech, smoothing_N);

  const double Xr = P.reactance();
  const T v2 = V * V;
  o.g = v2 * v2 - ((o.p_elec * P.R + o.q_gen * Xr) * 2.0 + P.E * P.E) * v2 +
        (o.p_elec * o.p_elec + o.q_gen * o.q_gen) * (P.R * P.R + Xr * Xr);
  return o;
}

// ---- DAE assembly -----------------------------------------------------------

inline SemiExplicitDae make_wtps_dae(const WtpsParams& params, const CpPoly& cp,
                                     const WindProfile& wind,
                                     ObjectiveKind kind = ObjectiveKind::Nonsmooth,
                                     double smoothing_N = 100.0) {
  SemiExplicitDae d;
  d.n_x = kNx;
  d.n_y = 1;
  d.n_u = 1;
  d.rhs_h = [params, cp, wind, kind, smoothing_N](
                double t, const Eigen::VectorXd& u, const Eigen::VectorXd& x,
                const Eigen::VectorXd& y, Eigen::VectorXd& h) {
    Select<double> sel;
    std::array<double, kNx> xs;
    for (Eigen::Index j = 0; j < kNx; ++j) xs[size_t(j)] = x(j);
    auto o = wtps_core<double>(params, cp, wind, kind, smoothing_N, t, u(0), xs, y(0), sel);
    for (Eigen::Index j = 0; j < kNx; ++j) h(j) = o.h[size_t(j)];
  };
  d.alg_g = [params, cp, wind, kind, smoothing_N](
                double t, const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                Eigen::VectorXd& g) {
    Select<double> sel;
    std::array<double, kNx> xs;
    for (Eigen::Index j = 0; j < kNx; ++j) xs[size_t(j)] = x(j);
    // theta does not enter g; a fixed placeholder keeps the evaluation valid
    auto o = wtps_core<double>(params, cp, wind, kind, smoothing_N, t, 0.0, xs, y(0), sel);
    g(0) = o.g;
  };
  d.ld_rhs_h = [params, cp, wind, kind, smoothing_N](
                   const LdScalar& t, const LdVector& u, const LdVector& x,
                   const LdVector& y, LdVector& h, BranchRecorder* rec) {
    Select<LdScalar> sel{rec};
    std::array<LdScalar, kNx> xs;
    for (Eigen::Index j = 0; j < kNx; ++j) xs[size_t(j)] = x[size_t(j)];
    auto o = wtps_core<LdScalar>(params, cp, wind, kind, smoothing_N, t, u[0], xs,
                                 y[0], sel);
    h.assign(o.h.begin(), o.h.end());
  };
  d.ld_alg_g = [params, cp, wind, kind, smoothing_N](
                   const LdScalar& t, const LdVector& x, const LdVector& y,
                   LdVector& g, BranchRecorder* rec) {
    Select<LdScalar> sel{rec};
    std::array<LdScalar, kNx> xs;
    for (Eigen::Index j = 0; j < kNx; ++j) xs[size_t(j)] = x[size_t(j)];
    auto o = wtps_core<LdScalar>(params, cp, wind, kind, smoothing_N, t,
                                 LdScalar::constant(0.0, t.width()), xs, y[0], sel);
    g.assign(1, o.g);
  };
  return d;
}

// ---- steady state -----------------------------------------------------------

struct WtpsSteadyState {
  Eigen::VectorXd x;  // length kNx, x_aux = 0
  double V = 1.0;
  double p_elec = 0.0;
  double p_mech = 0.0;
};

namespace detail {

inline double wref_quadratic(double p_elec) {
  return -0.75 * p_elec * p_elec + 1.59 * p_elec + 0.63;
}

// Solve the reduced steady-state conditions for (w_t, P_elec):
//   P_elec = P_mech(theta, w_t, v)   and   w_t + w0 = min(q(P_elec), w_ref_star)
inline std::pair<double, double> reduced_steady_state(const WtpsParams& P,
                                                      const CpPoly& cp, double v_wind,
                                                      double theta) {
  auto pm = [&](double w_t) { return pmech<double>(P, cp, theta, w_t, v_wind); };

  // rated-speed branch
  const double w_rated = P.w_ref_star - P.w0;
  const double p_rated = pm(w_rated);
  if (wref_quadratic(p_rated) >= P.w_ref_star) return {w_rated, p_rated};

  // variable-speed branch: (w + w0) - q(P_mech(w)) = 0
  auto f = [&](double w) { return (w + P.w0) - wref_quadratic(pm(w)); };
  const double lo = -0.9, hi = 0.5;
  const int scan = 256;
  double a = lo, fa = f(lo);
  for (int i = 1; i <= scan; ++i) {
    const double b = lo + (hi - lo) * double(i) / scan;
    const double fb = f(b);
    if (fa == 0.0) return {a, pm(a)};
    if (fa * fb < 0.0) {
      double x0 = a, x1 = b, f0 = fa;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (x0 + x1);
        const double fm = f(mid);
        if (f0 * fm <= 0.0) x1 = mid; else { x0 = mid; f0 = fm; }
      }
      const double w = 0.5 * (x0 + x1);
      return {w, pm(w)};
    }
    a = b;
    fa = fb;
  }
  throw InitError("steady_state: no equilibrium shaft speed in bracket for v=" +
                  std::to_string(v_wind) + ", theta=" + std::to_string(theta));
}

}  // namespace detail

// Newton solve of {h1..h10 = 0, g = 0} in (x1..x10, V); x_aux excluded and
// returned as 0. Seeded from the reduced two-variable equilibrium.
inline WtpsSteadyState steady_state(const WtpsParams& P, const CpPoly& cp,
                                    double v_wind, double theta,
                                    double tol = 1e-10) {
  auto [w_t, p_elec] = detail::reduced_steady_state(P, cp, v_wind, theta);

  const double q_gen = std::tan(P.pfe) * p_elec;  // h7 = 0 with Q_cmd = tan(PFE) P_1elec
  const double Xr = P.reactance();
  const double B = 2.0 * (p_elec * P.R + q_gen * Xr) + P.E * P.E;
  const double C = (P.R * P.R + Xr * Xr) * (p_elec * p_elec + q_gen * q_gen);
  const double disc = B * B - 4.0 * C;
  if (disc <= 0.0) throw InitError("steady_state: no real terminal voltage");
  const double V0 = std::sqrt(0.5 * (B + std::sqrt(disc)));

  Eigen::VectorXd x = Eigen::VectorXd::Zero(kNx);
  x(kWg) = w_t;
  x(kWt) = w_t;
  x(kDthetaM) = -p_elec / (P.K_tg * (w_t + P.w0));
  x(kF1) = p_elec / (P.K_itrq * (w_t + P.w0));
  x(kPinp) = p_elec;
  x(kP1elec) = p_elec;
  x(kVref) = V0;
  x(kEqcmd) = V0 + q_gen * P.X_eq / V0;
  x(kEq) = x(kEqcmd);
  x(kIplv) = p_elec / V0;

  // polish with full Newton on (x1..x10, V)
  WindProfile dummy = RampWind{v_wind, 0.0, 0.0, 0.0};  // constant wind
  Select<double> sel;
  auto residual = [&](const Eigen::VectorXd& z, Eigen::VectorXd& r) {
    std::array<double, kNx> xs;
    for (Eigen::Index j = 0; j < 10; ++j) xs[size_t(j)] = z(j);
    xs[kAux] = 0.0;
    auto o = wtps_core<double>(P, cp, dummy, ObjectiveKind::Nonsmooth, 100.0, 0.0,
                               theta, xs, z(10), sel);
    r.resize(11);
    for (Eigen::Index j = 0; j < 10; ++j) r(j) = o.h[size_t(j)];
    r(10) = o.g;
  };

  Eigen::VectorXd z(11), r(11), rp(11);
  z.head(10) = x.head(10);
  z(10) = V0;
  residual(z, r);
  int iter = 0;
  while (r.lpNorm<Eigen::Infinity>() >= tol) {
    if (iter++ > 50) {
      throw InitError("steady_state: newton polish failed, residual " +
                      std::to_string(r.lpNorm<Eigen::Infinity>()));
    }
    Eigen::MatrixXd J(11, 11);
    Eigen::VectorXd zp = z;
    for (int j = 0; j < 11; ++j) {
      const double eps = 1e-7 * std::max(1.0, std::abs(z(j)));
      zp(j) = z(j) + eps;
      residual(zp, rp);
      J.col(j) = (rp - r) / eps;
      zp(j) = z(j);
    }
    const Eigen::VectorXd dz = J.lu().solve(r);
    double damp = 1.0;
    const double r0 = r.lpNorm<Eigen::Infinity>();
    for (int half = 0; half < 30; ++half, damp *= 0.5) {
      Eigen::VectorXd zt = z - damp * dz;
      residual(zt, rp);
      if (rp.lpNorm<Eigen::Infinity>() < r0) {
        z = zt;
        r = rp;
        break;
      }
      if (half == 29) {
        throw InitError("steady_state: newton polish stalled at residual " +
                        std::to_string(r0));
      }
    }
  }

  WtpsSteadyState out;
  out.x = Eigen::VectorXd::Zero(kNx);
  out.x.head(10) = z.head(10);
  out.V = z(10);
  out.p_elec = z(kIplv) * out.V;
  out.p_mech = pmech<double>(P, cp, theta, z(kWt), v_wind);
  return out;
}

// Pitch held at its steady-state value for the given wind speed: zero while
// rated power is not reachable, otherwise the pitch that sheds power to
// exactly rated.
inline double initial_pitch(const WtpsParams& P, const CpPoly& cp, double v_wind) {
  const double w_rated = P.w_ref_star - P.w0;
  auto pm = [&](double theta) { return pmech<double>(P, cp, theta, w_rated, v_wind); };
  if (pm(P.pitch_lower) <= P.P_stl) return P.pitch_lower;
  double lo = P.pitch_lower, hi = P.pitch_upper;
  if (pm(hi) > P.P_stl) return hi;  // even full pitch cannot shed enough
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (pm(mid) > P.P_stl ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// ---- scenario assembly ------------------------------------------------------

struct WtpsSetup {
  WtpsParams params;
  CpPoly cp = CpPoly::reference();
  WindProfile wind = RampWind{};
  double t0 = 18.0;
  double tf = 22.0;
  Eigen::Index n_s = 20;
  ObjectiveKind kind = ObjectiveKind::Nonsmooth;
  double smoothing_N = 100.0;
  IntegratorConfig integrator;
  std::optional<double> initial_pitch_override;
};

struct WtpsProblem {
  OcpProblem ocp;
  double theta0 = 0.0;        // flat initial control guess
  WtpsSteadyState steady;     // operating point at t0
};

inline WtpsProblem build_wtps_problem(const WtpsSetup& setup) {
  WtpsProblem out;
  const double v0 = wind_eval(setup.wind, setup.t0);
  out.theta0 = setup.initial_pitch_override
                   ? *setup.initial_pitch_override
                   : initial_pitch(setup.params, setup.cp, v0);
  out.steady = steady_state(setup.params, setup.cp, v0, out.theta0);

  out.ocp.dae = make_wtps_dae(setup.params, setup.cp, setup.wind, setup.kind,
                              setup.smoothing_N);
  out.ocp.t0 = setup.t0;
  out.ocp.tf = setup.tf;
  out.ocp.n_s = setup.n_s;
  out.ocp.n_u = 1;
  out.ocp.x0 = out.steady.x;
  out.ocp.y_guess = Eigen::VectorXd::Constant(1, out.steady.V);
  out.ocp.lower = Eigen::VectorXd::Constant(1, setup.params.pitch_lower);
  out.ocp.upper = Eigen::VectorXd::Constant(1, setup.params.pitch_upper);
  out.ocp.integrator = setup.integrator;
  return out;
}

inline Eigen::VectorXd wtps_initial_guess(const WtpsProblem& prob) {
  return Eigen::VectorXd::Constant(prob.ocp.n_p(), prob.theta0);
}

// Trajectory dump with the model-specific column contract. The omega column
// is always the nonsmooth integrand, whatever objective the run optimized.
inline void write_wtps_trajectory_csv(const WtpsParams& params, const CpPoly& cp,
                                      const WindProfile& wind,
                                      const TrajectoryRecord& rec,
                                      const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open " + path + " for writing");
  out << "t,w_g,w_t,dtheta_m,f1,P_inp,P_1elec,V_ref,E_qcmd,E_q,I_plv,x_aux,V,u,"
         "P_mech,omega\n";
  Select<double> sel;
  for (size_t k = 0; k < rec.t.size(); ++k) {
    std::array<double, kNx> xs;
    for (Eigen::Index j = 0; j < kNx; ++j) xs[size_t(j)] = rec.x[k](j);
    auto o = wtps_core<double>(params, cp, wind, ObjectiveKind::Nonsmooth, 100.0,
                               rec.t[k], rec.u[k](0), xs, rec.y[k](0), sel);
    out << io::fmt(rec.t[k]);
    for (Eigen::Index j = 0; j < kNx; ++j) out << "," << io::fmt(rec.x[k](j));
    out << "," << io::fmt(rec.y[k](0)) << "," << io::fmt(rec.u[k](0)) << ","
        << io::fmt(o.p_mech) << "," << io::fmt(o.omega_value) << "\n";
  }
}

}  // namespace nsoc

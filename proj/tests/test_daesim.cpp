#include "nsoc/dae.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include <catch2/catch_amalgamated.hpp>

#include "test_util.hpp"

using namespace nsoc;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

// x' = -x, 0 = y - x
SemiExplicitDae linear_dae() {
  SemiExplicitDae d;
  d.n_x = 1;
  d.n_y = 1;
  d.n_u = 1;
  d.rhs_h = [](double, const VectorXd&, const VectorXd& x, const VectorXd&,
               VectorXd& h) { h(0) = -x(0); };
  d.alg_g = [](double, const VectorXd& x, const VectorXd& y, VectorXd& g) {
    g(0) = y(0) - x(0);
  };
  d.ld_rhs_h = [](const LdScalar&, const LdVector&, const LdVector& x,
                  const LdVector&, LdVector& h, BranchRecorder*) {
    h.clear();
    h.push_back(-x[0]);
  };
  d.ld_alg_g = [](const LdScalar&, const LdVector& x, const LdVector& y,
                  LdVector& g, BranchRecorder*) {
    g.clear();
    g.push_back(y[0] - x[0]);
  };
  return d;
}

// x' = u, pure ODE
SemiExplicitDae integrator_dae() {
  SemiExplicitDae d;
  d.n_x = 1;
  d.n_y = 0;
  d.n_u = 1;
  d.rhs_h = [](double, const VectorXd& u, const VectorXd&, const VectorXd&,
               VectorXd& h) { h(0) = u(0); };
  d.ld_rhs_h = [](const LdScalar&, const LdVector& u, const LdVector&,
                  const LdVector&, LdVector& h, BranchRecorder*) {
    h.clear();
    h.push_back(u[0]);
  };
  return d;
}

AugmentedDaeState ode_init(double t0, const VectorXd& x0, Eigen::Index n_p) {
  AugmentedDaeState s;
  s.t = t0;
  s.x = x0;
  s.y.resize(0);
  s.X = MatrixXd::Zero(x0.size(), n_p);
  s.Y.resize(0, n_p);
  return s;
}

}  // namespace

TEST_CASE("consistent_init solves the algebraic condition") {
  auto dae = linear_dae();
  IntegratorConfig cfg;
  auto s = consistent_init(dae, cfg, 0.0, testutil::col({1.0}), testutil::col({0.0}),
                           Eigen::Index(1));
  CHECK(s.y(0) == Catch::Approx(1.0).margin(1e-12));
  CHECK(s.Y.cwiseAbs().maxCoeff() == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("consistent_init reports singular dg/dy as a regularity error") {
  SemiExplicitDae d;
  d.n_x = 1;
  d.n_y = 1;
  d.n_u = 1;
  d.rhs_h = [](double, const VectorXd&, const VectorXd& x, const VectorXd&,
               VectorXd& h) { h(0) = -x(0); };
  d.alg_g = [](double, const VectorXd& x, const VectorXd& y, VectorXd& g) {
    g(0) = (y(0) - x(0)) * (y(0) - x(0));
  };
  d.ld_rhs_h = [](const LdScalar&, const LdVector&, const LdVector& x,
                  const LdVector&, LdVector& h, BranchRecorder*) {
    h.clear();
    h.push_back(-x[0]);
  };
  d.ld_alg_g = [](const LdScalar&, const LdVector& x, const LdVector& y,
                  LdVector& g, BranchRecorder*) {
    g.clear();
    g.push_back((y[0] - x[0]) * (y[0] - x[0]));
  };
  IntegratorConfig cfg;
  CHECK_THROWS_AS(
      consistent_init(d, cfg, 0.0, testutil::col({1.0}), testutil::col({1.0}),
                      Eigen::Index(1)),
      RegularityError);
}

TEST_CASE("linear DAE integrates to the analytic solution") {
  auto dae = linear_dae();
  IntegratorConfig cfg;
  cfg.steps_per_interval = 2000;
  ControlGrid grid = ControlGrid::from_vector(testutil::col({0.0}), 1, 1, 0.0, 1.0);
  auto init = consistent_init(dae, cfg, 0.0, testutil::col({1.0}),
                              testutil::col({0.9}), Eigen::Index(1));
  auto rec = integrate(dae, cfg, grid, init);
  CHECK(rec.final_state.x(0) == Catch::Approx(std::exp(-1.0)).margin(1e-6));
  for (size_t k = 0; k < rec.t.size(); ++k) {
    CHECK(rec.y[k](0) == Catch::Approx(rec.x[k](0)).margin(1e-9));
  }
  CHECK(rec.max_alg_residual <= 10.0 * cfg.newton_tol);
}

TEST_CASE("piecewise-constant input integrates exactly with unit seed columns") {
  auto dae = integrator_dae();
  IntegratorConfig cfg;
  cfg.steps_per_interval = 50;
  ControlGrid grid = ControlGrid::from_vector(testutil::col({2.0, -2.0}), 2, 1, 0.0, 1.0);
  auto rec = integrate(dae, cfg, grid, ode_init(0.0, testutil::col({0.0}), 2));
  CHECK(rec.final_state.x(0) == Catch::Approx(0.0).margin(1e-13));
  CHECK(rec.final_state.X(0, 0) == Catch::Approx(0.5).margin(1e-13));
  CHECK(rec.final_state.X(0, 1) == Catch::Approx(0.5).margin(1e-13));
}

TEST_CASE("double integrator with unit force") {
  SemiExplicitDae d;
  d.n_x = 2;
  d.n_y = 0;
  d.n_u = 1;
  d.rhs_h = [](double, const VectorXd& u, const VectorXd& x, const VectorXd&,
               VectorXd& h) {
    h(0) = x(1);
    h(1) = u(0);
  };
  d.ld_rhs_h = [](const LdScalar&, const LdVector& u, const LdVector& x,
                  const LdVector&, LdVector& h, BranchRecorder*) {
    h.clear();
    h.push_back(x[1]);
    h.push_back(u[0]);
  };
  IntegratorConfig cfg;
  cfg.steps_per_interval = 100;
  ControlGrid grid = ControlGrid::from_vector(testutil::col({1.0}), 1, 1, 0.0, 1.0);
  auto rec = integrate(d, cfg, grid, ode_init(0.0, testutil::col({0.0, 0.0}), 1));
  CHECK(rec.final_state.x(1) == Catch::Approx(1.0).margin(1e-12));
  CHECK(rec.final_state.x(0) == Catch::Approx(0.5).margin(1e-12));
}

TEST_CASE("single step matches the trapezoidal closed form") {
  auto dae = linear_dae();
  IntegratorConfig cfg;
  AugmentedDaeState s;
  s.t = 0.0;
  s.x = testutil::col({1.0});
  s.y = testutil::col({1.0});
  s.X = MatrixXd::Zero(1, 0);
  s.Y = MatrixXd::Zero(1, 0);
  const double dt = 0.1;
  auto out = step(dae, cfg, s, testutil::col({0.0}), MatrixXd::Zero(1, 0), dt);
  CHECK(out.x(0) == Catch::Approx((1.0 - dt / 2) / (1.0 + dt / 2)).margin(1e-12));
  CHECK_THROWS_AS(step(dae, cfg, s, testutil::col({0.0}), MatrixXd::Zero(1, 0), 0.0),
                  RangeError);
}

TEST_CASE("stiff relaxation stays bounded and contracts (A-stability)") {
  SemiExplicitDae d;
  d.n_x = 1;
  d.n_y = 0;
  d.n_u = 1;
  d.rhs_h = [](double, const VectorXd&, const VectorXd& x, const VectorXd&,
               VectorXd& h) { h(0) = -50.0 * (x(0) - 1.0); };
  d.ld_rhs_h = [](const LdScalar&, const LdVector&, const LdVector& x,
                  const LdVector&, LdVector& h, BranchRecorder*) {
    h.clear();
    h.push_back(-50.0 * (x[0] - 1.0));
  };
  IntegratorConfig cfg;
  AugmentedDaeState s = ode_init(0.0, testutil::col({2.0}), 0);
  double dist = 1.0;
  for (int k = 0; k < 8; ++k) {
    s = step(d, cfg, s, testutil::col({0.0}), MatrixXd::Zero(1, 0), 0.05);
    const double now = std::fabs(s.x(0) - 1.0);
    CHECK(now < dist / 5.0);
    CHECK(s.x(0) > 0.5);
    CHECK(s.x(0) < 2.0);
    dist = now;
  }
}

TEST_CASE("initial-condition seed propagates like the analytic sensitivity") {
  auto dae = linear_dae();
  IntegratorConfig cfg;
  cfg.steps_per_interval = 2000;
  ControlGrid grid = ControlGrid::from_vector(testutil::col({0.0}), 1, 1, 0.0, 1.0);
  AugmentedDaeState init;
  init.t = 0.0;
  init.x = testutil::col({1.0});
  init.y = testutil::col({1.0});
  init.X = MatrixXd::Ones(1, 1);
  init.Y = MatrixXd::Ones(1, 1);  // y = x, so Y must track X
  auto rec = integrate(dae, cfg, grid, init);
  CHECK(rec.final_state.X(0, 0) == Catch::Approx(std::exp(-1.0)).margin(1e-6));

  // FD oracle on perturbed value-only integrations
  IntegratorConfig vcfg = cfg;
  vcfg.propagate_sensitivities = false;
  auto run = [&](double x0) {
    auto s0 = consistent_init(dae, vcfg, 0.0, testutil::col({x0}),
                              testutil::col({x0}), Eigen::Index(0));
    return integrate(dae, vcfg, grid, s0).final_state.x(0);
  };
  const double fd = (run(1.0 + 1e-6) - run(1.0 - 1e-6)) / 2e-6;
  CHECK(rec.final_state.X(0, 0) == Catch::Approx(fd).margin(1e-6));
}

TEST_CASE("order study: halving dt divides the error by about four") {
  auto dae = linear_dae();
  ControlGrid grid = ControlGrid::from_vector(testutil::col({0.0}), 1, 1, 0.0, 1.0);
  std::vector<double> errs;
  for (int m : {100, 200, 400}) {  // dt = 1e-2, 5e-3, 2.5e-3
    IntegratorConfig cfg;
    cfg.steps_per_interval = m;
    cfg.newton_tol = 1e-13;
    auto init = consistent_init(dae, cfg, 0.0, testutil::col({1.0}),
                                testutil::col({1.0}), Eigen::Index(0));
    auto rec = integrate(dae, cfg, grid, init);
    errs.push_back(std::fabs(rec.final_state.x(0) - std::exp(-1.0)));
  }
  for (size_t i = 0; i + 1 < errs.size(); ++i) {
    const double ratio = errs[i] / errs[i + 1];
    CHECK(ratio > 3.8);
    CHECK(ratio < 4.2);
  }
}

namespace {

// Smooth test DAE for sensitivity checks:
//   x1' = -2 x1 + sin(x2) + u
//   x2' = -x2 + x1 y
//   0   = y - 0.5 cos(x1)
SemiExplicitDae smooth_dae() {
  SemiExplicitDae d;
  d.n_x = 2;
  d.n_y = 1;
  d.n_u = 1;
  d.rhs_h = [](double, const VectorXd& u, const VectorXd& x, const VectorXd& y,
               VectorXd& h) {
    h(0) = -2.0 * x(0) + std::sin(x(1)) + u(0);
    h(1) = -x(1) + x(0) * y(0);
  };
  d.alg_g = [](double, const VectorXd& x, const VectorXd& y, VectorXd& g) {
    g(0) = y(0) - 0.5 * std::cos(x(0));
  };
  d.ld_rhs_h = [](const LdScalar&, const LdVector& u, const LdVector& x,
                  const LdVector& y, LdVector& h, BranchRecorder*) {
    h.clear();
    h.push_back(-2.0 * x[0] + sin(x[1]) + u[0]);
    h.push_back(-x[1] + x[0] * y[0]);
  };
  d.ld_alg_g = [](const LdScalar&, const LdVector& x, const LdVector& y,
                  LdVector& g, BranchRecorder*) {
    g.clear();
    g.push_back(y[0] - 0.5 * cos(x[0]));
  };
  return d;
}

// Independent oracle: hand-coded classical forward sensitivity equations,
// algebraic variable eliminated analytically, integrated with dense RK4.
struct SmoothOracle {
  VectorXd x;     // 2
  MatrixXd X;     // 2 x 2
};

SmoothOracle rk4_oracle(const VectorXd& x0, double u1, double u2) {
  SmoothOracle s;
  s.x = x0;
  s.X = MatrixXd::Zero(2, 2);
  const int n = 4000;
  const double dt = 1.0 / n;
  int ui = 0;  // control subinterval owning the current step (half-open rule)
  auto deriv = [&](const VectorXd& x, const MatrixXd& X, VectorXd& dx,
                   MatrixXd& dX) {
    const double u = ui == 0 ? u1 : u2;
    const double y = 0.5 * std::cos(x(0));
    dx.resize(2);
    dx(0) = -2.0 * x(0) + std::sin(x(1)) + u;
    dx(1) = -x(1) + x(0) * y;
    Eigen::RowVector2d Yrow = -0.5 * std::sin(x(0)) * X.row(0);
    dX.resize(2, 2);
    dX.row(0) = -2.0 * X.row(0) + std::cos(x(1)) * X.row(1);
    dX(0, ui) += 1.0;
    dX.row(1) = -X.row(1) + y * X.row(0) + x(0) * Yrow;
  };
  VectorXd k1x, k2x, k3x, k4x;
  MatrixXd k1X, k2X, k3X, k4X;
  for (int i = 0; i < n; ++i) {
    ui = (i < n / 2) ? 0 : 1;
    deriv(s.x, s.X, k1x, k1X);
    deriv(s.x + dt / 2 * k1x, s.X + dt / 2 * k1X, k2x, k2X);
    deriv(s.x + dt / 2 * k2x, s.X + dt / 2 * k2X, k3x, k3X);
    deriv(s.x + dt * k3x, s.X + dt * k3X, k4x, k4X);
    s.x += dt / 6 * (k1x + 2 * k2x + 2 * k3x + k4x);
    s.X += dt / 6 * (k1X + 2 * k2X + 2 * k3X + k4X);
  }
  return s;
}

}  // namespace

TEST_CASE("smooth problems recover the classical sensitivity equations") {
  auto dae = smooth_dae();
  ControlGrid grid = ControlGrid::from_vector(testutil::col({0.3, -0.2}), 2, 1, 0.0, 1.0);
  VectorXd x0 = testutil::col({0.4, -0.3});
  auto oracle = rk4_oracle(x0, 0.3, -0.2);

  double prev_err = 0.0;
  for (int m : {500, 1000}) {
    IntegratorConfig cfg;
    cfg.steps_per_interval = m;
    cfg.newton_tol = 1e-12;
    auto init = consistent_init(dae, cfg, 0.0, x0, testutil::col({0.5}), Eigen::Index(2));
    auto rec = integrate(dae, cfg, grid, init);
    CHECK((rec.final_state.x - oracle.x).lpNorm<Eigen::Infinity>() < 1e-6);
    const double err = (rec.final_state.X - oracle.X).lpNorm<Eigen::Infinity>();
    CHECK(err < 2e-5);
    if (prev_err > 0.0) {
      // the gap to the hand-coded oracle is pure discretization error
      CHECK(err < 0.3 * prev_err);
    }
    prev_err = err;
    CHECK(rec.max_sens_alg_residual < 1e-9);
  }
}

TEST_CASE("sensitivities agree with central finite differences off kinks") {
  auto dae = smooth_dae();
  IntegratorConfig cfg;
  cfg.steps_per_interval = 200;
  cfg.newton_tol = 1e-12;
  VectorXd x0 = testutil::col({0.4, -0.3});
  VectorXd p = testutil::col({0.3, -0.2});

  auto value_run = [&](const VectorXd& pp) {
    IntegratorConfig vcfg = cfg;
    vcfg.propagate_sensitivities = false;
    ControlGrid grid = ControlGrid::from_vector(pp, 2, 1, 0.0, 1.0);
    auto init = consistent_init(dae, vcfg, 0.0, x0, testutil::col({0.5}), Eigen::Index(0));
    return integrate(dae, vcfg, grid, init).final_state.x;
  };

  ControlGrid grid = ControlGrid::from_vector(p, 2, 1, 0.0, 1.0);
  auto init = consistent_init(dae, cfg, 0.0, x0, testutil::col({0.5}), Eigen::Index(2));
  auto rec = integrate(dae, cfg, grid, init);
  CHECK(rec.switches.empty());

  for (int j = 0; j < 2; ++j) {
    VectorXd pp = p, pm = p;
    pp(j) += 1e-6;
    pm(j) -= 1e-6;
    VectorXd fd = (value_run(pp) - value_run(pm)) / 2e-6;
    for (int r = 0; r < 2; ++r) {
      const double denom = std::max(std::fabs(fd(r)), 1e-8);
      CHECK(std::fabs(rec.final_state.X(r, j) - fd(r)) / denom < 1e-4);
    }
  }
}

TEST_CASE("branch switches are logged in time order and replay identically") {
  // x' = -min(x, c) + 0.05, crossing c = 0.8 from above
  SemiExplicitDae d;
  d.n_x = 1;
  d.n_y = 0;
  d.n_u = 1;
  const double c = 0.8;
  d.rhs_h = [c](double, const VectorXd&, const VectorXd& x, const VectorXd&,
                VectorXd& h) { h(0) = -std::min(x(0), c) + 0.05; };
  d.ld_rhs_h = [c](const LdScalar&, const LdVector&, const LdVector& x,
                   const LdVector&, LdVector& h, BranchRecorder* rec) {
    Select<LdScalar> sel{rec};
    h.clear();
    h.push_back(-sel.min(x[0], LdScalar::constant(c, x[0].width())) + 0.05);
  };
  IntegratorConfig cfg;
  cfg.steps_per_interval = 400;
  ControlGrid grid = ControlGrid::from_vector(testutil::col({0.0}), 1, 1, 0.0, 2.0);
  AugmentedDaeState init = ode_init(0.0, testutil::col({1.2}), 1);

  auto rec1 = integrate(d, cfg, grid, init);
  auto rec2 = integrate(d, cfg, grid, init);
  REQUIRE(rec1.switches.size() == 1);
  CHECK(rec1.switches[0].site == 0);
  REQUIRE(rec2.switches.size() == rec1.switches.size());
  for (size_t i = 0; i < rec1.switches.size(); ++i) {
    CHECK(rec1.switches[i].t == rec2.switches[i].t);
    CHECK(rec1.switches[i].site == rec2.switches[i].site);
    CHECK(rec1.switches[i].code == rec2.switches[i].code);
  }
  for (size_t i = 0; i + 1 < rec1.switches.size(); ++i) {
    CHECK(rec1.switches[i].t <= rec1.switches[i + 1].t);
  }
}

TEST_CASE("trajectory CSV dump uses the documented header") {
  auto dae = linear_dae();
  IntegratorConfig cfg;
  cfg.steps_per_interval = 4;
  ControlGrid grid = ControlGrid::from_vector(testutil::col({0.0}), 1, 1, 0.0, 0.1);
  auto init = consistent_init(dae, cfg, 0.0, testutil::col({1.0}),
                              testutil::col({1.0}), Eigen::Index(0));
  auto rec = integrate(dae, cfg, grid, init);
  const std::string path = "test_daesim_traj.csv";
  write_trajectory_csv(rec, path);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "t,x1,y1");
  int lines = 0;
  std::string line;
  while (std::getline(in, line)) ++lines;
  CHECK(lines == int(rec.t.size()));
  std::remove(path.c_str());
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ymlens/ode.hpp"

using namespace ymlens;

namespace {

// harmonic oscillator: y = (cos t, -sin t)
ode::Rhs oscillator() {
  return [](double, const Vec& y, Vec& dydt) {
    dydt.resize(2);
    dydt[0] = y[1];
    dydt[1] = -y[0];
  };
}

Vec osc_exact(double t) {
  Vec y(2);
  y << std::cos(t), -std::sin(t);
  return y;
}

}  // namespace

TEST_CASE("dopri5 accuracy on the oscillator") {
  ode::Options opts;
  opts.rel_tol = 1e-10;
  opts.abs_tol = 1e-12;
  Vec y0(2);
  y0 << 1.0, 0.0;
  const double t1 = 10.0;
  const ode::DensePath path = ode::integrate_dense(oscillator(), 0.0, y0, t1, opts);
  CHECK((path.end_state() - osc_exact(t1)).cwiseAbs().maxCoeff() < 1e-8);

  // dense output stays accurate between steps
  for (double t : {0.37, 1.234, 5.5, 9.99})
    CHECK((path.eval(t) - osc_exact(t)).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("tolerance scaling") {
  Vec y0(2);
  y0 << 1.0, 0.0;
  auto err_at = [&](double rtol) {
    ode::Options opts;
    opts.rel_tol = rtol;
    opts.abs_tol = rtol * 1e-2;
    const ode::DensePath path = ode::integrate_dense(oscillator(), 0.0, y0, 10.0, opts);
    return (path.end_state() - osc_exact(10.0)).cwiseAbs().maxCoeff();
  };
  const double loose = err_at(1e-6);
  const double tight = err_at(1e-10);
  CHECK(tight < loose);
  CHECK(tight < 1e-8);
}

TEST_CASE("event location with arming") {
  // y(t) = t^2 - t: starts at 0, dips negative, crosses zero at t = 1.
  ode::Rhs rhs = [](double t, const Vec&, Vec& dydt) {
    dydt.resize(1);
    dydt[0] = 2.0 * t - 1.0;
  };
  ode::Options opts;
  opts.rel_tol = 1e-10;
  opts.abs_tol = 1e-12;
  Vec y0(1);
  y0 << 0.0;
  auto monitor = [](double, const Vec& y) { return y[0]; };
  const ode::EventIntegration ev =
      ode::integrate_with_event(rhs, 0.0, y0, 5.0, monitor, 1e-13, opts);
  REQUIRE(ev.event_hit);
  CHECK(ev.t_event == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(std::abs(ev.y_event[0]) < 1e-12);
}

TEST_CASE("horizon cap without event") {
  ode::Rhs rhs = [](double, const Vec&, Vec& dydt) {
    dydt.resize(1);
    dydt[0] = 0.0;
  };
  ode::Options opts;
  Vec y0(1);
  y0 << -1.0;
  auto monitor = [](double, const Vec& y) { return y[0]; };
  const ode::EventIntegration ev =
      ode::integrate_with_event(rhs, 0.0, y0, 2.0, monitor, 1e-12, opts);
  CHECK(!ev.event_hit);
  CHECK(ev.capped);
  CHECK(ev.path.t_end() == doctest::Approx(2.0));
}

TEST_CASE("max step count guard") {
  ode::Rhs rhs = [](double, const Vec& y, Vec& dydt) { dydt = y; };
  ode::Options opts;
  opts.max_steps = 3;
  Vec y0(1);
  y0 << 1.0;
  CHECK_THROWS_AS(ode::integrate_dense(rhs, 0.0, y0, 100.0, opts), NumericsError);
}

TEST_CASE("zero-span integration is trivial") {
  ode::Options opts;
  Vec y0(2);
  y0 << 0.5, -0.5;
  const ode::DensePath path = ode::integrate_dense(oscillator(), 0.0, y0, 0.0, opts);
  CHECK((path.end_state() - y0).cwiseAbs().maxCoeff() == 0.0);
  CHECK((path.eval(0.0) - y0).cwiseAbs().maxCoeff() == 0.0);
}

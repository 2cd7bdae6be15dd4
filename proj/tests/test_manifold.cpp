#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ymlens/catalog.hpp"
#include "ymlens/manifold.hpp"
#include "ymlens/rng.hpp"

using namespace ymlens;

namespace {

Vec vec3(double a, double b, double c) {
  Vec v(3);
  v << a, b, c;
  return v;
}

Chart euclidean_ball(double radius = 1.0) {
  Vec coeff(1);
  coeff << radius;
  const double m = radius + 0.4;
  return make_chart(3, "euclidean", Vec(), "ball", coeff, vec3(-m, -m, -m), vec3(m, m, m));
}

// phi = 0.1 z1 + 0.2 z2 - 0.05 z3 + 0.03 |z|^2
Vec conformal_coeffs() {
  Vec c(5);
  c << 0.0, 0.1, 0.2, -0.05, 0.03;
  return c;
}

Chart conformal_ball() {
  Vec coeff(1);
  coeff << 1.0;
  return make_chart(3, "conformal", conformal_coeffs(), "ball", coeff, vec3(-1.4, -1.4, -1.4),
                    vec3(1.4, 1.4, 1.4));
}

Vec conformal_dphi(const Vec& z) {
  Vec lin = vec3(0.1, 0.2, -0.05);
  return lin + 0.06 * z;
}

// closed-form conformal Christoffel: G^i_jk = d_ij dphi_k + d_ik dphi_j - d_jk dphi_i
double conformal_gamma(const Vec& z, int i, int j, int k) {
  const Vec dp = conformal_dphi(z);
  double g = 0.0;
  if (i == j) g += dp[k];
  if (i == k) g += dp[j];
  if (j == k) g -= dp[i];
  return g;
}

Chart halfspace() {
  Vec coeff(4);
  coeff << 0.0, 0.0, 0.0, -1.0;  // rho = -z3, M = {z3 >= 0}
  return make_chart(3, "euclidean", Vec(), "halfspace", coeff, vec3(-2, -2, -0.5),
                    vec3(2, 2, 2));
}

}  // namespace

TEST_CASE("metric jet: flat chart") {
  const Chart chart = euclidean_ball();
  const MetricJet jet = metric_jet(chart, vec3(0.2, -0.3, 0.1));
  CHECK((jet.g - Mat::Identity(3, 3)).cwiseAbs().maxCoeff() == 0.0);
  for (int i = 0; i < 3; ++i) CHECK(jet.christoffel[i].cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("metric jet: conformal closed form, analytic and FD") {
  const Vec z = vec3(0.2, -0.1, 0.3);

  Chart analytic = conformal_ball();
  const MetricJet jet = metric_jet(analytic, z);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) {
        CHECK(jet.christoffel[i](j, k) ==
              doctest::Approx(conformal_gamma(z, i, j, k)).epsilon(1e-10));
        CHECK(jet.christoffel[i](j, k) == jet.christoffel[i](k, j));
      }
  CHECK((jet.g * jet.g_inv - Mat::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-10);

  Chart fd = analytic;
  fd.metric_partials = nullptr;
  fd.metric_second = nullptr;
  const MetricJet jet_fd = metric_jet(fd, z);
  double err_default = 0.0;
  for (int i = 0; i < 3; ++i)
    err_default =
        std::max(err_default, (jet_fd.christoffel[i] - jet.christoffel[i]).cwiseAbs().maxCoeff());
  CHECK(err_default < 1e-8);

  // 4th-order stencil: halving the step shrinks the error by >= 8x when the
  // step is large enough for truncation (not roundoff) to dominate.
  auto gamma_err = [&](double step) {
    Chart c = fd;
    c.fd_step = step;
    const MetricJet j = metric_jet(c, z);
    double err = 0.0;
    for (int i = 0; i < 3; ++i)
      err = std::max(err, (j.christoffel[i] - jet.christoffel[i]).cwiseAbs().maxCoeff());
    return err;
  };
  const double err_h = gamma_err(2e-2);
  const double err_h2 = gamma_err(1e-2);
  CHECK(err_h2 * 8.0 <= err_h);
}

TEST_CASE("unit_normalize") {
  const Chart chart = euclidean_ball();
  const Vec z = vec3(0.1, 0.1, 0.1);
  CHECK((unit_normalize(chart, z, vec3(2, 0, 0)) - vec3(1, 0, 0)).cwiseAbs().maxCoeff() <
        1e-15);

  const Chart conf = conformal_ball();
  Rng rng(7);
  for (int k = 0; k < 20; ++k) {
    const Vec v = rng.normal_vector(3);
    if (v.norm() < 1e-8) continue;
    const Vec u = unit_normalize(conf, z, v);
    CHECK(std::abs(metric_norm(conf, z, u) - 1.0) < 1e-14);
    CHECK((unit_normalize(conf, z, u) - u).cwiseAbs().maxCoeff() < 1e-14);
  }
  CHECK_THROWS_AS(unit_normalize(chart, z, Vec::Zero(3)), GeometryError);
}

TEST_CASE("outer unit normal on the unit sphere") {
  const Chart chart = euclidean_ball();
  Rng rng(13);
  for (int k = 0; k < 20; ++k) {
    Vec z = rng.normal_vector(3);
    z /= z.norm();
    const Vec nu = outer_unit_normal(chart, z);
    CHECK((nu - z).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(std::abs(metric_norm(chart, z, nu) - 1.0) < 1e-12);

    // tangent vectors are orthogonal to the normal
    Vec w = rng.normal_vector(3);
    w -= w.dot(z) * z;
    if (w.norm() > 1e-8) CHECK(std::abs(nu.dot(chart.metric(z) * w)) / w.norm() < 1e-8);
  }
  CHECK_THROWS_AS(outer_unit_normal(chart, vec3(0.2, 0, 0)), GeometryError);
}

TEST_CASE("second fundamental form of spheres") {
  Rng rng(3);
  for (double radius : {1.0, 2.0}) {
    const Chart chart = euclidean_ball(radius);
    for (int k = 0; k < 10; ++k) {
      Vec z = rng.normal_vector(3);
      z *= radius / z.norm();
      Vec w = rng.normal_vector(3);
      w -= w.dot(z) * z / (radius * radius);
      w.normalize();
      CHECK(second_fundamental_form(chart, z, w) ==
            doctest::Approx(1.0 / radius).epsilon(1e-8));
    }
  }
  // non-tangent input rejected
  const Chart chart = euclidean_ball();
  CHECK_THROWS_AS(second_fundamental_form(chart, vec3(1, 0, 0), vec3(1, 0, 0)), GeometryError);
}

TEST_CASE("scalar Hessian") {
  const Chart flat = euclidean_ball();
  ScalarField half_sq = make_scalar_field("half_norm_squared", Vec(), 3);

  Rng rng(29);
  for (int k = 0; k < 10; ++k) {
    Vec z = 0.4 * rng.normal_vector(3);
    Vec v = rng.normal_vector(3).normalized();
    CHECK(hessian_scalar(flat, half_sq, z, v) == doctest::Approx(1.0).epsilon(1e-10));
  }

  ScalarField linear;
  linear.value = [](const Vec& z) { return 0.3 * z[0] - 0.7 * z[2]; };
  CHECK(std::abs(hessian_scalar(flat, linear, vec3(0.1, 0.2, -0.1), vec3(0.5, 0.5, 0.1))) <
        1e-8);

  // conformal metric: symbolic oracle evaluated once by CAS and frozen
  const Chart conf = conformal_ball();
  const double frozen = 0.295286;
  CHECK(hessian_scalar(conf, half_sq, vec3(0.2, -0.1, 0.3), vec3(0.3, -0.2, 0.4)) ==
        doctest::Approx(frozen).epsilon(1e-8));

  // same value when the Hessian of f comes from finite differences
  ScalarField fd_field;
  fd_field.value = half_sq.value;
  CHECK(hessian_scalar(conf, fd_field, vec3(0.2, -0.1, 0.3), vec3(0.3, -0.2, 0.4)) ==
        doctest::Approx(frozen).epsilon(1e-6));
}

TEST_CASE("boundary normal coordinates: half-space identity") {
  const Chart chart = halfspace();
  const Vec p = vec3(0.3, -0.2, 0.0);
  const BoundaryNormalChart collar(chart, p, 0.5);

  Rng rng(41);
  for (int k = 0; k < 10; ++k) {
    Vec zp(2);
    zp << 0.3 * rng.normal(), 0.3 * rng.normal();
    const double t = 0.4 * rng.uniform();
    const Vec expected = p + collar.tangent_frame() * zp + t * vec3(0, 0, 1);
    CHECK((collar.map(zp, t) - expected).cwiseAbs().maxCoeff() < 1e-10);

    const auto [zp_back, t_back] = collar.invert(expected);
    CHECK((zp_back - zp).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(t_back == doctest::Approx(t).epsilon(1e-9));
  }
}

TEST_CASE("boundary normal coordinates: unit ball distance and geodesic property") {
  const Chart chart = euclidean_ball();
  const Vec p = vec3(0, 0, 1);
  const BoundaryNormalChart collar(chart, p, 0.5);

  Rng rng(43);
  for (int k = 0; k < 8; ++k) {
    Vec z = vec3(0.12 * rng.normal(), 0.12 * rng.normal(), 0);
    z[2] = std::sqrt(1.0 - z.squaredNorm()) - 0.3 * rng.uniform();
    const auto [zp, t] = collar.invert(z);
    CHECK(t == doctest::Approx(1.0 - z.norm()).epsilon(1e-8));

    // unit-speed rays
    const auto [pos, vel] = collar.ray_state(zp, t);
    CHECK((pos - z).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(std::abs(metric_norm(chart, pos, vel) - 1.0) < 1e-10);
  }
}

TEST_CASE("normal rays satisfy the geodesic equation on a curved chart") {
  const Chart chart = conformal_ball();
  Vec p = vec3(0, 0, 1);
  const BoundaryNormalChart collar(chart, p, 0.4);

  Vec zp(2);
  zp << 0.05, -0.08;
  const double h = 1e-4;
  for (double t : {0.1, 0.2, 0.3}) {
    const Vec za = collar.map(zp, t - h);
    const Vec zb = collar.map(zp, t);
    const Vec zc = collar.map(zp, t + h);
    const Vec acc = (za - 2.0 * zb + zc) / (h * h);
    const Vec vel = (zc - za) / (2.0 * h);
    const MetricJet jet = metric_jet(chart, zb);
    const Vec residual = acc + jet.christoffel_contract(vel);
    CHECK(residual.cwiseAbs().maxCoeff() < 1e-6);
    // arc-length parameterization: |velocity|_g = 1
    CHECK(std::abs(metric_norm(chart, zb, vel) - 1.0) < 1e-6);
  }
}

TEST_CASE("focal points are detected") {
  const Chart chart = euclidean_ball();
  // normal geodesics from the sphere all meet at the centre (t = 1)
  CHECK_THROWS_AS(BoundaryNormalChart(chart, vec3(0, 0, 1), 1.0), GeometryError);
}

TEST_CASE("domain box guard") {
  const Chart chart = euclidean_ball();
  CHECK_THROWS_AS(metric_jet(chart, vec3(5, 0, 0)), GeometryError);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ymlens/catalog.hpp"
#include "ymlens/finite_diff.hpp"
#include "ymlens/gauge_field.hpp"
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

Chart halfspace() {
  Vec coeff(4);
  coeff << 0.0, 0.0, 0.0, -1.0;  // rho = -z3
  return make_chart(3, "euclidean", Vec(), "halfspace", coeff, vec3(-2, -2, -0.5),
                    vec3(2, 2, 2));
}

// su(2) constant connection A = e1 dz1 + e2 dz2
Connection su2_constant() {
  Vec coeffs = Vec::Zero(9);
  coeffs[0] = 1.0;  // A_1 = e1
  coeffs[4] = 1.0;  // A_2 = e2
  return make_connection("constant", coeffs, 3, 3);
}

// abelian A = alpha(z) i dz1 with alpha = 0.3 z1 - 0.7 z2 + 0.2 z3
Connection u1_linear() {
  Vec coeffs = Vec::Zero(9);
  coeffs[0] = 0.3;
  coeffs[1] = -0.7;
  coeffs[2] = 0.2;
  return make_connection("linear", coeffs, 3, 1);
}

double alpha_of(const Vec& z) { return 0.3 * z[0] - 0.7 * z[1] + 0.2 * z[2]; }

Connection su2_bump(double amp = 0.6) {
  Vec coeffs = Vec::Zero(3 + 1 + 9);
  coeffs.segment(0, 3) = vec3(0.1, -0.2, 0.1);
  coeffs[3] = 0.7;  // radius
  coeffs[4] = amp;
  coeffs[8] = -0.4 * amp;
  coeffs[12] = 0.25 * amp;
  return make_connection("bump", coeffs, 3, 3);
}

}  // namespace

TEST_CASE("curvature of constant connections") {
  const Chart chart = euclidean_ball();

  SUBCASE("constant abelian is flat") {
    Vec coeffs(3);
    coeffs << 0.4, -0.2, 0.9;
    const Connection conn = make_connection("constant", coeffs, 3, 1);
    const LieAlgebra g = LieAlgebra::u1();
    const CurvatureAt f = curvature_at(g, structure_constants(g), chart, conn, vec3(0.1, 0, 0));
    CHECK(f.max_abs() == 0.0);
  }

  SUBCASE("su2 constant: F_12 = [e1, e2] = 2 e3") {
    const LieAlgebra g = LieAlgebra::su2();
    const CurvatureAt f =
        curvature_at(g, structure_constants(g), chart, su2_constant(), vec3(0.1, 0.2, -0.1));
    Vec expected = Vec::Zero(3);
    expected[2] = 2.0;
    CHECK((f.f[0][1] - expected).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((f.f[1][0] + f.f[0][1]).cwiseAbs().maxCoeff() == 0.0);  // antisymmetric storage
    CHECK(f.f[0][2].cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("abelian curvature matches an independent FD of dA") {
  const Chart chart = euclidean_ball();
  const LieAlgebra g = LieAlgebra::u1();
  const StructureConstants c = structure_constants(g);
  const Connection conn = u1_linear();

  Rng rng(71);
  for (int k = 0; k < 10; ++k) {
    const Vec z = 0.4 * rng.normal_vector(3);
    const CurvatureAt f = curvature_at(g, c, chart, conn, z);
    for (int j = 1; j < 3; ++j) {
      const double dj_alpha =
          central_diff4([&](const Vec& x) { return alpha_of(x); }, z, j, 1e-3);
      // F_{j1} = d_j A_1 - d_1 A_j = d_j alpha
      CHECK(f.f[j][0][0] == doctest::Approx(dj_alpha).epsilon(1e-8));
    }
  }
}

TEST_CASE("curvature via FD partials agrees with analytic partials") {
  const Chart chart = euclidean_ball();
  const LieAlgebra g = LieAlgebra::su2();
  const StructureConstants c = structure_constants(g);
  const Connection analytic = su2_bump();
  Connection fd_only;
  fd_only.components = analytic.components;

  Rng rng(5);
  for (int k = 0; k < 5; ++k) {
    const Vec z = 0.3 * rng.normal_vector(3);
    const CurvatureAt fa = curvature_at(g, c, chart, analytic, z);
    const CurvatureAt fb = curvature_at(g, c, chart, fd_only, z);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        CHECK((fa.f[i][j] - fb.f[i][j]).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("generalized force") {
  const Chart chart = euclidean_ball();

  SUBCASE("zero field gives zero force") {
    const LieAlgebra g = LieAlgebra::su2();
    const Connection zero = zero_connection(3, 3);
    Vec xi(3);
    xi << 1, 2, 3;
    CHECK(lorentz_force(chart, g, structure_constants(g), zero, vec3(0.1, 0, 0),
                        vec3(1, 1, 0), xi)
              .cwiseAbs()
              .maxCoeff() == 0.0);
  }

  SUBCASE("abelian uniform field reproduces the cross product") {
    const LieAlgebra g = LieAlgebra::u1();
    const StructureConstants c = structure_constants(g);
    const double b = 0.8;
    Vec coeffs(1);
    coeffs << b;
    const Connection conn = make_connection("uniform_field_u1", coeffs, 3, 1);
    Rng rng(12);
    for (int k = 0; k < 50; ++k) {
      const Vec z = 0.4 * rng.normal_vector(3);
      const Vec v = rng.normal_vector(3);
      Vec xi(1);
      xi << 0.7;
      const Vec force = lorentz_force(chart, g, c, conn, z, v, xi);
      // v x B with B = (0, 0, b xi)
      const Vec expected = vec3(v[1] * b * xi[0], -v[0] * b * xi[0], 0.0);
      CHECK((force - expected).cwiseAbs().maxCoeff() < 1e-10);
    }
  }

  SUBCASE("antisymmetry: g(F v, v) = 0") {
    const LieAlgebra g = LieAlgebra::su2();
    const StructureConstants c = structure_constants(g);
    const Connection conn = su2_bump();
    Rng rng(9);
    for (int k = 0; k < 1000; ++k) {
      const Vec z = 0.35 * rng.normal_vector(3);
      const Vec v = rng.normal_vector(3);
      const Vec xi = rng.normal_vector(3);
      const Vec force = lorentz_force(chart, g, c, conn, z, v, xi);
      CHECK(std::abs(force.dot(chart.metric(z) * v)) < 1e-10 * (1.0 + v.squaredNorm()));
    }
  }
}

TEST_CASE("gauge transform basics") {
  const Chart chart = euclidean_ball();
  const LieAlgebra g = LieAlgebra::su2();
  const Connection conn = su2_bump();
  const Vec z = vec3(0.12, -0.2, 0.05);

  SUBCASE("identity gauge") {
    GaugeMap id;
    id.value = [](const Vec&) { return CMat::Identity(2, 2); };
    id.partials = [](const Vec&) { return std::vector<CMat>(3, CMat::Zero(2, 2)); };
    const Connection t = gauge_transform(g, chart, conn, id);
    CHECK((t.components(z) - conn.components(z)).cwiseAbs().maxCoeff() < 1e-13);
  }

  SUBCASE("constant gauge conjugates the components") {
    Vec zeta(3);
    zeta << 0.3, -0.5, 0.2;
    const CMat u0 = g.exp(zeta);
    GaugeMap u;
    u.value = [u0](const Vec&) { return u0; };
    u.partials = [](const Vec&) { return std::vector<CMat>(3, CMat::Zero(2, 2)); };
    const Connection t = gauge_transform(g, chart, conn, u);
    const Mat a = conn.components(z);
    const Mat ta = t.components(z);
    const CMat u0_inv = u0.inverse();
    for (int i = 0; i < 3; ++i) {
      const Vec expected = g.coordinates(u0_inv * g.matrix(a.row(i).transpose()) * u0);
      CHECK((ta.row(i).transpose() - expected).cwiseAbs().maxCoeff() < 1e-12);
    }
  }

  SUBCASE("abelian phase gauge shifts by the phase differential") {
    const LieAlgebra u1 = LieAlgebra::u1();
    const Connection a = u1_linear();
    const Vec theta_coeff = vec3(0.4, -0.2, 0.15);
    GaugeMap u;
    u.value = [theta_coeff](const Vec& x) {
      CMat m(1, 1);
      m(0, 0) = std::exp(Cplx(0.0, theta_coeff.dot(x)));
      return m;
    };
    const Connection t = gauge_transform(u1, chart, a, u);
    Rng rng(2);
    for (int k = 0; k < 5; ++k) {
      const Vec x = 0.4 * rng.normal_vector(3);
      const Mat got = t.components(x);
      for (int i = 0; i < 3; ++i) {
        const double dtheta =
            central_diff4([&](const Vec& y) { return theta_coeff.dot(y); }, x, i, 1e-3);
        CHECK(got(i, 0) == doctest::Approx(a.components(x)(i, 0) + dtheta).epsilon(1e-8));
      }
    }
  }
}

TEST_CASE("gauge covariance of the curvature") {
  const Chart chart = euclidean_ball();
  const LieAlgebra g = LieAlgebra::su2();
  const StructureConstants c = structure_constants(g);

  SUBCASE("identity gauge exactly") {
    GaugeMap id;
    id.value = [](const Vec&) { return CMat::Identity(2, 2); };
    id.partials = [](const Vec&) { return std::vector<CMat>(3, CMat::Zero(2, 2)); };
    CHECK(gauge_transform_curvature_check(g, c, chart, su2_bump(), id, {vec3(0.1, 0, 0.2)}) <
          1e-10);
  }

  SUBCASE("random catalog pairs stay below 1e-5") {
    Rng rng(77);
    for (int pair = 0; pair < 20; ++pair) {
      const Connection conn = su2_bump(0.3 + 0.4 * rng.uniform());
      GaugeBumpSpec spec;
      spec.center = 0.25 * rng.normal_vector(3);
      spec.radius = 0.5 + 0.3 * rng.uniform();
      spec.amp = 0.8 * rng.uniform();
      spec.zeta = rng.normal_vector(3);
      const GaugeMap u = make_gauge_map(g, {spec});
      std::vector<Vec> samples;
      for (int s = 0; s < 3; ++s) samples.push_back(0.3 * rng.normal_vector(3));
      CHECK(gauge_transform_curvature_check(g, c, chart, conn, u, samples) < 1e-5);
    }
  }

  SUBCASE("value-only gauge map (FD partials) stays below 1e-5") {
    GaugeBumpSpec spec;
    spec.center = vec3(0.1, 0.0, -0.1);
    spec.radius = 0.6;
    spec.amp = 0.5;
    spec.zeta = vec3(0.4, -0.3, 0.6);
    const GaugeMap analytic = make_gauge_map(g, {spec});
    GaugeMap value_only;
    value_only.value = analytic.value;
    CHECK(gauge_transform_curvature_check(g, c, chart, su2_bump(), value_only,
                                          {vec3(0.05, 0.1, -0.05), vec3(0.2, -0.1, 0.0)}) <
          1e-5);
  }
}

TEST_CASE("normal gauge") {
  const LieAlgebra u1 = LieAlgebra::u1();

  SUBCASE("purely normal abelian field is gauged away") {
    const Chart chart = halfspace();
    // A = alpha(z3) i dz3, alpha(s) = 0.5 + 0.3 s
    Connection conn = zero_connection(3, 1);
    conn.components = [](const Vec& z) {
      Mat a = Mat::Zero(3, 1);
      a(2, 0) = 0.5 + 0.3 * z[2];
      return a;
    };
    conn.partials = [](const Vec&) {
      std::vector<Mat> da(3, Mat::Zero(3, 1));
      da[2](2, 0) = 0.3;
      return da;
    };
    conn.second = nullptr;

    auto collar = std::make_shared<BoundaryNormalChart>(chart, vec3(0, 0, 0), 0.6);
    const auto [transformed, gauge] = normal_gauge(u1, chart, conn, collar);

    for (double t : {0.1, 0.25, 0.4}) {
      const Vec z = vec3(0.05, -0.1, t);
      // quadrature oracle: u = exp(-i int_0^t alpha)
      const double integral = 0.5 * t + 0.15 * t * t;
      const CMat u = gauge.value(z);
      CHECK(std::abs(u(0, 0) - std::exp(Cplx(0.0, -integral))) < 1e-8);
      CHECK((transformed.components(z)).cwiseAbs().maxCoeff() < 1e-8);
      const Vec ray = collar->ray_direction(z);
      const Vec a_of_ray = transformed.components(z).transpose() * ray;
      CHECK(a_of_ray.cwiseAbs().maxCoeff() < 1e-8);
    }
  }

  SUBCASE("field already in the radial normal gauge is untouched") {
    const Chart chart = euclidean_ball();
    Vec coeffs(6);
    coeffs << 0.0, 0.0, 1.0, 0.8, 0.1, 0.0;  // centre (0,0,1), r=0.8, amp=0.1, alpha=0
    const Connection conn = make_connection("angular_bump", coeffs, 3, 1);
    auto collar = std::make_shared<BoundaryNormalChart>(chart, vec3(0, 0, 1), 0.35);
    const auto [transformed, gauge] = normal_gauge(u1, chart, conn, collar);

    const Vec z = vec3(0.03, -0.04, 0.93);
    CHECK((gauge.value(z) - CMat::Identity(1, 1)).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((transformed.components(z) - conn.components(z)).cwiseAbs().maxCoeff() < 1e-8);

    // second application changes nothing: the transport sees A'(ray) ~ 0
    const auto [transformed2, gauge2] = normal_gauge(u1, chart, transformed, collar);
    CHECK((gauge2.value(z) - CMat::Identity(1, 1)).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((transformed2.components(z) - transformed.components(z)).cwiseAbs().maxCoeff() <
          1e-7);
  }
}

TEST_CASE("gauge ODE along a curve") {
  const Chart chart = euclidean_ball();
  const LieAlgebra g = LieAlgebra::su2();
  const Connection conn = su2_bump();

  PathSampler curve;
  curve.t0 = 0.0;
  curve.t1 = 1.2;
  const Vec z0 = vec3(-0.5, 0.1, -0.2);
  const Vec dir = vec3(0.8, -0.1, 0.3).normalized();
  curve.position = [z0, dir](double t) -> Vec { return z0 + t * dir; };
  curve.velocity = [dir](double) -> Vec { return dir; };

  SUBCASE("same connection keeps the identity") {
    const GaugeAlongCurve sol = gauge_ode_solve(g, conn, conn, curve, CMat::Identity(2, 2), 1e-3);
    CHECK((sol.values.back() - CMat::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-10);
  }

  SUBCASE("recovers the connecting gauge") {
    GaugeBumpSpec spec;
    spec.center = vec3(0.0, -0.1, 0.0);
    spec.radius = 0.7;
    spec.amp = 0.6;
    spec.zeta = vec3(0.5, 0.2, -0.4);
    const GaugeMap w = make_gauge_map(g, {spec});
    const Connection transformed = make_gauged_connection(g, chart, conn, {spec});

    const GaugeAlongCurve sol =
        gauge_ode_solve(g, conn, transformed, curve, w.value(curve.position(0.0)), 1e-3);
    CHECK(sol.max_group_defect < 1e-8);
    for (std::size_t k = 0; k < sol.times.size(); k += 200) {
      const CMat expected = w.value(curve.position(sol.times[k]));
      CHECK((sol.values[k] - expected).cwiseAbs().maxCoeff() < 1e-8);
    }
    const CMat expected_end = w.value(curve.position(curve.t1));
    CHECK((sol.values.back() - expected_end).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("boundary jet comparison") {
  const Chart chart = euclidean_ball();
  const Vec p = vec3(0, 0, 1);
  Vec coeffs(6);
  coeffs << 0.0, 0.0, 1.0, 0.8, 0.1, 0.0;
  const Connection a = make_connection("angular_bump", coeffs, 3, 1);

  SUBCASE("identical connections give zero residuals") {
    const std::vector<double> res = boundary_jet_compare(chart, a, a, p, 2);
    for (double r : res) CHECK(r == 0.0);
  }

  SUBCASE("quadratic transverse perturbation shows up at order 2 only") {
    const double c = 0.35;
    Connection b;
    b.components = [a, c](const Vec& z) -> Mat {
      const double depth = 1.0 - z.norm();  // transverse coordinate on the ball
      Mat comps = a.components(z);
      comps(0, 0) += c * depth * depth;
      return comps;
    };
    const double h = 1e-2;
    const std::vector<double> res = boundary_jet_compare(chart, a, b, p, 2, h);
    CHECK(res[0] < 1e-12);
    CHECK(res[1] < 1e-8);
    CHECK(res[2] == doctest::Approx(2.0 * c).epsilon(1e-2));
    CHECK_THROWS_AS(boundary_jet_compare(chart, a, b, p, 3), NumericsError);
    CHECK_THROWS_AS(boundary_jet_compare(chart, a, b, vec3(0, 0, 0.5), 1), GeometryError);
  }
}

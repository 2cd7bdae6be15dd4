#include "ymlens/gauge_field.hpp"

#include <cmath>

#include "ymlens/finite_diff.hpp"

namespace ymlens {

Connection zero_connection(int n, int d) {
  Connection conn;
  conn.components = [n, d](const Vec&) { return Mat::Zero(n, d); };
  conn.partials = [n, d](const Vec&) { return std::vector<Mat>(n, Mat::Zero(n, d)); };
  conn.second = [n, d](const Vec&) {
    return std::vector<std::vector<Mat>>(n, std::vector<Mat>(n, Mat::Zero(n, d)));
  };
  return conn;
}

std::vector<Mat> connection_partials(const Chart& chart, const Connection& conn, const Vec& z) {
  if (conn.partials) return conn.partials(z);
  const double h = chart.fd_step_at(z);
  std::vector<Mat> out(chart.dim);
  for (int j = 0; j < chart.dim; ++j)
    out[j] = central_diff4([&](const Vec& x) { return conn.components(x); }, z, j, h);
  return out;
}

std::vector<std::vector<Mat>> connection_second_partials(const Chart& chart,
                                                         const Connection& conn, const Vec& z) {
  if (conn.second) return conn.second(z);
  const double h = chart.fd_step_at(z);
  std::vector<std::vector<Mat>> out(chart.dim);
  for (int k = 0; k < chart.dim; ++k) {
    out[k].resize(chart.dim);
    for (int j = 0; j < chart.dim; ++j)
      out[k][j] = central_diff4(
          [&, j](const Vec& x) { return connection_partials(chart, conn, x)[j]; }, z, k, h);
  }
  return out;
}

double CurvatureAt::max_abs() const {
  double worst = 0.0;
  for (const auto& row : f)
    for (const auto& entry : row)
      if (entry.size() > 0) worst = std::max(worst, entry.cwiseAbs().maxCoeff());
  return worst;
}

CurvatureAt curvature_at(const LieAlgebra& algebra, const StructureConstants& constants,
                         const Chart& chart, const Connection& conn, const Vec& z) {
  const int n = chart.dim;
  const int d = algebra.dim();
  const Mat a = conn.components(z);
  const std::vector<Mat> da = connection_partials(chart, conn, z);

  CurvatureAt out;
  out.f.assign(n, std::vector<Vec>(n, Vec::Zero(d)));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      Vec f = da[i].row(j).transpose() - da[j].row(i).transpose();
      f += constants.bracket(a.row(i).transpose(), a.row(j).transpose());
      out.f[i][j] = f;
      out.f[j][i] = -f;
    }
  return out;
}

std::vector<CurvatureAt> curvature_partials(const LieAlgebra& algebra,
                                            const StructureConstants& constants,
                                            const Chart& chart, const Connection& conn,
                                            const Vec& z) {
  const int n = chart.dim;
  const int d = algebra.dim();
  std::vector<CurvatureAt> out(n);

  if (conn.has_partials() && conn.has_second()) {
    const Mat a = conn.components(z);
    const std::vector<Mat> da = conn.partials(z);
    const std::vector<std::vector<Mat>> dda = conn.second(z);
    for (int m = 0; m < n; ++m) {
      out[m].f.assign(n, std::vector<Vec>(n, Vec::Zero(d)));
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
          Vec f = dda[m][i].row(j).transpose() - dda[m][j].row(i).transpose();
          f += constants.bracket(da[m].row(i).transpose(), a.row(j).transpose());
          f += constants.bracket(a.row(i).transpose(), da[m].row(j).transpose());
          out[m].f[i][j] = f;
          out[m].f[j][i] = -f;
        }
    }
    return out;
  }

  const double h = chart.fd_step_at(z);
  for (int m = 0; m < n; ++m) {
    out[m].f.assign(n, std::vector<Vec>(n, Vec::Zero(d)));
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        const Vec f = central_diff4(
            [&](const Vec& x) -> Vec {
              return curvature_at(algebra, constants, chart, conn, x).f[i][j];
            },
            z, m, h);
        out[m].f[i][j] = f;
        out[m].f[j][i] = -f;
      }
  }
  return out;
}

Vec lorentz_force(const Chart& chart, const LieAlgebra& algebra,
                  const StructureConstants& constants, const Connection& conn, const Vec& z,
                  const Vec& v, const Vec& xi) {
  const int n = chart.dim;
  const CurvatureAt fc = curvature_at(algebra, constants, chart, conn, z);
  const Mat g = chart.metric(z);
  Vec lowered(n);
  for (int j = 0; j < n; ++j) {
    double s = 0.0;
    for (int k = 0; k < n; ++k)
      if (k != j) s += fc.f[j][k].dot(xi) * v[k];
    lowered[j] = s;
  }
  return g.llt().solve(lowered);
}

std::vector<CMat> GaugeMap::partials_at(const Chart& chart, const Vec& z) const {
  if (partials) return partials(z);
  const double h = chart.fd_step_at(z);
  std::vector<CMat> out(chart.dim);
  for (int i = 0; i < chart.dim; ++i)
    out[i] = central_diff4([&](const Vec& x) { return value(x); }, z, i, h);
  return out;
}

Connection gauge_transform(const LieAlgebra& algebra, const Chart& chart, const Connection& conn,
                           const GaugeMap& gauge) {
  Connection out;
  out.components = [&algebra, &chart, conn, gauge](const Vec& z) -> Mat {
    const int n = chart.dim;
    const int d = algebra.dim();
    const CMat u = gauge.value(z);
    if (algebra.group_defect(u) > 1e-6)
      throw StructuralError("gauge map leaves the group beyond tolerance");
    const CMat u_inv = u.inverse();
    const std::vector<CMat> du = gauge.partials_at(chart, z);
    const Mat a = conn.components(z);
    Mat result(n, d);
    for (int i = 0; i < n; ++i) {
      const CMat term = u_inv * du[i] + u_inv * algebra.matrix(a.row(i).transpose()) * u;
      result.row(i) = algebra.coordinates(term).transpose();
    }
    return result;
  };
  return out;
}

double gauge_transform_curvature_check(const LieAlgebra& algebra,
                                       const StructureConstants& constants, const Chart& chart,
                                       const Connection& conn, const GaugeMap& gauge,
                                       const std::vector<Vec>& samples) {
  const Connection transformed = gauge_transform(algebra, chart, conn, gauge);
  double worst = 0.0;
  for (const Vec& z : samples) {
    const CurvatureAt f = curvature_at(algebra, constants, chart, conn, z);
    const CurvatureAt ft = curvature_at(algebra, constants, chart, transformed, z);
    const CMat u = gauge.value(z);
    const CMat u_inv = u.inverse();
    for (int i = 0; i < chart.dim; ++i)
      for (int j = i + 1; j < chart.dim; ++j) {
        const Vec expected = algebra.coordinates(u_inv * algebra.matrix(f.f[i][j]) * u);
        worst = std::max(worst, (ft.f[i][j] - expected).cwiseAbs().maxCoeff());
      }
  }
  return worst;
}

namespace {

// Transport along the inward normal ray through z: solves the joint geodesic +
// transport system with classical RK4 at a fixed step, then projects back to
// the group when the defect exceeds 1e-10.
CMat transport_along_ray(const LieAlgebra& algebra, const Chart& chart, const Connection& conn,
                         const BoundaryNormalChart& collar, const Vec& z, double step) {
  const auto [zp, t_total] = collar.invert(z);
  const int m = algebra.matrix_size();
  CMat u = CMat::Identity(m, m);
  if (std::abs(t_total) < 1e-14) return u;

  auto start = collar.ray_state(zp, 0.0);
  Vec zz = start.first, vv = start.second;
  const int steps = std::max(1, static_cast<int>(std::ceil(std::abs(t_total) / step)));
  const double h = t_total / steps;

  struct State {
    Vec z, v;
    CMat u;
  };
  auto rhs = [&](const State& s, State& ds) {
    const MetricJet jet = metric_jet(chart, s.z);
    ds.z = s.v;
    ds.v = -jet.christoffel_contract(s.v);
    const Mat a = conn.components(s.z);
    const Vec a_of_v = a.transpose() * s.v;  // coordinates of A(v)
    ds.u = -algebra.matrix(a_of_v) * s.u;
  };
  State s{zz, vv, u}, k1, k2, k3, k4, tmp;
  for (int i = 0; i < steps; ++i) {
    rhs(s, k1);
    tmp = {s.z + 0.5 * h * k1.z, s.v + 0.5 * h * k1.v, s.u + 0.5 * h * k1.u};
    rhs(tmp, k2);
    tmp = {s.z + 0.5 * h * k2.z, s.v + 0.5 * h * k2.v, s.u + 0.5 * h * k2.u};
    rhs(tmp, k3);
    tmp = {s.z + h * k3.z, s.v + h * k3.v, s.u + h * k3.u};
    rhs(tmp, k4);
    s.z += (h / 6.0) * (k1.z + 2.0 * k2.z + 2.0 * k3.z + k4.z);
    s.v += (h / 6.0) * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v);
    s.u += (h / 6.0) * (k1.u + 2.0 * k2.u + 2.0 * k3.u + k4.u);
  }
  if (algebra.group_defect(s.u) > 1e-10) s.u = algebra.project_to_group(s.u);
  return s.u;
}

}  // namespace

std::pair<Connection, GaugeMap> normal_gauge(const LieAlgebra& algebra, const Chart& chart,
                                             const Connection& conn,
                                             std::shared_ptr<const BoundaryNormalChart> collar) {
  GaugeMap gauge;
  gauge.value = [&algebra, &chart, conn, collar](const Vec& z) -> CMat {
    return transport_along_ray(algebra, chart, conn, *collar, z, 1e-3);
  };
  Connection out = gauge_transform(algebra, chart, conn, gauge);
  return {std::move(out), std::move(gauge)};
}

GaugeAlongCurve gauge_ode_solve(const LieAlgebra& algebra, const Connection& conn_a,
                                const Connection& conn_b, const PathSampler& curve,
                                const CMat& u0, double step) {
  const double span = curve.t1 - curve.t0;
  if (span < 0.0) throw NumericsError("gauge ODE path has negative span");
  const int steps = std::max(1, static_cast<int>(std::ceil(span / step)));
  const double h = span / steps;

  auto algebra_of = [&](const Connection& c, double t) -> CMat {
    const Vec z = curve.position(t);
    const Vec v = curve.velocity(t);
    const Vec coords = c.components(z).transpose() * v;
    return algebra.matrix(coords);
  };
  auto rhs = [&](double t, const CMat& u) -> CMat {
    return u * algebra_of(conn_b, t) - algebra_of(conn_a, t) * u;
  };

  GaugeAlongCurve out;
  CMat u = u0;
  out.times.push_back(curve.t0);
  out.values.push_back(u);
  for (int i = 0; i < steps; ++i) {
    const double t = curve.t0 + i * h;
    const CMat k1 = rhs(t, u);
    const CMat k2 = rhs(t + 0.5 * h, u + 0.5 * h * k1);
    const CMat k3 = rhs(t + 0.5 * h, u + 0.5 * h * k2);
    const CMat k4 = rhs(t + h, u + h * k3);
    u += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    out.times.push_back(t + h);
    out.values.push_back(u);
    out.max_group_defect = std::max(out.max_group_defect, algebra.group_defect(u));
  }
  return out;
}

std::vector<double> boundary_jet_compare(const Chart& chart, const Connection& conn_a,
                                         const Connection& conn_b, const Vec& p, int order,
                                         double h) {
  if (order > 2) throw NumericsError("boundary jet comparison supports orders <= 2 only");
  if (std::abs(chart.boundary(p)) > 1e-8)
    throw GeometryError("jet comparison requires a boundary point");
  const Vec inward = -outer_unit_normal(chart, p);

  std::vector<Mat> diff(4);
  for (int k = 0; k < 4; ++k) {
    const Vec z = p + (k * h) * inward;
    diff[k] = conn_a.components(z) - conn_b.components(z);
  }
  std::vector<double> residuals;
  residuals.push_back(diff[0].cwiseAbs().maxCoeff());
  if (order >= 1)
    residuals.push_back(one_sided_first(diff[0], diff[1], diff[2], h).cwiseAbs().maxCoeff());
  if (order >= 2)
    residuals.push_back(
        one_sided_second(diff[0], diff[1], diff[2], diff[3], h).cwiseAbs().maxCoeff());
  return residuals;
}

}  // namespace ymlens

#include "ymlens/variational.hpp"

#include <cmath>

#include "ymlens/finite_diff.hpp"

namespace ymlens {

Mat wong_rhs_jacobian(const WongSystem& sys, const Vec& state) {
  const int n = sys.n(), d = sys.d();
  const Vec z = state.head(n);
  const Vec v = state.segment(n, n);
  const Vec xi = state.tail(d);
  const Chart& chart = *sys.chart;

  const MetricJet jet = metric_jet(chart, z);
  const CurvatureAt fc = curvature_at(*sys.algebra, sys.constants, chart, *sys.conn, z);
  const Mat a = sys.conn->components(z);
  const std::vector<Mat> da = connection_partials(chart, *sys.conn, z);
  const std::vector<std::vector<Mat>> dgamma = christoffel_partials(chart, z);
  const std::vector<CurvatureAt> df =
      curvature_partials(*sys.algebra, sys.constants, chart, *sys.conn, z);
  const std::vector<Mat> dg =
      chart.metric_partials ? chart.metric_partials(z) : [&] {
        std::vector<Mat> out(n);
        const double h = chart.fd_step_at(z);
        for (int k = 0; k < n; ++k)
          out[k] = central_diff4([&](const Vec& x) { return chart.metric(x); }, z, k, h);
        return out;
      }();

  Mat jac = Mat::Zero(2 * n + d, 2 * n + d);

  // z-row: dz/dt = v
  jac.block(0, n, n, n).setIdentity();

  // v-row
  Vec f_contract(n);  // (F v . xi)_j
  for (int j = 0; j < n; ++j) {
    double s = 0.0;
    for (int k = 0; k < n; ++k)
      if (k != j) s += fc.f[j][k].dot(xi) * v[k];
    f_contract[j] = s;
  }
  for (int m = 0; m < n; ++m) {
    // d/dv^m
    Vec col = Vec::Zero(n);
    for (int i = 0; i < n; ++i) col[i] = -2.0 * v.dot(jet.christoffel[i].col(m));
    Vec fm(n);
    for (int j = 0; j < n; ++j) fm[j] = j == m ? 0.0 : fc.f[j][m].dot(xi);
    jac.block(n, n + m, n, 1) = col + jet.g_inv * fm;

    // d/dz^m
    Vec zcol(n);
    for (int i = 0; i < n; ++i) zcol[i] = -v.dot(dgamma[m][i] * v);
    Vec dfm(n);
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < n; ++k)
        if (k != j) s += df[m].f[j][k].dot(xi) * v[k];
      dfm[j] = s;
    }
    const Mat dginv = -jet.g_inv * dg[m] * jet.g_inv;
    jac.block(n, m, n, 1) = zcol + dginv * f_contract + jet.g_inv * dfm;
  }
  for (int b = 0; b < d; ++b) {
    Vec fb(n);
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < n; ++k)
        if (k != j) s += fc.f[j][k][b] * v[k];
      fb[j] = s;
    }
    jac.block(n, 2 * n + b, n, 1) = jet.g_inv * fb;
  }

  // xi-row: xi' = -M(A(v)) xi
  const Vec a_of_v = a.transpose() * v;
  jac.block(2 * n, 2 * n, d, d) = -sys.constants.contract(a_of_v);
  for (int i = 0; i < n; ++i)
    jac.block(2 * n, n + i, d, 1) = -sys.constants.contract(a.row(i).transpose()) * xi;
  for (int m = 0; m < n; ++m)
    jac.block(2 * n, m, d, 1) = -sys.constants.contract(da[m].transpose() * v) * xi;

  return jac;
}

Mat wong_rhs_jacobian_fd(const WongSystem& sys, const Vec& state) {
  const int dim = sys.state_dim();
  const double h = 1e-6 * (1.0 + state.norm());
  Mat jac(dim, dim);
  for (int k = 0; k < dim; ++k) {
    Vec sp = state, sm = state;
    sp[k] += h;
    sm[k] -= h;
    jac.col(k) = (sys.rhs(sp) - sys.rhs(sm)) / (2.0 * h);
  }
  return jac;
}

namespace {

ode::Rhs augmented_rhs(const WongSystem& sys) {
  const int s = sys.state_dim();
  return [&sys, s](double, const Vec& y, Vec& dydt) {
    dydt.resize(s + s * s);
    const Vec phi = y.head(s);
    dydt.head(s) = sys.rhs(phi);
    const Mat jac = wong_rhs_jacobian(sys, phi);
    Eigen::Map<const Mat> j(y.data() + s, s, s);
    Eigen::Map<Mat> jdot(dydt.data() + s, s, s);
    jdot = jac * j;
  };
}

}  // namespace

std::pair<PhasePoint, JacobianState> flow_with_jacobian(const WongSystem& sys, const Vec& state0,
                                                        double t_end,
                                                        const IntegratorConfig& config) {
  const int s = sys.state_dim();
  Vec y0(s + s * s);
  y0.head(s) = state0;
  Eigen::Map<Mat>(y0.data() + s, s, s) = Mat::Identity(s, s);

  ode::Options opts = config.ode_options(sys.chart->box.diameter() / 4.0);
  const ode::DensePath path = ode::integrate_dense(augmented_rhs(sys), 0.0, y0, t_end, opts);
  const Vec yend = path.end_state();
  JacobianState jstate(sys.n(), sys.d(), Eigen::Map<const Mat>(yend.data() + s, s, s));
  return {PhasePoint::unpack(sys.n(), sys.d(), yend.head(s)), std::move(jstate)};
}

namespace {

WeightPair extract_weights(const WongSystem& sys_tilde, const Chart& chart, const Vec& state,
                           double remaining, const IntegratorConfig& config) {
  const auto [end, jac] = flow_with_jacobian(sys_tilde, state, remaining, config);
  const int n = sys_tilde.n();
  const Vec z = state.head(n);
  const Mat g_inv = chart.metric(z).llt().solve(Mat::Identity(n, n));
  WeightPair wp;
  wp.w = jac.dThetadv() * g_inv;
  wp.q = -jac.dThetadxi();
  return wp;
}

}  // namespace

std::vector<WeightPair> weights_along(const WongSystem& sys_tilde, const Chart& chart,
                                      const ode::DensePath& base_path, double ell,
                                      const std::vector<double>& node_times,
                                      const IntegratorConfig& config) {
  std::vector<WeightPair> out;
  out.reserve(node_times.size());
  for (double s : node_times) {
    if (s < -1e-12 || s > ell + 1e-12)
      throw DataError("weight node lies beyond the trajectory span");
    out.push_back(extract_weights(sys_tilde, chart, base_path.eval(s), ell - s, config));
  }
  return out;
}

std::vector<std::pair<double, double>> gauss_legendre_nodes(double length, int node_count) {
  if (node_count < 2) node_count = 2;
  const int panels = std::max(1, node_count / 2);
  const double h = length / panels;
  const double offset = 0.5 * h / std::sqrt(3.0);
  std::vector<std::pair<double, double>> nodes;
  nodes.reserve(2 * panels);
  for (int p = 0; p < panels; ++p) {
    const double mid = (p + 0.5) * h;
    nodes.emplace_back(mid - offset, 0.5 * h);
    nodes.emplace_back(mid + offset, 0.5 * h);
  }
  return nodes;
}

PseudoLinearizationResult pseudo_linearization_residual(const WongSystem& sys,
                                                        const WongSystem& sys_tilde,
                                                        const PhasePoint& entry, int node_count,
                                                        const IntegratorConfig& config) {
  const IntegrationResult base = integrate(sys, entry, config);
  if (base.exit.trapped)
    throw NumericsError("pseudo-linearization requires an exiting trajectory");
  const double tau = base.exit.time;

  PseudoLinearizationResult result;
  result.travel_time = tau;
  result.node_count = node_count;

  const Vec phi_end = base.exit.state.packed();
  const Vec phi_tilde_end =
      tau > 0.0 ? integrate_to_time(sys_tilde, entry.packed(), tau, config).end_state()
                : entry.packed();
  result.rhs = phi_end - phi_tilde_end;

  result.lhs = Vec::Zero(sys.state_dim());
  for (const auto& [s, w] : gauss_legendre_nodes(tau, node_count)) {
    const Vec state = base.path.eval(s);
    const auto [end, jac] = flow_with_jacobian(sys_tilde, state, tau - s, config);
    result.lhs += w * (jac.j * (sys.rhs(state) - sys_tilde.rhs(state)));
  }
  return result;
}

XRayInput build_xray_input(const LieAlgebra& algebra, const StructureConstants& constants,
                           const Chart& chart, const Connection& conn_a,
                           const Connection& conn_b) {
  XRayInput input;
  input.two_form = [&algebra, &constants, &chart, &conn_a, &conn_b](const Vec& z) {
    const CurvatureAt fa = curvature_at(algebra, constants, chart, conn_a, z);
    const CurvatureAt fb = curvature_at(algebra, constants, chart, conn_b, z);
    std::vector<std::vector<Vec>> out = fa.f;
    for (std::size_t i = 0; i < out.size(); ++i)
      for (std::size_t j = 0; j < out.size(); ++j) out[i][j] -= fb.f[i][j];
    return out;
  };
  input.one_form = [&constants, &conn_a, &conn_b, n = chart.dim](const Vec& z) {
    const Mat diff = conn_a.components(z) - conn_b.components(z);
    std::vector<Mat> out(n);
    for (int k = 0; k < n; ++k) out[k] = constants.contract(diff.row(k).transpose());
    return out;
  };
  return input;
}

Vec xray_transform(const WongSystem& sys, const WongSystem& sys_tilde, const XRayInput& input,
                   const PhasePoint& entry, int node_count, const IntegratorConfig& config) {
  const IntegrationResult base = integrate(sys, entry, config);
  if (base.exit.trapped) throw NumericsError("ray transform requires an exiting trajectory");
  const double tau = base.exit.time;
  const int n = sys.n(), d = sys.d();

  Vec out = Vec::Zero(n);
  for (const auto& [s, w] : gauss_legendre_nodes(tau, node_count)) {
    const Vec state = base.path.eval(s);
    const Vec z = state.head(n);
    const Vec v = state.segment(n, n);
    const Vec xi = state.tail(d);
    const WeightPair wp = extract_weights(sys_tilde, *sys.chart, state, tau - s, config);

    const auto f = input.two_form(z);
    Vec f_of_v(n);
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int k = 0; k < n; ++k)
        if (k != j) acc += f[j][k].dot(xi) * v[k];
      f_of_v[j] = acc;
    }
    const auto beta = input.one_form(z);
    Mat beta_of_v = Mat::Zero(d, d);
    for (int k = 0; k < n; ++k) beta_of_v += v[k] * beta[k];

    out += w * (wp.w * f_of_v + wp.q * (beta_of_v * xi));
  }
  return out;
}

}  // namespace ymlens

#include "ymlens/wong_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "ymlens/rng.hpp"

namespace ymlens {

Vec PhasePoint::packed() const {
  Vec out(z.size() + v.size() + xi.size());
  out << z, v, xi;
  return out;
}

PhasePoint PhasePoint::unpack(int n, int d, const Vec& state) {
  if (state.size() != 2 * n + d) throw NumericsError("phase state has wrong dimension");
  PhasePoint p;
  p.z = state.head(n);
  p.v = state.segment(n, n);
  p.xi = state.tail(d);
  return p;
}

void IntegratorConfig::validate() const {
  if (rel_tol <= 0.0 || abs_tol <= 0.0 || event_tol <= 0.0 || max_time <= 0.0 ||
      initial_step <= 0.0)
    throw ConfigError("integrator tolerances must be positive");
  if (method != "dopri5") throw ConfigError("unknown integrator method: " + method);
}

ode::Options IntegratorConfig::ode_options(double horizon_scale) const {
  ode::Options opts;
  opts.rel_tol = rel_tol;
  opts.abs_tol = abs_tol;
  opts.initial_step = initial_step;
  opts.max_step = max_step > 0.0 ? max_step : horizon_scale;
  opts.max_steps = max_steps;
  return opts;
}

WongSystem make_system(const Chart& chart, const Connection& conn, const LieAlgebra& algebra) {
  WongSystem sys;
  sys.chart = &chart;
  sys.conn = &conn;
  sys.algebra = &algebra;
  sys.constants = structure_constants(algebra);
  return sys;
}

Vec WongSystem::rhs(const Vec& state) const {
  const int nn = n(), dd = d();
  const Vec z = state.head(nn);
  const Vec v = state.segment(nn, nn);
  const Vec xi = state.tail(dd);

  const MetricJet jet = metric_jet(*chart, z);
  const CurvatureAt fc = curvature_at(*algebra, constants, *chart, *conn, z);

  Vec lowered(nn);
  for (int j = 0; j < nn; ++j) {
    double s = 0.0;
    for (int k = 0; k < nn; ++k)
      if (k != j) s += fc.f[j][k].dot(xi) * v[k];
    lowered[j] = s;
  }

  Vec out(2 * nn + dd);
  out.head(nn) = v;
  out.segment(nn, nn) = -jet.christoffel_contract(v) + jet.g_inv * lowered;
  const Vec a_of_v = conn->components(z).transpose() * v;
  out.tail(dd) = -constants.contract(a_of_v) * xi;
  return out;
}

ode::Rhs WongSystem::rhs_callable() const {
  return [this](double, const Vec& y, Vec& dydt) { dydt = rhs(y); };
}

namespace {

double charge_norm(const WongSystem& sys, const Vec& xi) {
  return sys.algebra->norm(sys.algebra->raise(xi));
}

}  // namespace

IntegrationResult integrate(const WongSystem& sys, const PhasePoint& start,
                            const IntegratorConfig& config) {
  config.validate();
  const int n = sys.n(), d = sys.d();
  IntegrationResult result;

  const double rho0 = sys.chart->boundary(start.z) - config.exit_level;
  if (std::abs(rho0) < 1e-9) {
    const Vec nu = outer_unit_normal(*sys.chart, start.z, config.exit_level);
    const double inward = start.v.dot(sys.chart->metric(start.z) * nu);
    if (inward > config.glancing_tol) {
      // Already on the exit surface moving outward: travel time zero.
      result.exit.time = 0.0;
      result.exit.state = start;
      ode::DenseStep trivial;
      trivial.t0 = 0.0;
      trivial.h = 1.0;
      trivial.cont.assign(5, Vec::Zero(2 * n + d));
      trivial.cont[0] = start.packed();
      result.path.push(std::move(trivial));
      result.path.set_end(0.0, start.packed());
      return result;
    }
    if (std::abs(inward) <= config.glancing_tol) result.exit.glancing = true;
  }

  auto monitor = [&](double, const Vec& y) -> double {
    return sys.chart->boundary(y.head(n)) - config.exit_level;
  };
  ode::Options opts = config.ode_options(sys.chart->box.diameter() / 8.0);
  ode::EventIntegration ev = ode::integrate_with_event(
      sys.rhs_callable(), 0.0, start.packed(), config.max_time, monitor, config.event_tol, opts);

  result.path = std::move(ev.path);
  if (ev.event_hit) {
    result.exit.time = ev.t_event;
    result.exit.state = PhasePoint::unpack(n, d, ev.y_event);
  } else {
    result.exit.trapped = true;
    result.exit.time = config.max_time;
    result.exit.state = PhasePoint::unpack(n, d, result.path.end_state());
  }

  // Conservation diagnostics along accepted steps.
  const double xi0 = charge_norm(sys, start.xi);
  for (const auto& step : result.path.steps()) {
    const PhasePoint p = PhasePoint::unpack(n, d, step.eval(1.0));
    result.max_speed_drift =
        std::max(result.max_speed_drift, std::abs(1.0 - metric_norm(*sys.chart, p.z, p.v)));
    result.max_charge_drift =
        std::max(result.max_charge_drift, std::abs(charge_norm(sys, p.xi) - xi0));
  }
  return result;
}

ode::DensePath integrate_to_time(const WongSystem& sys, const Vec& state0, double t_end,
                                 const IntegratorConfig& config) {
  config.validate();
  ode::Options opts = config.ode_options(sys.chart->box.diameter() / 4.0);
  return ode::integrate_dense(sys.rhs_callable(), 0.0, state0, t_end, opts);
}

std::optional<double> exit_time(const WongSystem& sys, const PhasePoint& phi,
                                const IntegratorConfig& config) {
  const IntegrationResult res = integrate(sys, phi, config);
  if (res.exit.trapped) return std::nullopt;
  return res.exit.time;
}

std::vector<LensDatum> lens_data(const WongSystem& sys, const std::vector<PhasePoint>& entries,
                                 const IntegratorConfig& config, int threads) {
  std::vector<LensDatum> table(entries.size());
  const int workers = std::max(1, threads);

  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      LensDatum& row = table[i];
      row.entry = entries[i];
      try {
        const IntegrationResult res = integrate(sys, entries[i], config);
        row.exit = res.exit.state;
        row.travel_time = res.exit.time;
        row.trapped = res.exit.trapped;
        row.glancing = res.exit.glancing;
      } catch (const Error& e) {
        row.error = e.what();
      }
    }
  };

  if (workers == 1 || entries.size() < 2) {
    work(0, entries.size());
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (entries.size() + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(entries.size(), begin + chunk);
      if (begin >= end) break;
      pool.emplace_back(work, begin, end);
    }
    for (auto& th : pool) th.join();
  }
  return table;
}

ConvexityReport ym_convex_function_check(const WongSystem& sys, const ScalarField& f,
                                         const std::vector<Vec>& xi_samples,
                                         const std::vector<std::pair<Vec, Vec>>& zv_samples) {
  ConvexityReport report;
  report.minimum = std::numeric_limits<double>::infinity();
  for (const auto& [z, v] : zv_samples) {
    const double hess = hessian_scalar(*sys.chart, f, z, v);
    const Vec grad = riemannian_gradient(*sys.chart, f, z);
    const CurvatureAt fc = curvature_at(*sys.algebra, sys.constants, *sys.chart, *sys.conn, z);
    Vec coupling = Vec::Zero(sys.d());
    for (int j = 0; j < sys.n(); ++j)
      for (int k = 0; k < sys.n(); ++k)
        if (j != k) coupling += fc.f[j][k] * (v[j] * grad[k]);
    for (const Vec& xi : xi_samples) {
      const double q = hess + coupling.dot(xi);
      ++report.samples;
      if (q < report.minimum) {
        report.minimum = q;
        report.argmin_z = z;
        report.argmin_v = v;
        report.argmin_xi = xi;
      }
    }
  }
  return report;
}

ConvexityReport ym_convex_boundary_check(const WongSystem& sys,
                                         const std::vector<Vec>& xi_samples,
                                         const std::vector<std::pair<Vec, Vec>>& zv_samples) {
  ConvexityReport report;
  report.minimum = std::numeric_limits<double>::infinity();
  for (const auto& [z, v] : zv_samples) {
    const double lambda = second_fundamental_form(*sys.chart, z, v);
    const Vec nu = outer_unit_normal(*sys.chart, z);
    const CurvatureAt fc = curvature_at(*sys.algebra, sys.constants, *sys.chart, *sys.conn, z);
    Vec coupling = Vec::Zero(sys.d());
    for (int j = 0; j < sys.n(); ++j)
      for (int k = 0; k < sys.n(); ++k)
        if (j != k) coupling += fc.f[j][k] * (v[j] * nu[k]);
    for (const Vec& xi : xi_samples) {
      const double q = lambda + coupling.dot(xi);
      ++report.samples;
      if (q < report.minimum) {
        report.minimum = q;
        report.argmin_z = z;
        report.argmin_v = v;
        report.argmin_xi = xi;
      }
    }
  }
  return report;
}

TrappingReport nontrapping_probe(const WongSystem& sys, const std::vector<PhasePoint>& starts,
                                 const IntegratorConfig& config, int threads) {
  const std::vector<LensDatum> rows = lens_data(sys, starts, config, threads);
  TrappingReport report;
  report.total = static_cast<int>(rows.size());
  report.max_time = config.max_time;
  for (const auto& row : rows)
    if (!row.ok() || row.trapped) ++report.trapped;
  report.fraction = report.total == 0 ? 0.0 : double(report.trapped) / double(report.total);
  return report;
}

std::vector<Vec> sample_interior_points(const Chart& chart, int count, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Vec> out;
  int guard = 0;
  while (static_cast<int>(out.size()) < count && guard < 100000) {
    ++guard;
    Vec z(chart.dim);
    for (int i = 0; i < chart.dim; ++i) z[i] = rng.uniform(chart.box.lo[i], chart.box.hi[i]);
    if (chart.boundary(z) < -1e-6) out.push_back(z);
  }
  if (static_cast<int>(out.size()) < count)
    throw GeometryError("interior sampling failed; is the domain box sensible?");
  return out;
}

std::vector<Vec> sample_boundary_points(const Chart& chart, int count, std::uint64_t seed) {
  Rng rng(seed);
  // Star-shaped search from the box centre along random directions.
  const Vec center = 0.5 * (chart.box.lo + chart.box.hi);
  if (chart.boundary(center) >= 0.0)
    throw GeometryError("box centre is not interior; cannot sample the boundary");
  const double r_max = 0.5 * (chart.box.hi - chart.box.lo).minCoeff();

  std::vector<Vec> out;
  int guard = 0;
  while (static_cast<int>(out.size()) < count && guard < 100000) {
    ++guard;
    Vec dir = rng.normal_vector(chart.dim);
    if (dir.norm() < 1e-12) continue;
    dir.normalize();
    double lo = 0.0, hi = r_max;
    if (chart.boundary(center + hi * dir) <= 0.0) continue;  // boundary beyond the box
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (chart.boundary(center + mid * dir) <= 0.0 ? lo : hi) = mid;
    }
    Vec z = center + 0.5 * (lo + hi) * dir;
    // Newton polish onto the level set.
    for (int it = 0; it < 20; ++it) {
      const double r = chart.boundary(z);
      if (std::abs(r) < 1e-13) break;
      const Vec g = chart.grad_boundary(z);
      z -= (r / g.squaredNorm()) * g;
    }
    if (std::abs(chart.boundary(z)) < 1e-10) out.push_back(z);
  }
  if (static_cast<int>(out.size()) < count) throw GeometryError("boundary sampling failed");
  return out;
}

std::vector<std::pair<Vec, Vec>> sample_sphere_grid(const Chart& chart, int count,
                                                    std::uint64_t seed) {
  const std::vector<Vec> zs = sample_interior_points(chart, (count + 1) / 2, seed);
  Rng rng(seed ^ 0x9e3779b97f4a7c15ull);
  std::vector<std::pair<Vec, Vec>> out;
  for (const Vec& z : zs) {
    Vec v = rng.normal_vector(chart.dim);
    if (v.norm() < 1e-12) v = Vec::Unit(chart.dim, 0);
    v = unit_normalize(chart, z, v);
    out.emplace_back(z, v);
    out.emplace_back(z, -v);  // antipodes keep odd terms honest
  }
  return out;
}

std::vector<std::pair<Vec, Vec>> sample_boundary_sphere_grid(const Chart& chart, int count,
                                                             std::uint64_t seed) {
  const std::vector<Vec> zs = sample_boundary_points(chart, (count + 1) / 2, seed);
  Rng rng(seed ^ 0xda442d24dfc03bffull);
  std::vector<std::pair<Vec, Vec>> out;
  for (const Vec& z : zs) {
    const Mat g = chart.metric(z);
    const Vec nu = outer_unit_normal(chart, z);
    Vec v = rng.normal_vector(chart.dim);
    v -= nu.dot(g * v) * nu;
    if (v.norm() < 1e-10) continue;
    v = unit_normalize(chart, z, v);
    out.emplace_back(z, v);
    out.emplace_back(z, -v);
  }
  return out;
}

std::vector<Vec> sample_orbit(const LieAlgebra& algebra, const Vec& seed_element, int count,
                              std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Vec> out;
  out.push_back(seed_element);
  const Vec contravariant = algebra.raise(seed_element);
  for (int k = 1; k < count; ++k) {
    const CMat u = algebra.exp(rng.normal_vector(algebra.dim()));
    out.push_back(algebra.lower(algebra.adjoint(u, contravariant)));
  }
  return out;
}

}  // namespace ymlens

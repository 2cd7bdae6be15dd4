#include "ymlens/manifold.hpp"

#include <cmath>

#include "ymlens/finite_diff.hpp"

namespace ymlens {

void Chart::require_inside_box(const Vec& z) const {
  if (!box.contains(z, 1e-9 * (1.0 + z.norm())))
    throw GeometryError("point left the extended domain box");
}

Vec Chart::grad_boundary(const Vec& z) const {
  if (boundary_grad) return boundary_grad(z);
  const double h = fd_step_at(z);
  Vec g(dim);
  for (int k = 0; k < dim; ++k)
    g[k] = central_diff4([&](const Vec& x) { return boundary(x); }, z, k, h);
  return g;
}

Vec MetricJet::christoffel_contract(const Vec& v) const {
  const int n = static_cast<int>(christoffel.size());
  Vec out(n);
  for (int i = 0; i < n; ++i) out[i] = v.dot(christoffel[i] * v);
  return out;
}

namespace {

std::vector<Mat> metric_partials_at(const Chart& chart, const Vec& z) {
  if (chart.metric_partials) return chart.metric_partials(z);
  const double h = chart.fd_step_at(z);
  std::vector<Mat> dg(chart.dim);
  for (int k = 0; k < chart.dim; ++k)
    dg[k] = central_diff4([&](const Vec& x) { return chart.metric(x); }, z, k, h);
  return dg;
}

std::vector<Mat> christoffel_from(const Mat& g_inv, const std::vector<Mat>& dg) {
  const int n = static_cast<int>(dg.size());
  std::vector<Mat> gamma(n, Mat::Zero(n, n));
  for (int j = 0; j < n; ++j)
    for (int k = j; k < n; ++k) {
      Vec lower(n);
      for (int l = 0; l < n; ++l) lower[l] = 0.5 * (dg[j](l, k) + dg[k](l, j) - dg[l](j, k));
      const Vec up = g_inv * lower;
      for (int i = 0; i < n; ++i) {
        gamma[i](j, k) = up[i];
        gamma[i](k, j) = up[i];
      }
    }
  return gamma;
}

}  // namespace

MetricJet metric_jet(const Chart& chart, const Vec& z) {
  chart.require_inside_box(z);
  MetricJet jet;
  jet.g = chart.metric(z);
  Eigen::LLT<Mat> llt(jet.g);
  if (llt.info() != Eigen::Success)
    throw GeometryError("metric is not positive definite at the requested point");
  jet.g_inv = llt.solve(Mat::Identity(chart.dim, chart.dim));
  jet.christoffel = christoffel_from(jet.g_inv, metric_partials_at(chart, z));
  return jet;
}

std::vector<std::vector<Mat>> christoffel_partials(const Chart& chart, const Vec& z) {
  const int n = chart.dim;
  if (chart.metric_second && chart.metric_partials) {
    const Mat g = chart.metric(z);
    const Mat g_inv = g.llt().solve(Mat::Identity(n, n));
    const std::vector<Mat> dg = chart.metric_partials(z);
    const std::vector<std::vector<Mat>> ddg = chart.metric_second(z);
    std::vector<std::vector<Mat>> out(n, std::vector<Mat>(n, Mat::Zero(n, n)));
    for (int m = 0; m < n; ++m) {
      const Mat dginv = -g_inv * dg[m] * g_inv;
      for (int j = 0; j < n; ++j)
        for (int k = j; k < n; ++k) {
          Vec lower(n), dlower(n);
          for (int l = 0; l < n; ++l) {
            lower[l] = 0.5 * (dg[j](l, k) + dg[k](l, j) - dg[l](j, k));
            dlower[l] = 0.5 * (ddg[m][j](l, k) + ddg[m][k](l, j) - ddg[m][l](j, k));
          }
          const Vec up = dginv * lower + g_inv * dlower;
          for (int i = 0; i < n; ++i) {
            out[m][i](j, k) = up[i];
            out[m][i](k, j) = up[i];
          }
        }
    }
    return out;
  }
  // Fall back to differencing the Christoffel field itself.
  const double h = chart.fd_step_at(z);
  std::vector<std::vector<Mat>> out(n);
  for (int m = 0; m < n; ++m) {
    out[m].resize(n);
    for (int i = 0; i < n; ++i)
      out[m][i] = central_diff4(
          [&, i](const Vec& x) { return metric_jet(chart, x).christoffel[i]; }, z, m, h);
  }
  return out;
}

double metric_norm(const Chart& chart, const Vec& z, const Vec& v) {
  return std::sqrt(v.dot(chart.metric(z) * v));
}

Vec unit_normalize(const Chart& chart, const Vec& z, const Vec& v) {
  const double nrm = metric_norm(chart, z, v);
  if (nrm < 1e-14) throw GeometryError("cannot normalize a vanishing vector");
  return v / nrm;
}

Vec outer_unit_normal(const Chart& chart, const Vec& z, double level) {
  if (std::abs(chart.boundary(z) - level) > 1e-6 * (1.0 + std::abs(level)))
    throw GeometryError("outer_unit_normal called away from the boundary level set");
  const Vec grad = chart.grad_boundary(z);
  if (grad.norm() < 1e-12) throw GeometryError("degenerate boundary: grad rho vanishes");
  const Mat g = chart.metric(z);
  const Vec raised = g.llt().solve(grad);
  return raised / std::sqrt(raised.dot(g * raised));
}

double second_fundamental_form(const Chart& chart, const Vec& z, const Vec& w) {
  const MetricJet jet = metric_jet(chart, z);
  const Vec nu = outer_unit_normal(chart, z);
  if (std::abs(w.dot(jet.g * nu)) > 1e-8)
    throw GeometryError("second fundamental form requires a tangent vector");
  if (std::abs(metric_norm(chart, z, w) - 1.0) > 1e-8)
    throw GeometryError("second fundamental form requires a unit vector");

  // Lambda(w, w) = g(nabla_w N, w) for the outward unit normal field N.
  auto normal_field = [&](const Vec& x) -> Vec {
    const Vec grad = chart.grad_boundary(x);
    const Mat g = chart.metric(x);
    const Vec raised = g.llt().solve(grad);
    return raised / std::sqrt(raised.dot(g * raised));
  };
  const double h = chart.fd_step_at(z);
  const int n = chart.dim;
  Mat dn(n, n);  // dn(i, j) = d_j N^i
  for (int j = 0; j < n; ++j) dn.col(j) = central_diff4(normal_field, z, j, h);

  Vec cov = dn * w;  // (d_j N^i) w^j
  for (int i = 0; i < n; ++i) cov[i] += w.dot(jet.christoffel[i] * nu);
  return cov.dot(jet.g * w);
}

Vec field_partials(const Chart& chart, const ScalarField& f, const Vec& z) {
  if (f.gradient) return f.gradient(z);
  const double h = chart.fd_step_at(z);
  Vec out(chart.dim);
  for (int k = 0; k < chart.dim; ++k)
    out[k] = central_diff4([&](const Vec& x) { return f.value(x); }, z, k, h);
  return out;
}

double hessian_scalar(const Chart& chart, const ScalarField& f, const Vec& z, const Vec& v) {
  const MetricJet jet = metric_jet(chart, z);
  const Vec df = field_partials(chart, f, z);
  Mat d2f;
  if (f.second) {
    d2f = f.second(z);
  } else {
    const double h = chart.fd_step_at(z);
    d2f.resize(chart.dim, chart.dim);
    for (int k = 0; k < chart.dim; ++k)
      d2f.col(k) = central_diff4([&](const Vec& x) { return field_partials(chart, f, x); }, z, k, h);
    d2f = 0.5 * (d2f + d2f.transpose()).eval();
  }
  double out = v.dot(d2f * v);
  for (int k = 0; k < chart.dim; ++k) out -= df[k] * v.dot(jet.christoffel[k] * v);
  return out;
}

Vec riemannian_gradient(const Chart& chart, const ScalarField& f, const Vec& z) {
  return chart.metric(z).llt().solve(field_partials(chart, f, z));
}

// ---------------------------------------------------------------------------
// Boundary normal coordinates
// ---------------------------------------------------------------------------

BoundaryNormalChart::BoundaryNormalChart(const Chart& chart, Vec base_point, double radius,
                                         double level)
    : chart_(&chart), p_(std::move(base_point)), radius_(radius), level_(level) {
  if (std::abs(chart.boundary(p_) - level) > 1e-8)
    throw GeometryError("base point is not on the requested level set");
  const int n = chart.dim;
  const Mat g = chart.metric(p_);
  const Vec nu = outer_unit_normal(chart, p_, level);
  inward_at_p_ = -nu;

  // g-orthonormal tangent frame at p via Gram-Schmidt over coordinate axes.
  frame_.resize(n, n - 1);
  int filled = 0;
  std::vector<Vec> ortho{nu};
  for (int i = 0; i < n && filled < n - 1; ++i) {
    Vec cand = Vec::Unit(n, i);
    for (const Vec& b : ortho) cand -= b.dot(g * cand) * b;
    const double nrm = std::sqrt(cand.dot(g * cand));
    if (nrm > 1e-8) {
      cand /= nrm;
      ortho.push_back(cand);
      frame_.col(filled++) = cand;
    }
  }
  if (filled < n - 1) throw GeometryError("failed to build a tangent frame");
  check_no_focal_points();
}

Vec BoundaryNormalChart::inward_normal(const Vec& z) const {
  const Vec grad = chart_->grad_boundary(z);
  const Mat g = chart_->metric(z);
  const Vec raised = g.llt().solve(grad);
  return -raised / std::sqrt(raised.dot(g * raised));
}

Vec BoundaryNormalChart::surface_point(const Vec& zprime) const {
  Vec q = p_ + frame_ * zprime;
  // Newton along the steepest-ascent direction of rho back to the level set.
  for (int it = 0; it < 50; ++it) {
    const double r = chart_->boundary(q) - level_;
    if (std::abs(r) < 1e-13) return q;
    const Vec grad = chart_->grad_boundary(q);
    const double slope = grad.squaredNorm();
    if (slope < 1e-20) throw GeometryError("degenerate boundary during projection");
    q -= (r / slope) * grad;
  }
  if (std::abs(chart_->boundary(q) - level_) > 1e-10)
    throw GeometryError("surface projection did not converge");
  return q;
}

std::pair<Vec, Vec> BoundaryNormalChart::ray_state(const Vec& zprime, double t) const {
  const int n = chart_->dim;
  Vec z = surface_point(zprime);
  Vec v = inward_normal(z);
  if (t == 0.0) return {z, v};

  const int steps = std::max(1, static_cast<int>(std::ceil(std::abs(t) / 5e-3)));
  const double h = t / steps;
  auto rhs = [&](const Vec& zz, const Vec& vv, Vec& dz, Vec& dv) {
    dz = vv;
    dv = -metric_jet(*chart_, zz).christoffel_contract(vv);
  };
  Vec k1z(n), k1v(n), k2z(n), k2v(n), k3z(n), k3v(n), k4z(n), k4v(n);
  for (int s = 0; s < steps; ++s) {
    rhs(z, v, k1z, k1v);
    rhs(z + 0.5 * h * k1z, v + 0.5 * h * k1v, k2z, k2v);
    rhs(z + 0.5 * h * k2z, v + 0.5 * h * k2v, k3z, k3v);
    rhs(z + h * k3z, v + h * k3v, k4z, k4v);
    z += (h / 6.0) * (k1z + 2.0 * k2z + 2.0 * k3z + k4z);
    v += (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
  }
  return {z, v};
}

std::pair<Vec, double> BoundaryNormalChart::invert(const Vec& z) const {
  const int n = chart_->dim;
  // Initial guess: Euclidean projection onto the frame plus level-set offset.
  Vec zp = frame_.colPivHouseholderQr().solve(z - p_);
  const Vec grad = chart_->grad_boundary(z);
  double t = (level_ - chart_->boundary(z)) / std::max(grad.norm(), 1e-12);

  auto residual = [&](const Vec& zpr, double tt) -> Vec { return map(zpr, tt) - z; };

  Vec r = residual(zp, t);
  Mat jac(n, n);
  Eigen::PartialPivLU<Mat> lu;
  bool have_jac = false;
  for (int it = 0; it < 60; ++it) {
    if (r.norm() < 1e-12) break;
    if (!have_jac || (it % 8 == 0 && it > 0)) {
      const double h = 1e-6 * (1.0 + std::abs(t) + zp.norm());
      for (int k = 0; k < n - 1; ++k) {
        Vec zpp = zp;
        zpp[k] += h;
        Vec zpm = zp;
        zpm[k] -= h;
        jac.col(k) = (residual(zpp, t) - residual(zpm, t)) / (2.0 * h);
      }
      jac.col(n - 1) = (residual(zp, t + h) - residual(zp, t - h)) / (2.0 * h);
      lu.compute(jac);
      have_jac = true;
    }
    const Vec delta = lu.solve(r);
    zp -= delta.head(n - 1);
    t -= delta[n - 1];
    r = residual(zp, t);
  }
  if (r.norm() > 1e-8)
    throw GeometryError("normal coordinate inversion did not converge");
  return {zp, t};
}

Vec BoundaryNormalChart::ray_direction(const Vec& z) const {
  const auto [zp, t] = invert(z);
  return ray_state(zp, t).second;
}

void BoundaryNormalChart::check_no_focal_points() const {
  const int n = chart_->dim;
  const double h = 1e-5;
  // Sample the collar and monitor the Jacobian of the coordinate map.
  for (double t : {0.25 * radius_, 0.5 * radius_, radius_}) {
    Vec zp = Vec::Zero(n - 1);
    Mat jac(n, n);
    for (int k = 0; k < n - 1; ++k) {
      Vec zpp = zp, zpm = zp;
      zpp[k] += h;
      zpm[k] -= h;
      jac.col(k) = (map(zpp, t) - map(zpm, t)) / (2.0 * h);
    }
    jac.col(n - 1) = (map(zp, t + h) - map(zp, t - h)) / (2.0 * h);
    if (std::abs(jac.determinant()) < 1e-6)
      throw GeometryError("normal geodesics focus within the requested radius");
  }
}

}  // namespace ymlens

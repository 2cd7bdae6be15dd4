#include "ymlens/catalog.hpp"

#include <cmath>

namespace ymlens {

namespace {

// Profile cut where chi ~ 1e-43; below every tolerance in play.
constexpr double kBumpCut = 0.99;

double chi_tilde(double u) {
  if (u >= kBumpCut) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - u));
}

double chi_tilde_d1(double u) {
  if (u >= kBumpCut) return 0.0;
  const double w = 1.0 - u;
  return -chi_tilde(u) / (w * w);
}

double chi_tilde_d2(double u) {
  if (u >= kBumpCut) return 0.0;
  const double w = 1.0 - u;
  return chi_tilde(u) * (1.0 / (w * w * w * w) - 2.0 / (w * w * w));
}

double chi_tilde_d3(double u) {
  if (u >= kBumpCut) return 0.0;
  const double w = 1.0 - u;
  const double w3 = w * w * w, w4 = w3 * w, w5 = w4 * w, w6 = w5 * w;
  return chi_tilde(u) * (-1.0 / w6 + 6.0 / w5 - 6.0 / w4);
}

}  // namespace

double RadialBump::value(const Vec& z) const { return chi_tilde(u_of(z)); }

Vec RadialBump::gradient(const Vec& z) const {
  const double u = u_of(z);
  const Vec du = 2.0 * (z - center) / (radius * radius);
  return chi_tilde_d1(u) * du;
}

Mat RadialBump::hessian(const Vec& z) const {
  const double u = u_of(z);
  const Vec du = 2.0 * (z - center) / (radius * radius);
  const int n = static_cast<int>(z.size());
  return chi_tilde_d2(u) * (du * du.transpose()) +
         chi_tilde_d1(u) * (2.0 / (radius * radius)) * Mat::Identity(n, n);
}

std::vector<Mat> RadialBump::third(const Vec& z) const {
  const double u = u_of(z);
  const Vec du = 2.0 * (z - center) / (radius * radius);
  const double duu = 2.0 / (radius * radius);  // d_i d_j u = duu delta_ij
  const int n = static_cast<int>(z.size());
  const double c3 = chi_tilde_d3(u), c2 = chi_tilde_d2(u);
  std::vector<Mat> out(n, Mat::Zero(n, n));
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double v = c3 * du[k] * du[i] * du[j];
        if (i == j) v += c2 * duu * du[k];
        if (k == j) v += c2 * duu * du[i];
        if (k == i) v += c2 * duu * du[j];
        out[k](i, j) = v;
      }
  return out;
}

Chart make_chart(int dim, const std::string& metric_family, const Vec& metric_coeffs,
                 const std::string& boundary_family, const Vec& boundary_coeffs,
                 const Vec& box_lo, const Vec& box_hi) {
  if (dim < 2) throw ConfigError("chart dimension must be >= 2");
  Chart chart;
  chart.dim = dim;
  chart.box.lo = box_lo;
  chart.box.hi = box_hi;
  if (box_lo.size() != dim || box_hi.size() != dim)
    throw ConfigError("domain box does not match the chart dimension");

  if (metric_family == "euclidean") {
    chart.metric = [dim](const Vec&) { return Mat::Identity(dim, dim); };
    chart.metric_partials = [dim](const Vec&) { return std::vector<Mat>(dim, Mat::Zero(dim, dim)); };
    chart.metric_second = [dim](const Vec&) {
      return std::vector<std::vector<Mat>>(dim, std::vector<Mat>(dim, Mat::Zero(dim, dim)));
    };
  } else if (metric_family == "conformal") {
    if (metric_coeffs.size() != dim + 2)
      throw ConfigError("conformal metric expects coefficients [c0, c_1..c_n, q]");
    const double c0 = metric_coeffs[0];
    const Vec lin = metric_coeffs.segment(1, dim);
    const double q = metric_coeffs[dim + 1];
    auto phi = [c0, lin, q](const Vec& z) { return c0 + lin.dot(z) + q * z.squaredNorm(); };
    auto dphi = [lin, q](const Vec& z) -> Vec { return lin + 2.0 * q * z; };
    chart.metric = [dim, phi](const Vec& z) {
      return std::exp(2.0 * phi(z)) * Mat::Identity(dim, dim);
    };
    chart.metric_partials = [dim, phi, dphi](const Vec& z) {
      const double factor = std::exp(2.0 * phi(z));
      const Vec dp = dphi(z);
      std::vector<Mat> out(dim);
      for (int k = 0; k < dim; ++k) out[k] = 2.0 * dp[k] * factor * Mat::Identity(dim, dim);
      return out;
    };
    chart.metric_second = [dim, phi, dphi, q](const Vec& z) {
      const double factor = std::exp(2.0 * phi(z));
      const Vec dp = dphi(z);
      std::vector<std::vector<Mat>> out(dim, std::vector<Mat>(dim));
      for (int l = 0; l < dim; ++l)
        for (int k = 0; k < dim; ++k) {
          const double ddphi = (l == k) ? 2.0 * q : 0.0;
          out[l][k] = (4.0 * dp[l] * dp[k] + 2.0 * ddphi) * factor * Mat::Identity(dim, dim);
        }
      return out;
    };
  } else {
    throw ConfigError("unknown metric family: " + metric_family);
  }

  if (boundary_family == "ball") {
    if (boundary_coeffs.size() != 1 && boundary_coeffs.size() != dim + 1)
      throw ConfigError("ball boundary expects coefficients [R] or [R, c_1..c_n]");
    const double r = boundary_coeffs[0];
    if (r <= 0.0) throw ConfigError("ball radius must be positive");
    Vec center = Vec::Zero(dim);
    if (boundary_coeffs.size() == dim + 1) center = boundary_coeffs.tail(dim);
    chart.boundary = [r, center](const Vec& z) { return (z - center).squaredNorm() - r * r; };
    chart.boundary_grad = [center](const Vec& z) -> Vec { return 2.0 * (z - center); };
  } else if (boundary_family == "ellipsoid") {
    if (boundary_coeffs.size() != dim)
      throw ConfigError("ellipsoid boundary expects the semi-axes");
    const Vec axes = boundary_coeffs;
    for (int i = 0; i < dim; ++i)
      if (axes[i] <= 0.0) throw ConfigError("ellipsoid semi-axes must be positive");
    chart.boundary = [axes, dim](const Vec& z) {
      double s = -1.0;
      for (int i = 0; i < dim; ++i) s += z[i] * z[i] / (axes[i] * axes[i]);
      return s;
    };
    chart.boundary_grad = [axes, dim](const Vec& z) -> Vec {
      Vec g(dim);
      for (int i = 0; i < dim; ++i) g[i] = 2.0 * z[i] / (axes[i] * axes[i]);
      return g;
    };
  } else if (boundary_family == "halfspace") {
    if (boundary_coeffs.size() != dim + 1)
      throw ConfigError("halfspace boundary expects [offset, normal_1..normal_n]");
    const double offset = boundary_coeffs[0];
    const Vec normal = boundary_coeffs.tail(dim);
    chart.boundary = [offset, normal](const Vec& z) { return normal.dot(z) - offset; };
    chart.boundary_grad = [normal](const Vec&) { return normal; };
  } else {
    throw ConfigError("unknown boundary family: " + boundary_family);
  }
  return chart;
}

Connection make_connection(const std::string& family, const Vec& coeffs, int n, int d) {
  if (family == "zero") return zero_connection(n, d);

  if (family == "constant") {
    if (coeffs.size() != n * d) throw ConfigError("constant connection expects n*d coefficients");
    Mat a(n, d);
    for (int i = 0; i < n; ++i)
      for (int al = 0; al < d; ++al) a(i, al) = coeffs[i * d + al];
    Connection conn;
    conn.components = [a](const Vec&) { return a; };
    conn.partials = [n, d](const Vec&) { return std::vector<Mat>(n, Mat::Zero(n, d)); };
    conn.second = [n, d](const Vec&) {
      return std::vector<std::vector<Mat>>(n, std::vector<Mat>(n, Mat::Zero(n, d)));
    };
    return conn;
  }

  if (family == "linear") {
    if (coeffs.size() != n * d * n)
      throw ConfigError("linear connection expects n*d*n coefficients");
    // L[j] is the n x d slope of A w.r.t. z_j.
    std::vector<Mat> slope(n, Mat::Zero(n, d));
    for (int i = 0; i < n; ++i)
      for (int al = 0; al < d; ++al)
        for (int j = 0; j < n; ++j) slope[j](i, al) = coeffs[(i * d + al) * n + j];
    Connection conn;
    conn.components = [slope, n, d](const Vec& z) {
      Mat a = Mat::Zero(n, d);
      for (int j = 0; j < n; ++j) a += z[j] * slope[j];
      return a;
    };
    conn.partials = [slope](const Vec&) { return slope; };
    conn.second = [n, d](const Vec&) {
      return std::vector<std::vector<Mat>>(n, std::vector<Mat>(n, Mat::Zero(n, d)));
    };
    return conn;
  }

  if (family == "uniform_field_u1") {
    if (n != 3 || d != 1) throw ConfigError("uniform_field_u1 needs dim 3 and an abelian group");
    if (coeffs.size() != 1) throw ConfigError("uniform_field_u1 expects [B]");
    const double b = coeffs[0];
    Vec lin = Vec::Zero(n * d * n);
    // A_1 = -B/2 z2, A_2 = B/2 z1
    lin[(0 * d + 0) * n + 1] = -0.5 * b;
    lin[(1 * d + 0) * n + 0] = 0.5 * b;
    return make_connection("linear", lin, n, d);
  }

  if (family == "bump") {
    if (coeffs.size() != n + 1 + n * d)
      throw ConfigError("bump connection expects [c_1..c_n, r, C (n x d)]");
    RadialBump bump{coeffs.head(n), coeffs[n]};
    if (bump.radius <= 0.0) throw ConfigError("bump radius must be positive");
    Mat c(n, d);
    for (int i = 0; i < n; ++i)
      for (int al = 0; al < d; ++al) c(i, al) = coeffs[n + 1 + i * d + al];
    Connection conn;
    conn.components = [bump, c](const Vec& z) -> Mat { return bump.value(z) * c; };
    conn.partials = [bump, c, n](const Vec& z) {
      const Vec grad = bump.gradient(z);
      std::vector<Mat> out(n);
      for (int j = 0; j < n; ++j) out[j] = grad[j] * c;
      return out;
    };
    conn.second = [bump, c, n](const Vec& z) {
      const Mat hess = bump.hessian(z);
      std::vector<std::vector<Mat>> out(n, std::vector<Mat>(n));
      for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j) out[k][j] = hess(k, j) * c;
      return out;
    };
    return conn;
  }

  if (family == "angular_bump") {
    if (coeffs.size() != n + 3)
      throw ConfigError("angular_bump expects [c_1..c_n, r, amp, alpha]");
    RadialBump bump{coeffs.head(n), coeffs[n]};
    if (bump.radius <= 0.0) throw ConfigError("bump radius must be positive");
    const double amp = coeffs[n + 1];
    const int alpha = static_cast<int>(coeffs[n + 2]);
    if (alpha < 0 || alpha >= d) throw ConfigError("angular_bump Lie index out of range");
    if (n < 2) throw ConfigError("angular_bump needs dim >= 2");
    // A = amp h(z) (z1 dz2 - z2 dz1) e_alpha; the radial contraction vanishes
    // identically, so the field is already in the radial normal gauge.
    Connection conn;
    conn.components = [bump, amp, alpha, n, d](const Vec& z) -> Mat {
      Mat a = Mat::Zero(n, d);
      const double h = amp * bump.value(z);
      a(0, alpha) = -h * z[1];
      a(1, alpha) = h * z[0];
      return a;
    };
    conn.partials = [bump, amp, alpha, n, d](const Vec& z) {
      const double h = amp * bump.value(z);
      const Vec dh = amp * bump.gradient(z);
      std::vector<Mat> out(n, Mat::Zero(n, d));
      for (int j = 0; j < n; ++j) {
        out[j](0, alpha) = -dh[j] * z[1];
        out[j](1, alpha) = dh[j] * z[0];
      }
      out[1](0, alpha) += -h;
      out[0](1, alpha) += h;
      return out;
    };
    conn.second = [bump, amp, alpha, n, d](const Vec& z) {
      const Vec dh = amp * bump.gradient(z);
      const Mat hh = amp * bump.hessian(z);
      std::vector<std::vector<Mat>> out(n, std::vector<Mat>(n, Mat::Zero(n, d)));
      for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j) {
          out[k][j](0, alpha) = -hh(k, j) * z[1];
          out[k][j](1, alpha) = hh(k, j) * z[0];
        }
      for (int k = 0; k < n; ++k) {
        out[k][1](0, alpha) += -dh[k];
        out[k][0](1, alpha) += dh[k];
        out[1][k](0, alpha) += -dh[k];
        out[0][k](1, alpha) += dh[k];
      }
      return out;
    };
    return conn;
  }

  throw ConfigError("unknown connection family: " + family);
}

namespace {

// One exp(s(z) Z) factor with the eigen-decomposition of Z cached so group
// elements are a diagonal exponential away.
struct BumpFactor {
  RadialBump bump;
  double amp = 1.0;
  Vec zeta;
  CMat eigvecs, eigvecs_inv;
  CVec eigvals;

  static BumpFactor make(const LieAlgebra& algebra, const GaugeBumpSpec& spec) {
    BumpFactor f;
    f.bump = RadialBump{spec.center, spec.radius};
    f.amp = spec.amp;
    f.zeta = spec.zeta;
    Eigen::ComplexEigenSolver<CMat> es(algebra.matrix(spec.zeta));
    if (es.info() != Eigen::Success) throw NumericsError("gauge exponent diagonalization failed");
    f.eigvecs = es.eigenvectors();
    f.eigvecs_inv = f.eigvecs.inverse();
    f.eigvals = es.eigenvalues();
    return f;
  }

  double s(const Vec& z) const { return amp * bump.value(z); }
  Vec ds(const Vec& z) const { return amp * bump.gradient(z); }

  CMat value(double s_val) const {
    CVec diag(eigvals.size());
    for (int i = 0; i < eigvals.size(); ++i) diag[i] = std::exp(s_val * eigvals[i]);
    return eigvecs * diag.asDiagonal() * eigvecs_inv;
  }
};

}  // namespace

GaugeMap make_gauge_map(const LieAlgebra& algebra, const std::vector<GaugeBumpSpec>& factors) {
  std::vector<BumpFactor> fs;
  fs.reserve(factors.size());
  for (const auto& spec : factors) fs.push_back(BumpFactor::make(algebra, spec));
  const int m = algebra.matrix_size();

  GaugeMap gauge;
  gauge.value = [fs, m](const Vec& z) -> CMat {
    CMat u = CMat::Identity(m, m);
    for (const auto& f : fs) u = u * f.value(f.s(z));
    return u;
  };
  gauge.partials = [fs, m, &algebra](const Vec& z) {
    const int n = static_cast<int>(z.size());
    std::vector<CMat> values(fs.size());
    std::vector<CMat> zmats(fs.size());
    for (std::size_t k = 0; k < fs.size(); ++k) {
      values[k] = fs[k].value(fs[k].s(z));
      zmats[k] = algebra.matrix(fs[k].zeta);
    }
    // d_i u = sum_k u_1..u_{k-1} (d_i s_k Z_k u_k) u_{k+1}..
    std::vector<CMat> out(n, CMat::Zero(m, m));
    for (std::size_t k = 0; k < fs.size(); ++k) {
      CMat left = CMat::Identity(m, m);
      for (std::size_t l = 0; l < k; ++l) left = left * values[l];
      CMat right = CMat::Identity(m, m);
      for (std::size_t l = k + 1; l < fs.size(); ++l) right = right * values[l];
      const CMat core = left * zmats[k] * values[k] * right;
      const Vec ds = fs[k].ds(z);
      for (int i = 0; i < n; ++i) out[i] += ds[i] * core;
    }
    return out;
  };
  return gauge;
}

namespace {

// Analytic single-factor transform for u = exp(s Z):
//   A~_i = d_i s zeta + C_i,                    C_i = Ad_{u^{-1}} A_i
//   d_j C_i = Ad_{u^{-1}}(d_j A_i) + d_j s [C_i, zeta]
//   d_k d_j C_i = Ad(d_k d_j A_i) + d_k s [Ad(d_j A_i), zeta]
//               + d_k d_j s [C_i, zeta] + d_j s [d_k C_i, zeta]
Connection gauged_single(const LieAlgebra& algebra, const Chart& chart, const Connection& base,
                         const GaugeBumpSpec& spec) {
  const BumpFactor f = BumpFactor::make(algebra, spec);
  const int n = chart.dim;
  const int d = algebra.dim();

  struct Ctx {
    double s;
    CMat u, u_inv;
  };
  auto make_ctx = [f](const Vec& z) {
    Ctx ctx;
    ctx.s = f.s(z);
    ctx.u = f.value(ctx.s);
    ctx.u_inv = f.value(-ctx.s);
    return ctx;
  };
  auto ad = [&algebra](const Ctx& ctx, const Vec& coords) -> Vec {
    return algebra.coordinates(ctx.u_inv * algebra.matrix(coords) * ctx.u);
  };

  Connection conn;
  conn.components = [&algebra, f, base, make_ctx, ad, n, d](const Vec& z) -> Mat {
    const Ctx ctx = make_ctx(z);
    const Vec ds = f.ds(z);
    const Mat a = base.components(z);
    Mat out(n, d);
    for (int i = 0; i < n; ++i)
      out.row(i) = (ds[i] * f.zeta + ad(ctx, a.row(i).transpose())).transpose();
    return out;
  };
  conn.partials = [&algebra, &chart, f, base, make_ctx, ad, n, d](const Vec& z) {
    const Ctx ctx = make_ctx(z);
    const Vec ds = f.ds(z);
    const Mat dds = f.amp * f.bump.hessian(z);
    const Mat a = base.components(z);
    const std::vector<Mat> da = connection_partials(chart, base, z);
    std::vector<Mat> out(n, Mat::Zero(n, d));

    std::vector<Vec> c_rows(n);
    for (int i = 0; i < n; ++i) c_rows[i] = ad(ctx, a.row(i).transpose());

    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        Vec row = dds(j, i) * f.zeta;
        row += ad(ctx, da[j].row(i).transpose());
        row += ds[j] * algebra.bracket(c_rows[i], f.zeta);
        out[j].row(i) = row.transpose();
      }
    return out;
  };
  conn.second = [&algebra, &chart, f, base, make_ctx, ad, n, d](const Vec& z) {
    const Ctx ctx = make_ctx(z);
    const Vec ds = f.ds(z);
    const Mat dds = f.amp * f.bump.hessian(z);
    const std::vector<Mat> bump3 = f.bump.third(z);
    const Mat a = base.components(z);
    const std::vector<Mat> da = connection_partials(chart, base, z);
    const std::vector<std::vector<Mat>> dda = connection_second_partials(chart, base, z);

    std::vector<Vec> c_rows(n);
    for (int i = 0; i < n; ++i) c_rows[i] = ad(ctx, a.row(i).transpose());
    // dC[j][i] = d_j C_i
    std::vector<std::vector<Vec>> dc(n, std::vector<Vec>(n));
    std::vector<std::vector<Vec>> ad_da(n, std::vector<Vec>(n));
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        ad_da[j][i] = ad(ctx, da[j].row(i).transpose());
        dc[j][i] = ad_da[j][i] + ds[j] * algebra.bracket(c_rows[i], f.zeta);
      }

    std::vector<std::vector<Mat>> out(n, std::vector<Mat>(n, Mat::Zero(n, d)));
    for (int k = 0; k < n; ++k)
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
          Vec row = (f.amp * bump3[k](j, i)) * f.zeta;
          row += ad(ctx, dda[k][j].row(i).transpose());
          row += ds[k] * algebra.bracket(ad_da[j][i], f.zeta);
          row += dds(k, j) * algebra.bracket(c_rows[i], f.zeta);
          row += ds[j] * algebra.bracket(dc[k][i], f.zeta);
          out[k][j].row(i) = row.transpose();
        }
    return out;
  };
  return conn;
}

}  // namespace

Connection make_gauged_connection(const LieAlgebra& algebra, const Chart& chart,
                                  const Connection& base,
                                  const std::vector<GaugeBumpSpec>& factors) {
  if (factors.empty()) return base;
  Connection current = gauged_single(algebra, chart, base, factors[0]);
  for (std::size_t k = 1; k < factors.size(); ++k)
    current = gauged_single(algebra, chart, current, factors[k]);
  return current;
}

ScalarField make_scalar_field(const std::string& name, const Vec& coeffs, int dim) {
  if (name == "half_norm_squared") {
    Vec center = Vec::Zero(dim);
    if (coeffs.size() == dim) center = coeffs;
    else if (coeffs.size() != 0)
      throw ConfigError("half_norm_squared expects no coefficients or a centre");
    ScalarField f;
    f.value = [center](const Vec& z) { return 0.5 * (z - center).squaredNorm(); };
    f.gradient = [center](const Vec& z) -> Vec { return z - center; };
    f.second = [dim](const Vec&) { return Mat::Identity(dim, dim); };
    return f;
  }
  throw ConfigError("unknown scalar field: " + name);
}

}  // namespace ymlens

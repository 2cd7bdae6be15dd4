#ifndef YMLENS_MANIFOLD_HPP
#define YMLENS_MANIFOLD_HPP

#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "ymlens/types.hpp"

namespace ymlens {

struct Box {
  Vec lo, hi;

  bool contains(const Vec& z, double margin = 0.0) const {
    for (int i = 0; i < z.size(); ++i)
      if (z[i] < lo[i] - margin || z[i] > hi[i] + margin) return false;
    return true;
  }
  double diameter() const { return (hi - lo).norm(); }
};

// A single global coordinate patch: metric field, boundary defining function
// rho with M = {rho <= 0}, and a bounding box for the extended manifold on
// which all fields stay smooth.
struct Chart {
  int dim = 0;
  std::function<Mat(const Vec&)> metric;
  // Optional analytic derivative data; finite differences otherwise.
  std::function<std::vector<Mat>(const Vec&)> metric_partials;                  // [k] = d_k g
  std::function<std::vector<std::vector<Mat>>(const Vec&)> metric_second;       // [l][k] = d_l d_k g
  std::function<double(const Vec&)> boundary;
  std::function<Vec(const Vec&)> boundary_grad;
  Box box;
  double fd_step = 1e-4;
  double boundary_tol = 1e-10;

  void require_inside_box(const Vec& z) const;
  double fd_step_at(const Vec& z) const { return fd_step * (1.0 + z.norm()); }
  Vec grad_boundary(const Vec& z) const;
};

struct MetricJet {
  Mat g;
  Mat g_inv;
  std::vector<Mat> christoffel;  // christoffel[i](j, k) = Gamma^i_{jk}

  Vec christoffel_contract(const Vec& v) const;  // Gamma^i_{jk} v^j v^k
};

MetricJet metric_jet(const Chart& chart, const Vec& z);

// d_m Gamma^i_{jk}, indexed [m][i](j,k).
std::vector<std::vector<Mat>> christoffel_partials(const Chart& chart, const Vec& z);

double metric_norm(const Chart& chart, const Vec& z, const Vec& v);
Vec unit_normalize(const Chart& chart, const Vec& z, const Vec& v);

// Outer unit normal at a boundary point (|rho| below tolerance), pointing
// toward rho > 0. Also usable on the level set {rho = level}.
Vec outer_unit_normal(const Chart& chart, const Vec& z, double level = 0.0);

// Second fundamental form Lambda(w, w) of {rho = 0} for a unit tangent w,
// with the sign convention that the Euclidean unit sphere has Lambda = +1.
double second_fundamental_form(const Chart& chart, const Vec& z, const Vec& w);

struct ScalarField {
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> gradient;  // optional: partial derivatives
  std::function<Mat(const Vec&)> second;    // optional: d_i d_j f
};

Vec field_partials(const Chart& chart, const ScalarField& f, const Vec& z);
double hessian_scalar(const Chart& chart, const ScalarField& f, const Vec& z, const Vec& v);
// Riemannian gradient g^{-1} df.
Vec riemannian_gradient(const Chart& chart, const ScalarField& f, const Vec& z);

// Boundary normal coordinates on a collar around a base boundary point: maps
// (z', t) to the point reached by following the inward-pointing unit-speed
// normal geodesic from the level-set point parameterized by z' for time t.
class BoundaryNormalChart {
 public:
  // `level` shifts the initial surface to {rho = level}.
  BoundaryNormalChart(const Chart& chart, Vec base_point, double radius, double level = 0.0);

  int dim() const { return chart_->dim; }
  const Vec& base_point() const { return p_; }
  double level() const { return level_; }
  // n x (n-1) matrix of g-orthonormal tangent directions at the base point.
  const Mat& tangent_frame() const { return frame_; }

  // Point of the initial surface with tangent parameters z'.
  Vec surface_point(const Vec& zprime) const;
  // Normal geodesic state (position, velocity) at arc length t from z'.
  std::pair<Vec, Vec> ray_state(const Vec& zprime, double t) const;
  Vec map(const Vec& zprime, double t) const { return ray_state(zprime, t).first; }

  // Inverse map: normal coordinates (z', t) of a chart point near the collar.
  std::pair<Vec, double> invert(const Vec& z) const;
  // Unit inward ray velocity of the normal geodesic through z.
  Vec ray_direction(const Vec& z) const;

 private:
  const Chart* chart_;
  Vec p_;
  double radius_;
  double level_;
  Mat frame_;  // tangent directions at p_
  Vec inward_at_p_;

  Vec inward_normal(const Vec& z) const;
  void check_no_focal_points() const;
};

}  // namespace ymlens

#endif

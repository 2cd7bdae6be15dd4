#ifndef YMLENS_GAUGE_FIELD_HPP
#define YMLENS_GAUGE_FIELD_HPP

#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "ymlens/lie_algebra.hpp"
#include "ymlens/manifold.hpp"

namespace ymlens {

// Yang-Mills potential: components(z) is n x d with row i holding the
// reference-basis coordinates of A_i(z).
struct Connection {
  std::function<Mat(const Vec&)> components;
  std::function<std::vector<Mat>(const Vec&)> partials;                 // [j] = d_j A
  std::function<std::vector<std::vector<Mat>>(const Vec&)> second;      // [k][j] = d_k d_j A

  bool has_partials() const { return static_cast<bool>(partials); }
  bool has_second() const { return static_cast<bool>(second); }
};

Connection zero_connection(int n, int d);

std::vector<Mat> connection_partials(const Chart& chart, const Connection& conn, const Vec& z);
std::vector<std::vector<Mat>> connection_second_partials(const Chart& chart,
                                                         const Connection& conn, const Vec& z);

// Field strength at a point: f[i][j] is the d-vector of F_{ij} coordinates,
// antisymmetric in (i, j) by construction.
struct CurvatureAt {
  std::vector<std::vector<Vec>> f;

  const Vec& operator()(int i, int j) const { return f[i][j]; }
  double max_abs() const;
};

CurvatureAt curvature_at(const LieAlgebra& algebra, const StructureConstants& constants,
                         const Chart& chart, const Connection& conn, const Vec& z);

// d_m F, indexed [m], each a CurvatureAt.
std::vector<CurvatureAt> curvature_partials(const LieAlgebra& algebra,
                                            const StructureConstants& constants,
                                            const Chart& chart, const Connection& conn,
                                            const Vec& z);

// Velocity-space force g^{ij} F^a_{jk} v^k xi_a for inner-product coordinates
// xi; the v-row of the equations of motion.
Vec lorentz_force(const Chart& chart, const LieAlgebra& algebra,
                  const StructureConstants& constants, const Connection& conn, const Vec& z,
                  const Vec& v, const Vec& xi);

struct GaugeMap {
  std::function<CMat(const Vec&)> value;
  std::function<std::vector<CMat>(const Vec&)> partials;  // optional [i] = d_i u

  std::vector<CMat> partials_at(const Chart& chart, const Vec& z) const;
};

// A-tilde = u^{-1} du + u^{-1} A u.
Connection gauge_transform(const LieAlgebra& algebra, const Chart& chart, const Connection& conn,
                           const GaugeMap& gauge);

// max over samples and index pairs of |F_tilde - u^{-1} F u| in coordinates.
double gauge_transform_curvature_check(const LieAlgebra& algebra,
                                       const StructureConstants& constants, const Chart& chart,
                                       const Connection& conn, const GaugeMap& gauge,
                                       const std::vector<Vec>& samples);

// Solves the transport equation u' + A(ray') u = 0 with u = e on the initial
// surface of the collar chart and returns the transformed connection, whose
// component along the normal-ray direction vanishes, plus the gauge itself.
std::pair<Connection, GaugeMap> normal_gauge(const LieAlgebra& algebra, const Chart& chart,
                                             const Connection& conn,
                                             std::shared_ptr<const BoundaryNormalChart> collar);

// A sampled path with interpolated position/velocity, the curve input of the
// gauge ODE.
struct PathSampler {
  double t0 = 0.0, t1 = 0.0;
  std::function<Vec(double)> position;
  std::function<Vec(double)> velocity;
};

struct GaugeAlongCurve {
  std::vector<double> times;
  std::vector<CMat> values;
  double max_group_defect = 0.0;
};

// Integrates du/dt = u Atilde(gamma') - A(gamma') u along the curve.
GaugeAlongCurve gauge_ode_solve(const LieAlgebra& algebra, const Connection& conn_a,
                                const Connection& conn_b, const PathSampler& curve,
                                const CMat& u0, double step = 1e-3);

// Residuals of transverse normal derivatives of (A - Atilde) at a boundary
// point, per order 0..order (order <= 2).
std::vector<double> boundary_jet_compare(const Chart& chart, const Connection& conn_a,
                                         const Connection& conn_b, const Vec& p, int order,
                                         double h = 1e-2);

}  // namespace ymlens

#endif

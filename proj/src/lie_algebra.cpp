#include "ymlens/lie_algebra.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>

#include "ymlens/rng.hpp"

namespace ymlens {

namespace {

constexpr double kClosureTol = 1e-10;
constexpr double kAdInvarianceTol = 1e-10;

Mat flatten_generators(const std::vector<CMat>& gens) {
  const int m = static_cast<int>(gens[0].rows());
  const int d = static_cast<int>(gens.size());
  Mat flat(2 * m * m, d);
  for (int a = 0; a < d; ++a) {
    int r = 0;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        flat(r, a) = gens[a](i, j).real();
        flat(r + m * m, a) = gens[a](i, j).imag();
        ++r;
      }
  }
  return flat;
}

Vec flatten_matrix(const CMat& x) {
  const int m = static_cast<int>(x.rows());
  Vec flat(2 * m * m);
  int r = 0;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      flat[r] = x(i, j).real();
      flat[r + m * m] = x(i, j).imag();
      ++r;
    }
  return flat;
}

}  // namespace

Mat StructureConstants::contract(const Vec& y) const {
  const int d = dim();
  Mat out = Mat::Zero(d, d);
  for (int m = 0; m < d; ++m)
    if (y[m] != 0.0) out += y[m] * by_third[m];
  return out;
}

Vec StructureConstants::bracket(const Vec& x, const Vec& y) const {
  // [x, y]^b = x^a c^b_{am} y^m
  return contract(y).transpose() * x;
}

double StructureConstants::max_jacobi_residual() const {
  const int d = dim();
  double worst = 0.0;
  Vec ea = Vec::Zero(d), eb = Vec::Zero(d), ec = Vec::Zero(d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int c = 0; c < d; ++c) {
        ea.setZero();
        eb.setZero();
        ec.setZero();
        ea[a] = eb[b] = ec[c] = 1.0;
        const Vec r = bracket(ea, bracket(eb, ec)) + bracket(eb, bracket(ec, ea)) +
                      bracket(ec, bracket(ea, eb));
        worst = std::max(worst, r.cwiseAbs().maxCoeff());
      }
  return worst;
}

LieAlgebra::LieAlgebra(std::string name, std::vector<CMat> generators, Mat inner_coefficients)
    : name_(std::move(name)), generators_(std::move(generators)), inner_(std::move(inner_coefficients)) {
  if (generators_.empty()) throw StructuralError("lie algebra needs at least one generator");
  const int m = static_cast<int>(generators_[0].rows());
  for (const auto& g : generators_)
    if (g.rows() != m || g.cols() != m) throw StructuralError("generator size mismatch");
  if (inner_.rows() != dim() || inner_.cols() != dim())
    throw StructuralError("inner product coefficient matrix has wrong shape");
  flat_ = flatten_generators(generators_);
  flat_qr_.compute(flat_);
  inner_inverse_ = inner_.inverse();
  validate();
}

void LieAlgebra::validate() const {
  const int d = dim();
  if (flat_qr_.rank() < d) throw StructuralError("generators are linearly dependent");
  if ((inner_ - inner_.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw StructuralError("inner product coefficients not symmetric");
  Eigen::SelfAdjointEigenSolver<Mat> es(inner_);
  if (es.eigenvalues().minCoeff() <= 0.0)
    throw StructuralError("inner product coefficients not positive definite");

  // Closure: every generator commutator must lie in the span.
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      const CMat comm = generators_[a] * generators_[b] - generators_[b] * generators_[a];
      if (span_residual(comm) > kClosureTol)
        throw StructuralError("bracket closure violated in " + name_);
    }

  // Ad-invariance in infinitesimal form: <[z,x],y> + <x,[z,y]> = 0.
  Vec ea = Vec::Zero(d), eb = Vec::Zero(d), ec = Vec::Zero(d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int c = 0; c < d; ++c) {
        ea.setZero();
        eb.setZero();
        ec.setZero();
        ea[a] = eb[b] = ec[c] = 1.0;
        const double r = inner(bracket(ea, eb), ec) + inner(eb, bracket(ea, ec));
        if (std::abs(r) > kAdInvarianceTol)
          throw StructuralError("inner product is not Ad-invariant in " + name_);
      }
}

LieAlgebra LieAlgebra::u1() {
  std::vector<CMat> gens(1, CMat::Zero(1, 1));
  gens[0](0, 0) = Cplx(0.0, 1.0);
  return LieAlgebra("u1", std::move(gens), Mat::Identity(1, 1));
}

LieAlgebra LieAlgebra::su2() {
  // e_j = -i sigma_j, so [e1, e2] = 2 e3 cyclically; -tr(e_j e_k)/2 = delta_jk.
  std::vector<CMat> gens(3, CMat::Zero(2, 2));
  const Cplx i(0.0, 1.0);
  gens[0] << 0, -i, -i, 0;
  gens[1] << 0, -1, 1, 0;
  gens[2] << -i, 0, 0, i;
  return LieAlgebra("su2", std::move(gens), Mat::Identity(3, 3));
}

LieAlgebra LieAlgebra::so3() {
  // (L_a)_{jk} = -eps_{ajk}; [L1, L2] = L3; -tr(L_a L_b)/2 = delta_ab.
  std::vector<CMat> gens(3, CMat::Zero(3, 3));
  gens[0](1, 2) = -1.0;
  gens[0](2, 1) = 1.0;
  gens[1](0, 2) = 1.0;
  gens[1](2, 0) = -1.0;
  gens[2](0, 1) = -1.0;
  gens[2](1, 0) = 1.0;
  return LieAlgebra("so3", std::move(gens), Mat::Identity(3, 3));
}

LieAlgebra LieAlgebra::by_name(const std::string& name) {
  if (name == "u1") return u1();
  if (name == "su2") return su2();
  if (name == "so3") return so3();
  throw ConfigError("unknown group: " + name);
}

CMat LieAlgebra::matrix(const Vec& coords) const {
  if (coords.size() != dim()) throw StructuralError("coordinate dimension mismatch");
  const int m = matrix_size();
  CMat out = CMat::Zero(m, m);
  for (int a = 0; a < dim(); ++a) out += coords[a] * generators_[a];
  return out;
}

Vec LieAlgebra::coordinates(const CMat& element) const {
  if (element.rows() != matrix_size() || element.cols() != matrix_size())
    throw StructuralError("matrix size mismatch");
  return flat_qr_.solve(flatten_matrix(element));
}

double LieAlgebra::span_residual(const CMat& element) const {
  const Vec coords = flat_qr_.solve(flatten_matrix(element));
  return (flat_ * coords - flatten_matrix(element)).norm();
}

Vec LieAlgebra::bracket(const Vec& xi, const Vec& eta) const {
  if (xi.size() != dim() || eta.size() != dim()) throw StructuralError("coordinate dimension mismatch");
  const CMat x = matrix(xi), y = matrix(eta);
  return coordinates(x * y - y * x);
}

double LieAlgebra::inner(const Vec& xi, const Vec& eta) const {
  if (xi.size() != dim() || eta.size() != dim()) throw StructuralError("coordinate dimension mismatch");
  return xi.dot(inner_ * eta);
}

double LieAlgebra::norm(const Vec& xi) const { return std::sqrt(inner(xi, xi)); }

Vec LieAlgebra::raise(const Vec& xi_low) const { return inner_inverse_ * xi_low; }

CMat LieAlgebra::exp(const Vec& xi) const { return matrix(xi).exp(); }

Vec LieAlgebra::adjoint(const CMat& u, const Vec& xi) const {
  Eigen::FullPivLU<CMat> lu(u);
  if (!lu.isInvertible()) throw NumericsError("group element is not invertible");
  const CMat image = u * matrix(xi) * lu.inverse();
  return coordinates(image);
}

double LieAlgebra::group_defect(const CMat& u) const {
  return (u.adjoint() * u - CMat::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff();
}

CMat LieAlgebra::project_to_group(const CMat& u) const {
  Eigen::JacobiSVD<CMat> svd(u, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().adjoint();
}

StructureConstants structure_constants(const LieAlgebra& algebra) {
  const int d = algebra.dim();
  StructureConstants out;
  out.by_third.assign(d, Mat::Zero(d, d));
  Vec ea = Vec::Zero(d), em = Vec::Zero(d);
  for (int a = 0; a < d; ++a)
    for (int m = 0; m < d; ++m) {
      ea.setZero();
      em.setZero();
      ea[a] = em[m] = 1.0;
      const CMat xa = algebra.matrix(ea), xm = algebra.matrix(em);
      const CMat comm = xa * xm - xm * xa;
      if (algebra.span_residual(comm) > 1e-10)
        throw StructuralError("closure residual above tolerance while extracting structure constants");
      const Vec coords = algebra.coordinates(comm);
      for (int b = 0; b < d; ++b) out.by_third[m](a, b) = coords[b];
    }
  return out;
}

Mat AdjointOrbitBasis::coordinate_matrix() const {
  const int d = dim();
  Mat out(d, static_cast<int>(seed.size()));
  for (int j = 0; j < d; ++j) out.row(j) = basis_elements[j].transpose();
  return out;
}

AdjointOrbitBasis find_basis_in_orbit(const LieAlgebra& algebra, const Vec& seed,
                                      int sample_count, std::uint64_t rng_seed) {
  const int d = algebra.dim();
  if (seed.size() != d) throw StructuralError("seed dimension mismatch");
  if (algebra.norm(seed) < 1e-14)
    throw StructuralError("orbit of the zero element spans nothing");

  AdjointOrbitBasis basis;
  basis.seed = seed;
  Rng rng(rng_seed);
  Mat selected(0, d);
  const double scale = seed.norm();

  auto try_candidate = [&](const Vec& cand, const CMat& witness) {
    Mat trial(selected.rows() + 1, d);
    trial.topRows(selected.rows()) = selected;
    trial.row(selected.rows()) = cand.transpose();
    Eigen::ColPivHouseholderQR<Mat> qr(trial.transpose());
    qr.setThreshold(1e-8);
    if (qr.rank() == trial.rows()) {
      selected = trial;
      basis.basis_elements.push_back(cand);
      basis.group_witnesses.push_back(witness);
      return true;
    }
    return false;
  };

  // The seed itself is on the orbit with identity witness.
  try_candidate(seed, CMat::Identity(algebra.matrix_size(), algebra.matrix_size()));

  for (int k = 0; k < sample_count && basis.dim() < d; ++k) {
    const Vec zeta = rng.normal_vector(d);
    const CMat u = algebra.exp(zeta);
    Vec cand = algebra.adjoint(u, seed);
    const double nrm_err = std::abs(algebra.norm(cand) - algebra.norm(seed));
    if (nrm_err > 1e-8 * (1.0 + scale))
      throw NumericsError("adjoint action failed to preserve the orbit norm");
    try_candidate(cand, u);
  }

  if (basis.dim() < d)
    throw StructuralError("orbit does not span the Lie algebra after " +
                          std::to_string(sample_count) + " samples");
  return basis;
}

}  // namespace ymlens

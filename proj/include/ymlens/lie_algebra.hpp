#ifndef YMLENS_LIE_ALGEBRA_HPP
#define YMLENS_LIE_ALGEBRA_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "ymlens/types.hpp"

namespace ymlens {

// Structure constants of a matrix Lie algebra in a fixed reference basis,
// with the convention [e_a, e_m] = c^b_{am} e_b.
struct StructureConstants {
  // by_third[m](a, b) = c^b_{am}
  std::vector<Mat> by_third;

  int dim() const { return static_cast<int>(by_third.size()); }

  double component(int b, int a, int m) const { return by_third[m](a, b); }

  // M(y)(a, b) = c^b_{am} y^m.  The charge transport of the dynamics is
  // xi_dot = -M(A(v)) xi when xi carries inner-product coordinates.
  Mat contract(const Vec& y) const;

  // [x, y]^b = c^b_{am} x^a y^m
  Vec bracket(const Vec& x, const Vec& y) const;

  double max_jacobi_residual() const;
};

// A compact matrix Lie algebra: reference basis of (complex) matrices plus an
// Ad-invariant inner product expressed by its coefficient matrix in that basis.
class LieAlgebra {
 public:
  LieAlgebra(std::string name, std::vector<CMat> generators, Mat inner_coefficients);

  static LieAlgebra u1();
  static LieAlgebra su2();
  static LieAlgebra so3();
  static LieAlgebra by_name(const std::string& name);

  const std::string& name() const { return name_; }
  int dim() const { return static_cast<int>(generators_.size()); }
  int matrix_size() const { return static_cast<int>(generators_[0].rows()); }
  const CMat& generator(int a) const { return generators_[a]; }
  const Mat& inner_coefficients() const { return inner_; }

  CMat matrix(const Vec& coords) const;
  // Least-squares coordinates of an arbitrary matrix in the reference basis.
  Vec coordinates(const CMat& element) const;
  // Distance of `element` to the span of the reference basis.
  double span_residual(const CMat& element) const;

  Vec bracket(const Vec& xi, const Vec& eta) const;
  double inner(const Vec& xi, const Vec& eta) const;
  double norm(const Vec& xi) const;

  // Inner-product (lowered) coordinates xi_a = K_{ab} xi^b and their inverse.
  Vec lower(const Vec& xi) const { return inner_ * xi; }
  Vec raise(const Vec& xi_low) const;

  // Group exponential of the matrix realization of `xi`.
  CMat exp(const Vec& xi) const;

  // u xi u^{-1}, re-expressed in the reference basis.
  Vec adjoint(const CMat& u, const Vec& xi) const;

  // Residual of the group-defining constraint u* u = 1.
  double group_defect(const CMat& u) const;
  // Nearest group element (polar projection).
  CMat project_to_group(const CMat& u) const;

 private:
  void validate() const;

  std::string name_;
  std::vector<CMat> generators_;
  Mat inner_;
  Mat inner_inverse_;
  // Real flattening of the generators (re/im stacked) and its factorization,
  // used to re-express matrices in the reference basis.
  Mat flat_;
  Eigen::ColPivHouseholderQR<Mat> flat_qr_;
};

StructureConstants structure_constants(const LieAlgebra& algebra);

// A basis of the Lie algebra contained in one adjoint orbit.
struct AdjointOrbitBasis {
  Vec seed;
  std::vector<Vec> basis_elements;
  std::vector<CMat> group_witnesses;

  int dim() const { return static_cast<int>(basis_elements.size()); }
  // Rows are the basis elements' coordinates.
  Mat coordinate_matrix() const;
};

// Samples group elements exp(zeta) with componentwise standard-normal zeta and
// greedily keeps adjoint images of the seed while they increase the rank.
// Throws StructuralError if the orbit does not span after sample_count draws.
AdjointOrbitBasis find_basis_in_orbit(const LieAlgebra& algebra, const Vec& seed,
                                      int sample_count, std::uint64_t rng_seed);

}  // namespace ymlens

#endif

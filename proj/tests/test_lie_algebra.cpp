#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ymlens/lie_algebra.hpp"
#include "ymlens/rng.hpp"

using namespace ymlens;

namespace {

Vec e(int i, int d = 3) {
  Vec v = Vec::Zero(d);
  v[i] = 1.0;
  return v;
}

}  // namespace

TEST_CASE("bracket basics") {
  const LieAlgebra su2 = LieAlgebra::su2();
  const LieAlgebra u1 = LieAlgebra::u1();

  Rng rng(11);
  for (int k = 0; k < 20; ++k) {
    const Vec xi = rng.normal_vector(3);
    CHECK(su2.bracket(xi, xi).cwiseAbs().maxCoeff() < 1e-12);
  }

  // hand commutators of e_j = -i sigma_j: [e1, e2] = 2 e3 cyclically
  CHECK((su2.bracket(e(0), e(1)) - 2.0 * e(2)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((su2.bracket(e(1), e(2)) - 2.0 * e(0)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((su2.bracket(e(2), e(0)) - 2.0 * e(1)).cwiseAbs().maxCoeff() < 1e-12);

  for (double a : {1.0, -2.5, 0.3})
    for (double b : {0.7, 4.0}) {
      Vec x(1), y(1);
      x[0] = a;
      y[0] = b;
      CHECK(u1.bracket(x, y).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("bracket antisymmetry and Jacobi over random triples") {
  const LieAlgebra g = LieAlgebra::su2();
  Rng rng(5);
  for (int k = 0; k < 100; ++k) {
    const Vec a = rng.normal_vector(3), b = rng.normal_vector(3), c = rng.normal_vector(3);
    CHECK((g.bracket(a, b) + g.bracket(b, a)).cwiseAbs().maxCoeff() < 1e-12);
    const Vec jac =
        g.bracket(a, g.bracket(b, c)) + g.bracket(b, g.bracket(c, a)) + g.bracket(c, g.bracket(a, b));
    CHECK(jac.cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("inner product is Ad-invariant") {
  for (const char* name : {"su2", "so3"}) {
    const LieAlgebra g = LieAlgebra::by_name(name);
    Rng rng(17);
    for (int k = 0; k < 100; ++k) {
      const Vec xi = rng.normal_vector(g.dim());
      const Vec eta = rng.normal_vector(g.dim());
      const Vec zeta = rng.normal_vector(g.dim());
      if (xi.norm() > 1e-10) CHECK(g.inner(xi, xi) > 0.0);

      const CMat u = g.exp(zeta);
      CHECK(g.inner(g.adjoint(u, xi), g.adjoint(u, eta)) ==
            doctest::Approx(g.inner(xi, eta)).epsilon(1e-10));
      CHECK(std::abs(g.inner(g.bracket(zeta, xi), eta) + g.inner(xi, g.bracket(zeta, eta))) <
            1e-10);
    }
  }
}

TEST_CASE("adjoint action: identity, norm preservation, composition") {
  const LieAlgebra g = LieAlgebra::su2();
  const CMat id = CMat::Identity(2, 2);
  Rng rng(23);
  for (int k = 0; k < 100; ++k) {
    const Vec xi = rng.normal_vector(3);
    CHECK((g.adjoint(id, xi) - xi).cwiseAbs().maxCoeff() < 1e-13);

    const CMat u = g.exp(rng.normal_vector(3));
    const CMat w = g.exp(rng.normal_vector(3));
    CHECK(std::abs(g.norm(g.adjoint(u, xi)) - g.norm(xi)) < 1e-10 * (1.0 + g.norm(xi)));
    const Vec lhs = g.adjoint(u, g.adjoint(w, xi));
    const Vec rhs = g.adjoint(CMat(u * w), xi);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("group exponential accuracy and projection") {
  const LieAlgebra g = LieAlgebra::su2();
  Rng rng(31);
  for (int k = 0; k < 20; ++k) {
    const Vec zeta = rng.normal_vector(3);
    const CMat u = g.exp(zeta);
    CHECK(g.group_defect(u) < 1e-12);
    const CMat v = g.exp(Vec(-zeta));
    CHECK((u * v - CMat::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);

    CMat drifted = u;
    drifted(0, 0) += Cplx(3e-8, -2e-8);
    const CMat projected = g.project_to_group(drifted);
    CHECK(g.group_defect(projected) < 1e-13);
    CHECK((projected - u).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("structure constants") {
  SUBCASE("abelian") {
    const StructureConstants c = structure_constants(LieAlgebra::u1());
    CHECK(c.by_third[0].cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("su2 convention and antisymmetry") {
    const LieAlgebra g = LieAlgebra::su2();
    const StructureConstants c = structure_constants(g);
    CHECK(c.component(2, 0, 1) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(c.component(2, 1, 0) == doctest::Approx(-2.0).epsilon(1e-12));
    for (int b = 0; b < 3; ++b)
      for (int a = 0; a < 3; ++a)
        for (int m = 0; m < 3; ++m)
          CHECK(c.component(b, a, m) == doctest::Approx(-c.component(b, m, a)).epsilon(1e-12));
    CHECK(c.max_jacobi_residual() < 1e-10);

    Rng rng(3);
    for (int k = 0; k < 50; ++k) {
      const Vec x = rng.normal_vector(3), y = rng.normal_vector(3);
      CHECK((c.bracket(x, y) - g.bracket(x, y)).cwiseAbs().maxCoeff() < 1e-10);
    }
  }
  SUBCASE("so3 convention") {
    const StructureConstants c = structure_constants(LieAlgebra::so3());
    CHECK(c.component(2, 0, 1) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(c.max_jacobi_residual() < 1e-10);
  }
}

TEST_CASE("find_basis_in_orbit") {
  SUBCASE("abelian orbit is a point") {
    const LieAlgebra g = LieAlgebra::u1();
    Vec seed(1);
    seed[0] = 1.0;
    const AdjointOrbitBasis basis = find_basis_in_orbit(g, seed, 16, 99);
    CHECK(basis.dim() == 1);
    CHECK((basis.basis_elements[0] - seed).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("su2 orbit spans") {
    const LieAlgebra g = LieAlgebra::su2();
    Vec seed(3);
    seed << 1.0, 0.0, 0.0;
    const AdjointOrbitBasis basis = find_basis_in_orbit(g, seed, 64, 99);
    REQUIRE(basis.dim() == 3);
    const double seed_norm = g.norm(seed);
    for (int j = 0; j < 3; ++j) {
      CHECK(std::abs(g.norm(basis.basis_elements[j]) - seed_norm) < 1e-10 * (1.0 + seed_norm));
      const Vec image = g.adjoint(basis.group_witnesses[j], seed);
      CHECK((image - basis.basis_elements[j]).cwiseAbs().maxCoeff() < 1e-10);
    }
    Eigen::ColPivHouseholderQR<Mat> qr(basis.coordinate_matrix());
    CHECK(qr.rank() == 3);
  }
  SUBCASE("zero seed rejected") {
    const LieAlgebra g = LieAlgebra::su2();
    CHECK_THROWS_AS(find_basis_in_orbit(g, Vec::Zero(3), 8, 1), StructuralError);
  }
  SUBCASE("orbit that cannot span") {
    // 2-dimensional abelian algebra: every adjoint orbit is a single point.
    std::vector<CMat> gens(2, CMat::Zero(2, 2));
    gens[0](0, 0) = Cplx(0, 1);
    gens[1](1, 1) = Cplx(0, 1);
    const LieAlgebra g("u1xu1", gens, Mat::Identity(2, 2));
    Vec seed(2);
    seed << 1.0, 0.0;
    CHECK_THROWS_AS(find_basis_in_orbit(g, seed, 32, 5), StructuralError);
  }
}

TEST_CASE("constructor rejects bad algebras") {
  // {E12, E21} does not close under commutators.
  std::vector<CMat> gens(2, CMat::Zero(2, 2));
  gens[0](0, 1) = 1.0;
  gens[1](1, 0) = 1.0;
  CHECK_THROWS_AS(LieAlgebra("broken", gens, Mat::Identity(2, 2)), StructuralError);

  std::vector<CMat> dup(2, CMat::Zero(1, 1));
  dup[0](0, 0) = Cplx(0, 1);
  dup[1](0, 0) = Cplx(0, 1);
  CHECK_THROWS_AS(LieAlgebra("dep", dup, Mat::Identity(2, 2)), StructuralError);

  const LieAlgebra g = LieAlgebra::su2();
  CHECK_THROWS_AS(g.bracket(Vec::Zero(2), Vec::Zero(3)), StructuralError);
}

TEST_CASE("lower/raise round trip with a non-trivial inner product") {
  std::vector<CMat> gens(1, CMat::Zero(1, 1));
  gens[0](0, 0) = Cplx(0, 1);
  Mat k(1, 1);
  k << 4.0;
  const LieAlgebra g("u1scaled", gens, k);
  Vec xi(1);
  xi[0] = 0.7;
  CHECK(g.lower(xi)[0] == doctest::Approx(2.8));
  CHECK((g.raise(g.lower(xi)) - xi).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(g.norm(xi) == doctest::Approx(1.4));
}

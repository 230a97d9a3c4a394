#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "retool/lie.hpp"

using namespace retool;

namespace {

VectorXd unit(int n, int i) { return VectorXd::Unit(n, i); }

MatrixXd random_spd(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  MatrixXd A(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) A(i, j) = gauss(rng);
  return A * A.transpose() + 0.5 * MatrixXd::Identity(n, n);
}

}  // namespace

TEST_CASE("so(3) structure constants") {
  LieAlgebra so3 = LieAlgebra::so3();
  CHECK(so3.antisymmetry_residual() < 1e-12);
  CHECK(so3.jacobi_residual() < 1e-12);
  CHECK(lie_bracket(so3, unit(3, 0), unit(3, 1)).isApprox(unit(3, 2)));
  CHECK(lie_bracket(so3, unit(3, 2), unit(3, 0)).isApprox(unit(3, 1)));
  CHECK(lie_bracket(so3, unit(3, 1), unit(3, 2)).isApprox(unit(3, 0)));
}

TEST_CASE("torus bracket vanishes") {
  LieAlgebra t2 = LieAlgebra::torus(2);
  CHECK(t2.antisymmetry_residual() < 1e-12);
  CHECK(t2.jacobi_residual() < 1e-12);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> gauss;
  for (int k = 0; k < 10; ++k) {
    VectorXd x(2), y(2);
    x << gauss(rng), gauss(rng);
    y << gauss(rng), gauss(rng);
    CHECK(lie_bracket(t2, x, y).norm() == 0.0);
  }
}

TEST_CASE("coadjoint convention <ad*_xi mu, eta> = <mu, [xi, eta]>") {
  LieAlgebra so3 = LieAlgebra::so3();
  // xi = e1, mu = e2* -> -e3*
  CHECK(coad(so3, unit(3, 0), unit(3, 1)).isApprox(-unit(3, 2)));
  // mu aligned with xi
  CHECK(coad(so3, unit(3, 2), unit(3, 2)).norm() == 0.0);
  LieAlgebra t2 = LieAlgebra::torus(2);
  CHECK(coad(t2, VectorXd::Ones(2), VectorXd::Ones(2)).norm() == 0.0);
}

TEST_CASE("coad pairing identity on random triples") {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> gauss;
  for (const LieAlgebra& alg : {LieAlgebra::so3(), LieAlgebra::torus(2),
                                LieAlgebra::abelian(4)}) {
    for (int k = 0; k < 100; ++k) {
      VectorXd xi(alg.dim()), eta(alg.dim()), mu(alg.dim());
      for (int i = 0; i < alg.dim(); ++i) {
        xi(i) = gauss(rng);
        eta(i) = gauss(rng);
        mu(i) = gauss(rng);
      }
      const double lhs = coad(alg, xi, mu).dot(eta);
      const double rhs = mu.dot(lie_bracket(alg, xi, eta));
      CHECK(std::abs(lhs - rhs) < 1e-12 * std::max(1.0, std::abs(rhs)));
    }
  }
}

TEST_CASE("fixed subspace of the diagonal rotation action on R^4 is trivial") {
  GroupRep rep;
  rep.n = 4;
  MatrixXd A = MatrixXd::Zero(4, 4);
  A(0, 1) = 1; A(1, 0) = -1; A(2, 3) = 1; A(3, 2) = -1;
  rep.infinitesimal = {A};
  CHECK(fixed_subspace(rep).cols() == 0);
}

TEST_CASE("fixed subspace of the trivial group is everything") {
  GroupRep rep;
  rep.n = 5;
  MatrixXd F = fixed_subspace(rep);
  CHECK(F.cols() == 5);
}

TEST_CASE("fixed subspace of Z2 acting by -I is trivial") {
  GroupRep rep;
  rep.n = 2;
  rep.finite = {-MatrixXd::Identity(2, 2)};
  CHECK(fixed_subspace(rep).cols() == 0);
}

TEST_CASE("fixed subspace vectors are actually fixed") {
  GroupRep rep;
  rep.n = 4;
  MatrixXd A = MatrixXd::Zero(4, 4);
  A(0, 1) = 1; A(1, 0) = -1;  // rotation in the first plane only
  rep.infinitesimal = {A};
  MatrixXd R = MatrixXd::Identity(4, 4);
  R(2, 2) = -1;  // reflection of the third coordinate
  rep.finite = {R};
  MatrixXd F = fixed_subspace(rep);
  REQUIRE(F.cols() == 1);
  for (int j = 0; j < F.cols(); ++j) {
    CHECK((A * F.col(j)).norm() < 1e-9);
    CHECK((R * F.col(j) - F.col(j)).norm() < 1e-9);
  }
}

TEST_CASE("co-centrality: Abelian ambient always passes") {
  LieAlgebra t2 = LieAlgebra::torus(2);
  MatrixXd line(2, 1);
  line << 1, 0.3;
  CocentralResult r = check_cocentral(t2, line, MatrixXd::Identity(2, 2));
  CHECK(r.cocentral);
}

TEST_CASE("co-centrality fails for span(e3) in so(3), with witness") {
  LieAlgebra so3 = LieAlgebra::so3();
  MatrixXd h(3, 1);
  h << 0, 0, 1;
  CocentralResult r = check_cocentral(so3, h, MatrixXd::Identity(3, 3));
  CHECK_FALSE(r.cocentral);
  REQUIRE(r.witness_a.size() == 3);
  CHECK(lie_bracket(so3, r.witness_a, r.witness_b).norm() > 1e-6);
  CHECK(r.witness_bracket.norm() > 1e-6);
}

TEST_CASE("co-centrality with trivial complement is vacuous") {
  LieAlgebra so3 = LieAlgebra::so3();
  CocentralResult r =
      check_cocentral(so3, MatrixXd::Identity(3, 3), MatrixXd::Identity(3, 3));
  CHECK(r.cocentral);
}

TEST_CASE("co-centrality verdict is inner-product independent") {
  std::mt19937_64 rng(99);
  MatrixXd h(3, 1);
  h << 0, 0, 1;
  MatrixXd line(2, 1);
  line << 0.7, -0.2;
  for (int k = 0; k < 5; ++k) {
    {
      LieAlgebra so3(
          {so3_hat(Vector3d::UnitX()), so3_hat(Vector3d::UnitY()),
           so3_hat(Vector3d::UnitZ())},
          random_spd(3, rng), {"e1", "e2", "e3"}, GroupKind::SO3);
      CHECK_FALSE(check_cocentral(so3, h, MatrixXd::Identity(3, 3)).cocentral);
    }
    {
      LieAlgebra t2({MatrixXd::Zero(2, 2), MatrixXd::Zero(2, 2)}, random_spd(2, rng),
                    {"t1", "t2"}, GroupKind::Torus);
      CHECK(check_cocentral(t2, line, MatrixXd::Identity(2, 2)).cocentral);
    }
  }
}

TEST_CASE("cocentral containment check") {
  LieAlgebra so3 = LieAlgebra::so3();
  MatrixXd h(3, 1);
  h << 0, 0, 1;
  MatrixXd amb(3, 1);
  amb << 1, 0, 0;
  CHECK_THROWS_AS(check_cocentral(so3, h, amb), DimensionError);
}

TEST_CASE("normalizer algebra of SO(2) about e3 in so(3)") {
  LieAlgebra so3 = LieAlgebra::so3();
  GroupRep ad_rep;
  ad_rep.n = 3;
  ad_rep.infinitesimal = {so3.ad(unit(3, 2))};
  MatrixXd h(3, 1);
  h << 0, 0, 1;
  MatrixXd n = normalizer_algebra(so3, ad_rep, h);
  REQUIRE(n.cols() == 1);
  CHECK(n.col(0).normalized().isApprox(unit(3, 2)));
}

TEST_CASE("normalizer algebra with trivial H is all of g") {
  LieAlgebra so3 = LieAlgebra::so3();
  GroupRep trivial;
  trivial.n = 3;
  MatrixXd h(3, 1);
  h << 0, 0, 1;
  CHECK(normalizer_algebra(so3, trivial, h).cols() == 3);
}

TEST_CASE("normalizer algebra in the Abelian case is all of g") {
  LieAlgebra t2 = LieAlgebra::torus(2);
  GroupRep trivial;
  trivial.n = 2;
  MatrixXd h(2, 1);
  h << 1, 1;
  CHECK(normalizer_algebra(t2, trivial, h).cols() == 2);
}

TEST_CASE("splitting projections are idempotent and sum to the identity") {
  LieAlgebra so3 = LieAlgebra::so3();
  MatrixXd Bgz(3, 1);
  Bgz << 0, 0, 1;
  Splitting s = Splitting::make(so3, Bgz, MatrixXd::Identity(3, 3));
  CHECK(s.dim_gz() == 1);
  CHECK(s.dim_m() == 2);
  CHECK(s.dim_q() == 0);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> gauss;
  for (int k = 0; k < 20; ++k) {
    VectorXd x(3);
    x << gauss(rng), gauss(rng), gauss(rng);
    VectorXd sum = s.proj_gz(x) + s.proj_m(x) + s.proj_q(x);
    CHECK((sum - x).norm() < 1e-12);
    CHECK((s.proj_m(s.proj_m(x)) - s.proj_m(x)).norm() < 1e-12);
    CHECK((s.proj_gz(s.proj_gz(x)) - s.proj_gz(x)).norm() < 1e-12);
  }
}

TEST_CASE("dual embeddings pair correctly against the splitting") {
  LieAlgebra t2 = LieAlgebra::torus(2);
  MatrixXd Bgz(2, 1), Bm(2, 1);
  Bgz << 1, 1;
  Bm << 0.5, -0.5;
  Splitting s = Splitting::make(t2, Bgz, MatrixXd::Identity(2, 2), Bm);
  VectorXd alpha = VectorXd::Constant(1, 2.5);
  VectorXd mu = s.embed_mstar(alpha);
  // annihilates g_z, pairs to alpha on the m basis
  CHECK(std::abs(mu.dot(s.basis_gz().col(0))) < 1e-14);
  CHECK(std::abs(mu.dot(s.basis_m().col(0)) - 2.5) < 1e-14);
  CHECK((s.mstar_coords(mu) - alpha).norm() < 1e-14);
  CHECK(s.gzstar_coords(mu).norm() < 1e-14);
}

TEST_CASE("splitting invariance defect under the Ad action") {
  LieAlgebra so3 = LieAlgebra::so3();
  MatrixXd Bgz(3, 1);
  Bgz << 0, 0, 1;
  Splitting s = Splitting::make(so3, Bgz, MatrixXd::Identity(3, 3));
  GroupRep ad_rep;
  ad_rep.n = 3;
  ad_rep.infinitesimal = {so3.ad(unit(3, 2))};  // Ad generator of G_z = S^1(e3)
  CHECK(s.invariance_defect(ad_rep) < 1e-10);
}

TEST_CASE("splitting rejects dependent bases") {
  LieAlgebra so3 = LieAlgebra::so3();
  MatrixXd Bgz(3, 1);
  Bgz << 0, 0, 1;
  MatrixXd Bm(3, 2);
  Bm << 0, 0, 0, 0, 1, 1;  // contains e3 again
  CHECK_THROWS_AS(Splitting::make(so3, Bgz, MatrixXd::Identity(3, 3), Bm),
                  DimensionError);
}

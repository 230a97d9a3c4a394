#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "retool/models.hpp"
#include "retool/pencil.hpp"

using namespace retool;

TEST_CASE("top Hessian coefficients at the reference parameters") {
  TopParams p;
  p.lambda = 5.0;
  TopHessian h = lagrange_top_hessian(p, -1.25);
  CHECK(h.A == doctest::Approx(2.125).epsilon(1e-15));
  CHECK(h.B == doctest::Approx(1.25).epsilon(1e-15));
  CHECK(h.C == doctest::Approx(1.0).epsilon(1e-15));
  // matrix assembled exactly as printed
  CHECK(h.M(0, 0) == h.A);
  CHECK(h.M(0, 3) == h.B);
  CHECK(h.M(1, 2) == -h.B);
  CHECK(h.M(2, 2) == h.C);
}

TEST_CASE("resting top coefficients") {
  TopParams p;
  p.lambda = 0.0;
  TopHessian h = lagrange_top_hessian(p, 0.0);
  CHECK(h.A == doctest::Approx(-1.0));  // -mgl
  CHECK(h.B == 0.0);
  CHECK(h.C == doctest::Approx(1.0));
}

TEST_CASE("top eigenvalues match the sigma closed form on a parameter grid") {
  TopParams p;
  for (int i = 0; i < 10; ++i) {
    p.lambda = 0.5 + 0.9 * i;
    for (int j = 0; j < 10; ++j) {
      const double eta = -2.0 + 0.45 * j;
      TopHessian h = lagrange_top_hessian(p, eta);
      auto [sm, sp] = lagrange_top_sigma(h.A, h.B, h.C);
      EigResult r = eig_sym(h.M);
      CHECK(std::abs(r.values(0) - sm) < 1e-12 * std::max(1.0, std::abs(sm)));
      CHECK(std::abs(r.values(1) - sm) < 1e-12 * std::max(1.0, std::abs(sm)));
      CHECK(std::abs(r.values(2) - sp) < 1e-12 * std::max(1.0, std::abs(sp)));
      CHECK(std::abs(r.values(3) - sp) < 1e-12 * std::max(1.0, std::abs(sp)));
    }
  }
}

TEST_CASE("fast-top threshold closed forms") {
  TopParams p;
  FastTopThreshold t = fast_top_threshold(p);
  CHECK(t.lambda_sq == doctest::Approx(16.0).epsilon(1e-15));
  CHECK(t.k_opt == doctest::Approx(-0.25).epsilon(1e-15));

  TopParams flat = p;
  flat.I3 = 1e6;
  CHECK(fast_top_threshold(flat).lambda_sq < 1e-11);

  TopParams heavy = p;
  heavy.m = 2.0;
  CHECK(fast_top_threshold(heavy).lambda_sq ==
        doctest::Approx(2.0 * t.lambda_sq).epsilon(1e-15));
}

TEST_CASE("threshold formula agrees with verdict bisection at generic parameters") {
  // independent computations of the same boundary, away from 2 I3 = I1
  TopParams p;
  p.m = 1.3;
  p.I3 = 0.7;
  const double lambda_star = std::sqrt(fast_top_threshold(p).lambda_sq);
  auto definite = [&](double lambda) {
    TopParams q = p;
    q.lambda = lambda;
    HessianPencil pencil;
    pencil.H0 = lagrange_top_hessian(q, 0.0).M;
    pencil.Q = {lagrange_top_Q(q)};
    StabilityCertificate cert = certify_definite(pencil, EtaBox::cube(1, 20.0));
    return cert.verdict == Definiteness::PositiveDefinite ||
           cert.verdict == Definiteness::NegativeDefinite;
  };
  double lo = 2.0, hi = 5.0;
  REQUIRE(!definite(lo));
  REQUIRE(definite(hi));
  while (hi - lo > 1e-7 * lambda_star) {
    const double mid = 0.5 * (lo + hi);
    (definite(mid) ? hi : lo) = mid;
  }
  CHECK(std::abs(0.5 * (lo + hi) - lambda_star) < 1e-6 * lambda_star);
}

TEST_CASE("sleeping-branch determinant agrees with the pencil at the base point") {
  TopParams p;
  p.lambda = 5.0;
  for (double eta : {-1.25, -0.5, 0.0, 0.7}) {
    TopHessian h = lagrange_top_hessian(p, eta);
    CHECK(sleeping_branch_det(p, eta, 0.0) ==
          doctest::Approx(h.A * h.C - h.B * h.B).epsilon(1e-12));
  }
}

TEST_CASE("top model pencil reproduces the printed family") {
  TopParams p;
  p.lambda = 5.0;
  LocalModel m = make_lagrange_top(p);
  HessianPencil pp = pencil_at(m, VectorXd::Zero(1));
  for (double eta : {-1.25, 0.0, 1.0}) {
    MatrixXd expected = lagrange_top_hessian(p, eta).M;
    MatrixXd got = pp.eval(VectorXd::Constant(1, eta));
    CHECK((got - expected).cwiseAbs().maxCoeff() < 1e-12);
  }
  // along the branch the determinant family matches the transported quadratic
  for (double rho : {-0.2, 0.1, 0.3}) {
    for (double eta : {-0.6, 0.2}) {
      HbarDerivs d = hbar_eta_derivs(m, VectorXd::Constant(1, eta),
                                     VectorXd::Constant(1, rho), VectorXd::Zero(4));
      MatrixXd blk(2, 2);
      blk << d.d2_N(0, 0), d.d2_N(0, 3), d.d2_N(3, 0), d.d2_N(3, 3);
      CHECK(blk.determinant() ==
            doctest::Approx(sleeping_branch_det(p, eta, rho)).epsilon(1e-10));
    }
  }
}

TEST_CASE("toy model slice data") {
  LocalModel m = make_toy_so3_s1();
  HessianPencil p = pencil_at(m, VectorXd::Zero(2));
  MatrixXd H0 = p.eval(VectorXd::Zero(1));
  MatrixXd expected = MatrixXd::Zero(4, 4);
  expected.diagonal() << 1, 1, -1, -1;
  CHECK((H0 - expected).cwiseAbs().maxCoeff() < 1e-14);
  StabilityCertificate c = certify_definite(p, EtaBox::cube(1, 5.0));
  CHECK(c.verdict == Definiteness::NegativeDefinite);
  CHECK(c.eta_star(0) > 1.0);
  VectorXd v(4);
  v << 1, 2, -1, 0.5;
  CHECK(std::abs(momentum_map_N(m, v)(0)) ==
        doctest::Approx(0.5 * v.squaredNorm()).epsilon(1e-14));
}

TEST_CASE("vortex slice form and Hessian data") {
  LocalModel m = build_vortex_slice(2.0, 1.0);
  CHECK(m.N_dim == 2);
  CHECK(m.dim_mstar == 0);
  CHECK(m.Omega(0, 1) == doctest::Approx(-2.0));  // Gamma1 Gamma2 (Gamma2 - Gamma1)
  HbarDerivs d = hbar_eta_derivs(m, VectorXd::Zero(1), VectorXd(0), VectorXd::Zero(2));
  CHECK((d.d2_N - MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("equal vorticities give a trivial slice with a 2-dimensional m*") {
  LocalModel m = build_vortex_slice(1.0, 1.0);
  CHECK(m.N_dim == 0);
  CHECK(m.dim_mstar == 2);
  CHECK(m.subgroups.count("Z2n") == 1);
}

TEST_CASE("vortex model rejects zero vorticities") {
  CHECK_THROWS_AS(build_vortex_slice(0.0, 1.0), DimensionError);
}

TEST_CASE("vortex velocity formula") {
  VortexParams p;
  p.Gamma1 = 1.0;
  p.Gamma2 = 1.0;
  p.theta = M_PI / 2;
  // x1 = e3, x2 = e1, sin^2(pi/4) = 1/2 -> xi = mu
  Vector3d xi = vortex_velocity(p);
  CHECK((xi - Vector3d(1, 0, 1)).norm() < 1e-12);

  VortexParams q;
  q.Gamma1 = 2.0;
  q.Gamma2 = 1.0;
  q.theta = M_PI;
  Vector3d lim = vortex_velocity(q);  // antipodal limit: xi -> mu/2
  CHECK((lim - Vector3d(0, 0, 0.5)).norm() < 1e-10);

  VortexParams z;
  z.Gamma1 = 1.0;
  z.Gamma2 = 1.0;
  z.theta = M_PI;
  CHECK(vortex_velocity(z).norm() < 1e-12);
}

TEST_CASE("non-antipodal pairs rotate rigidly for one period") {
  for (auto [g1, g2] : std::vector<std::pair<double, double>>{{1.0, 1.0}, {2.0, 1.0}}) {
    VortexParams p;
    p.Gamma1 = g1;
    p.Gamma2 = g2;
    p.theta = M_PI / 2;
    Vector3d xi = vortex_velocity(p);
    const double T = 2.0 * M_PI / xi.norm();
    const int steps = static_cast<int>(std::ceil(T / 1e-4));
    Vector3d x1(0, 0, 1), x2(std::sin(p.theta), 0, std::cos(p.theta));
    Vector3d x1_0 = x1, x2_0 = x2;
    vortex_integrate(g1, g2, x1, x2, T, T / steps);
    CHECK((x1 - x1_0).norm() < 1e-6);
    CHECK((x2 - x2_0).norm() < 1e-6);
  }
}

TEST_CASE("the equations of motion are the rigid rotation with the formula velocity") {
  VortexParams p;
  p.Gamma1 = 2.0;
  p.Gamma2 = 1.0;
  p.theta = 1.1;
  Vector3d x1(0, 0, 1);
  Vector3d x2(std::sin(p.theta), 0, std::cos(p.theta));
  Vector3d xi = vortex_velocity(p);
  Vector3d d1, d2;
  vortex_eom(p.Gamma1, p.Gamma2, x1, x2, d1, d2);
  CHECK((d1 - xi.cross(x1)).norm() < 1e-13);
  CHECK((d2 - xi.cross(x2)).norm() < 1e-13);
}

TEST_CASE("vortex reconstruction: momentum is exact and axial") {
  LocalModel m = build_vortex_slice(2.0, 1.0);
  std::mt19937_64 rng(20);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  for (int k = 0; k < 20; ++k) {
    VectorXd v(2);
    v << u(rng), u(rng);
    VortexConfiguration c = vortex_reconstruct(m, v);
    CHECK(std::abs(c.x1.norm() - 1.0) < 1e-14);
    CHECK(std::abs(c.x2.norm() - 1.0) < 1e-14);
    Vector3d mu = c.momentum(2.0, 1.0);
    CHECK(std::abs(mu(0)) < 1e-12);
    CHECK(std::abs(mu(1)) < 1e-12);
    // momentum normal form holds exactly through the chart
    const double expected = 1.0 + momentum_map_N(m, v)(0);
    CHECK(mu(2) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("toy radial potential enters the m*-gradient") {
  LocalModel m = make_toy_so3_s1({1.0});  // f(rho) = ||rho||^2
  VectorXd rho(2);
  rho << 0.3, -0.4;
  HbarDerivs d = hbar_eta_derivs(m, VectorXd::Zero(1), rho, VectorXd::Zero(4));
  CHECK((d.d_rho - 2.0 * rho).cwiseAbs().maxCoeff() < 1e-12);
}

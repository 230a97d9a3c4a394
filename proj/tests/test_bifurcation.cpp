#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "retool/bifurcation.hpp"
#include "retool/models.hpp"

using namespace retool;

namespace {

KernelData vortex_kernel(const LocalModel& m) {
  HessianPencil p = pencil_at(m, VectorXd(0));
  return kernel_analysis(m, p, VectorXd::Constant(1, 0.5), m.subgroups.at("e"));
}

}  // namespace

TEST_CASE("vortex kernel at the degeneracy: the whole 2-dim slice, circle action") {
  LocalModel m = build_vortex_slice(2.0, 1.0);
  KernelData kd = vortex_kernel(m);
  CHECK(kd.degenerate);
  CHECK(kd.kernel.cols() == 2);
  CHECK(kd.complement.cols() == 0);
  CHECK(kd.cohomogeneity_one);
  CHECK(kd.kernel_invariance_defect < 1e-9);
}

TEST_CASE("definite pencil has an empty kernel") {
  LocalModel m = make_toy_so3_s1();
  HessianPencil p = pencil_at(m, VectorXd::Zero(2));
  KernelData kd = kernel_analysis(m, p, VectorXd::Constant(1, 2.0),
                                  m.subgroups.at("e"));
  CHECK_FALSE(kd.degenerate);
  CHECK(kd.kernel.cols() == 0);
}

TEST_CASE("top kernel at the threshold parameters spans the printed pair") {
  TopParams tp;
  tp.lambda = 5.0;
  LocalModel m = make_lagrange_top(tp);
  HessianPencil p = pencil_at(m, VectorXd::Zero(1));
  // eta chosen so that AC - B^2 = 0: root of the quadratic nearest zero
  StabilityCertificate cert = certify_definite(p, EtaBox::cube(1, 1e3));
  MatrixXd block(4, 2);
  block.setZero();
  block(0, 0) = 1;
  block(3, 1) = 1;
  GenericCrossing gc = generic_crossing_search(p, block, cert.eta_star,
                                               VectorXd::Ones(1));
  KernelData kd = kernel_analysis(m, p, gc.eta_total, m.subgroups.at("e"));
  REQUIRE(kd.degenerate);
  REQUIRE(kd.kernel.cols() == 2);
  CHECK(kd.cohomogeneity_one);
  // kernel vectors have the printed shape (a, 0, 0, -(B/C) a), (0, b, (B/C) b, 0)
  TopHessian h = lagrange_top_hessian(tp, gc.eta_total(0));
  const double ratio = h.B / h.C;
  VectorXd k1(4), k2(4);
  k1 << 1, 0, 0, -ratio;
  k2 << 0, 1, ratio, 0;
  k1.normalize();
  k2.normalize();
  MatrixXd P = kd.kernel * kd.kernel.transpose();
  CHECK((P * k1 - k1).norm() < 1e-7);
  CHECK((P * k2 - k2).norm() < 1e-7);
}

TEST_CASE("crossing detection on the linear vortex eigenvalue family") {
  const double g1 = 2.0, g2 = 1.0;
  auto sigma = [&](double etap) { return g1 * g2 * (g2 - g1) * etap; };
  CrossingResult r = detect_crossing(sigma, -1.0, 1.0);
  REQUIRE(r.found());
  CHECK(std::abs(r.location()) < 1e-10);
}

TEST_CASE("sign-definite and tangential families report no crossing") {
  CHECK_FALSE(detect_crossing([](double) { return 1.0; }, -1.0, 1.0).found());
  CHECK_FALSE(detect_crossing([](double x) { return x * x; }, -1.0, 1.0).found());
}

TEST_CASE("multiple crossings are all reported in order") {
  CrossingResult r = detect_crossing([](double x) { return std::sin(4.0 * x); },
                                     0.1, 3.0, 301);
  REQUIRE(r.crossings.size() == 3);
  CHECK(r.crossings[0] == doctest::Approx(M_PI / 4).epsilon(1e-8));
  CHECK(r.crossings[1] == doctest::Approx(M_PI / 2).epsilon(1e-8));
  CHECK(r.crossings[2] == doctest::Approx(3 * M_PI / 4).epsilon(1e-8));
}

TEST_CASE("top branch determinant crosses zero at the branch base") {
  TopParams tp;
  tp.lambda = 5.0;
  LocalModel m = make_lagrange_top(tp);
  HessianPencil p = pencil_at(m, VectorXd::Zero(1));
  StabilityCertificate cert = certify_definite(p, EtaBox::cube(1, 1e3));
  MatrixXd block(4, 2);
  block.setZero();
  block(0, 0) = 1;
  block(3, 1) = 1;
  GenericCrossing gc = generic_crossing_search(p, block, cert.eta_star,
                                               VectorXd::Ones(1));
  auto sigma = [&](double rho) { return sleeping_branch_det(tp, gc.eta_total(0), rho); };
  CrossingResult r = detect_crossing(sigma, -0.2, 0.2);
  REQUIRE(r.found());
  CHECK(std::abs(r.location()) < 1e-10);
}

TEST_CASE("degenerate shift roots of a diagonal block") {
  MatrixXd M0(2, 2), D(2, 2);
  M0 << 1, 0, 0, 2;
  D << 1, 0, 0, -1;
  DegenerateShift s = find_degenerate_shift(M0, D);
  CHECK(s.t_star == doctest::Approx(-1.0).epsilon(1e-14));
  REQUIRE(s.roots.size() == 2);
  CHECK(s.roots[1] == doctest::Approx(2.0).epsilon(1e-14));
  CHECK((s.matrix - (MatrixXd(2, 2) << 0, 0, 0, 3).finished()).cwiseAbs().maxCoeff() <
        1e-14);
}

TEST_CASE("proportional directions are rejected as non-generic") {
  MatrixXd M0(2, 2);
  M0 << 1, 0.5, 0.5, 2;
  CHECK_THROWS_AS(find_degenerate_shift(M0, MatrixXd(3.0 * M0)), HypothesisError);
}

TEST_CASE("a direction that never degenerates reports no real root") {
  MatrixXd M0(2, 2), D(2, 2);
  M0 << 1, 0, 0, -1;
  D << 0, 1, 1, 0;  // det(M0 + tD) = -1 - t^2 < 0
  CHECK_THROWS_AS(find_degenerate_shift(M0, D), HypothesisError);
}

TEST_CASE("generic crossing search on the top recovers the eta quadratic root") {
  TopParams tp;
  tp.lambda = 5.0;
  LocalModel m = make_lagrange_top(tp);
  HessianPencil p = pencil_at(m, VectorXd::Zero(1));
  StabilityCertificate cert = certify_definite(p, EtaBox::cube(1, 1e3));
  MatrixXd block(4, 2);
  block.setZero();
  block(0, 0) = 1;
  block(3, 1) = 1;
  GenericCrossing gc = generic_crossing_search(p, block, cert.eta_star,
                                               VectorXd::Ones(1));
  // AC - B^2 = -1 - 2.5 eta - eta^2 vanishes at eta = -1/2 and eta = -2;
  // the nearer root from eta* = -40/41 is -1/2
  CHECK(gc.eta_total(0) == doctest::Approx(-0.5).epsilon(1e-12));
  EigResult r = eig_sym(gc.restricted);
  CHECK(std::abs(r.values(0)) < 1e-10);
  CHECK(std::abs(r.values(1)) > 1e-3);
}

TEST_CASE("generic crossing search needs a definite base restriction") {
  TopParams tp;
  tp.lambda = 5.0;
  LocalModel m = make_lagrange_top(tp);
  HessianPencil p = pencil_at(m, VectorXd::Zero(1));
  MatrixXd block(4, 2);
  block.setZero();
  block(0, 0) = 1;
  block(3, 1) = 1;
  CHECK_THROWS_AS(
      generic_crossing_search(p, block, VectorXd::Zero(1), VectorXd::Ones(1)),
      HypothesisError);
}

TEST_CASE("vortex Lyapunov-Schmidt: nontrivial points with exact velocities") {
  LocalModel m = build_vortex_slice(2.0, 1.0);
  KernelData kd = vortex_kernel(m);
  ParameterChart chart;
  chart.lo = 0.0;
  chart.hi = 1.0;
  chart.rho = [](double) { return VectorXd(0); };
  chart.eta = [](double x) { return VectorXd::Constant(1, x); };
  std::vector<double> mags = {1e-3, 1e-2, 5e-2, 1e-1};
  BifurcationReport rep = lyapunov_schmidt(m, chart, kd, m.subgroups.at("e"), mags);
  CHECK(rep.n_converged == 4);
  for (const auto& bp : rep.points) {
    REQUIRE_FALSE(bp.skipped);
    CHECK(bp.point.v.norm() > 1e-4);
    CHECK(bp.point.r2_norm < 1e-8);
    CHECK(bp.trivial_isotropy);
    CHECK(bp.L_fixes_point);
    // the located velocity equals the rigid-rotation formula of the
    // reconstructed pair
    VortexConfiguration c = vortex_reconstruct(m, bp.point.v);
    const double th = c.theta();
    const double expected =
        c.momentum(2.0, 1.0).norm() / (2.0 * std::sin(th / 2) * std::sin(th / 2));
    CHECK(bp.point.eta(0) == doctest::Approx(expected).epsilon(1e-10));
  }
}

TEST_CASE("reversed vorticity ordering bifurcates on the negative side") {
  LocalModel m = build_vortex_slice(1.0, 2.0);
  HessianPencil p = pencil_at(m, VectorXd(0));
  auto sigma = [&](double eta) {
    return eig_sym(p.eval(VectorXd::Constant(1, eta))).values(0);
  };
  CrossingResult cr = detect_crossing(sigma, -1.0, 0.0, 129, 1e-12);
  REQUIRE(cr.found());
  CHECK(cr.location() == doctest::Approx(-0.5).epsilon(1e-10));
  KernelData kd = kernel_analysis(m, p, VectorXd::Constant(1, cr.location()),
                                  m.subgroups.at("e"));
  REQUIRE(kd.cohomogeneity_one);
  ParameterChart chart;
  chart.lo = -1.0;
  chart.hi = 0.0;
  chart.rho = [](double) { return VectorXd(0); };
  chart.eta = [](double x) { return VectorXd::Constant(1, x); };
  BifurcationReport rep =
      lyapunov_schmidt(m, chart, kd, m.subgroups.at("e"), {1e-2, 5e-2});
  REQUIRE(rep.n_converged == 2);
  for (const auto& bp : rep.points) {
    VortexConfiguration c = vortex_reconstruct(m, bp.point.v);
    const double th = c.theta();
    const double formula = c.momentum(1.0, 2.0).norm() /
                           (2.0 * std::sin(th / 2) * std::sin(th / 2));
    CHECK(std::abs(bp.point.eta(0)) == doctest::Approx(formula).epsilon(1e-8));
  }
}

TEST_CASE("Lyapunov-Schmidt is equivariant along the kernel circle") {
  LocalModel m = build_vortex_slice(2.0, 1.0);
  KernelData kd = vortex_kernel(m);
  ParameterChart chart;
  chart.lo = 0.0;
  chart.hi = 1.0;
  chart.rho = [](double) { return VectorXd(0); };
  chart.eta = [](double x) { return VectorXd::Constant(1, x); };
  std::vector<double> mags = {0.05};
  BifurcationReport a = lyapunov_schmidt(m, chart, kd, m.subgroups.at("e"), mags);
  // rotate the sampled kernel direction by a quarter turn
  KernelData rot = kd;
  rot.kernel.col(0) = kd.kernel.col(1);
  rot.kernel.col(1) = -kd.kernel.col(0);
  BifurcationReport b = lyapunov_schmidt(m, chart, rot, m.subgroups.at("e"), mags);
  REQUIRE(a.n_converged == 1);
  REQUIRE(b.n_converged == 1);
  CHECK(std::abs(a.points[0].lambda - b.points[0].lambda) < 1e-6);
}

TEST_CASE("top Lyapunov-Schmidt produces precessing solutions") {
  TopParams tp;
  tp.lambda = 5.0;
  LocalModel m = make_lagrange_top(tp);
  HessianPencil p = pencil_at(m, VectorXd::Zero(1));
  StabilityCertificate cert = certify_definite(p, EtaBox::cube(1, 1e3));
  MatrixXd block(4, 2);
  block.setZero();
  block(0, 0) = 1;
  block(3, 1) = 1;
  GenericCrossing gc = generic_crossing_search(p, block, cert.eta_star,
                                               VectorXd::Ones(1));
  KernelData kd = kernel_analysis(m, p, gc.eta_total, m.subgroups.at("e"));
  ParameterChart chart;
  chart.lo = -0.2;
  chart.hi = 0.2;
  chart.rho = [](double x) { return VectorXd::Constant(1, x); };
  const double eta_tot = gc.eta_total(0);
  chart.eta = [eta_tot](double) { return VectorXd::Constant(1, eta_tot); };
  std::vector<double> mags;
  for (int i = 0; i < 6; ++i) mags.push_back(1e-3 * std::pow(100.0, i / 5.0));
  BifurcationReport rep = lyapunov_schmidt(m, chart, kd, m.subgroups.at("e"), mags);
  CHECK(rep.n_converged >= 5);
  for (const auto& bp : rep.points) {
    if (bp.skipped) continue;
    CHECK(bp.point.r1_norm < 1e-8);
    CHECK(bp.point.r2_norm < 1e-8);
    CHECK(bp.point.v.norm() > 1e-4);
    CHECK(bp.trivial_isotropy);
    CHECK(bp.inner_hessian_min_abs_eig > 1e-6);
  }
}

TEST_CASE("Lyapunov-Schmidt refuses a non-degenerate kernel") {
  LocalModel m = make_toy_so3_s1();
  HessianPencil p = pencil_at(m, VectorXd::Zero(2));
  KernelData kd = kernel_analysis(m, p, VectorXd::Constant(1, 2.0),
                                  m.subgroups.at("e"));
  ParameterChart chart;
  chart.lo = -1;
  chart.hi = 1;
  chart.rho = [](double) { return VectorXd::Zero(2); };
  chart.eta = [](double x) { return VectorXd::Constant(1, x); };
  CHECK_THROWS_AS(lyapunov_schmidt(m, chart, kd, m.subgroups.at("e"), {0.01}),
                  HypothesisError);
}

TEST_CASE("kernel detection survives a crossing located off the sample grid") {
  // a window whose grid misses the exact degeneracy: bisection returns
  // 0.5 +/- eps and the restricted matrix there is only roundoff-sized
  LocalModel m = build_vortex_slice(2.0, 1.0);
  HessianPencil p = pencil_at(m, VectorXd(0));
  auto sigma = [&](double eta) {
    return eig_sym(p.eval(VectorXd::Constant(1, eta))).values(0);
  };
  CrossingResult cr = detect_crossing(sigma, 0.0013, 0.9991, 129, 1e-12);
  REQUIRE(cr.found());
  KernelData kd = kernel_analysis(m, p, VectorXd::Constant(1, cr.location()),
                                  m.subgroups.at("e"));
  CHECK(kd.degenerate);
  CHECK(kd.kernel.cols() == 2);
  CHECK(kd.cohomogeneity_one);
}

TEST_CASE("crossing detection rejects bad intervals and non-finite samples") {
  CHECK_THROWS_AS(detect_crossing([](double x) { return x; }, 1.0, -1.0),
                  DimensionError);
  CHECK_THROWS_AS(detect_crossing(
                      [](double x) {
                        return x > 0 ? std::numeric_limits<double>::quiet_NaN() : x;
                      },
                      -1.0, 1.0),
                  SolverError);
}

TEST_CASE("y = 0 is excluded from the sampled kernel directions") {
  LocalModel m = build_vortex_slice(2.0, 1.0);
  KernelData kd = vortex_kernel(m);
  ParameterChart chart;
  chart.lo = 0.0;
  chart.hi = 1.0;
  chart.rho = [](double) { return VectorXd(0); };
  chart.eta = [](double x) { return VectorXd::Constant(1, x); };
  BifurcationReport rep = lyapunov_schmidt(m, chart, kd, m.subgroups.at("e"),
                                           {0.0, 0.01});
  CHECK(rep.points[0].skipped);
  CHECK(rep.n_converged == 1);
}

#include "retool/bifurcation.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <algorithm>
#include <cmath>

namespace retool {

KernelData kernel_analysis(const LocalModel& m, const HessianPencil& p,
                           const VectorXd& eta, const SubgroupSpec& L) {
  KernelData kd;
  MatrixXd BL = fixed_N_basis(m, L);
  if (BL.cols() == 0) {
    kd.detail = "N^L trivial";
    return kd;
  }
  MatrixXd H = BL.transpose() * p.eval(eta) * BL;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(H);
  kd.restricted_eigenvalues = es.eigenvalues();
  // threshold against the affine family's scale: at a degeneracy the
  // restricted matrix itself can vanish to roundoff
  double family_scale = (BL.transpose() * p.H0 * BL).cwiseAbs().maxCoeff();
  for (int i = 0; i < p.eta_dim(); ++i)
    family_scale +=
        std::abs(eta(i)) * (BL.transpose() * p.Q[i] * BL).cwiseAbs().maxCoeff();
  const double thresh = 1e-7 * std::max(family_scale, 1e-300);

  std::vector<int> zero_idx, nz_idx;
  for (int i = 0; i < es.eigenvalues().size(); ++i) {
    if (std::abs(es.eigenvalues()(i)) < thresh)
      zero_idx.push_back(i);
    else
      nz_idx.push_back(i);
  }
  if (family_scale == 0.0) {  // the whole restricted family vanishes
    zero_idx.clear();
    nz_idx.clear();
    for (int i = 0; i < es.eigenvalues().size(); ++i) zero_idx.push_back(i);
  }
  kd.degenerate = !zero_idx.empty();
  kd.kernel = MatrixXd(m.N_dim, zero_idx.size());
  for (size_t i = 0; i < zero_idx.size(); ++i)
    kd.kernel.col(i) = BL * es.eigenvectors().col(zero_idx[i]);
  kd.complement = MatrixXd(m.N_dim, nz_idx.size());
  for (size_t i = 0; i < nz_idx.size(); ++i)
    kd.complement.col(i) = BL * es.eigenvectors().col(nz_idx[i]);
  if (!kd.degenerate) {
    kd.detail = "empty kernel: restricted pencil non-degenerate";
    return kd;
  }

  // structural cohomogeneity-one check against the G_z generators that
  // preserve the kernel
  const int kdim = static_cast<int>(kd.kernel.cols());
  MatrixXd P = kd.kernel * kd.kernel.transpose();
  bool trivial_action = true;
  bool has_rotation = false;
  for (const auto& A : m.rep.infinitesimal) {
    if (A.size() == 0) continue;
    MatrixXd img = A * kd.kernel;
    kd.kernel_invariance_defect =
        std::max(kd.kernel_invariance_defect, (img - P * img).cwiseAbs().maxCoeff());
    MatrixXd R = kd.kernel.transpose() * A * kd.kernel;
    if (R.cwiseAbs().maxCoeff() > 1e-9) trivial_action = false;
    if (kdim == 2) {
      const double skew_defect = (R + R.transpose()).cwiseAbs().maxCoeff();
      if (skew_defect <= 1e-9 * std::max(1.0, R.cwiseAbs().maxCoeff()) &&
          std::abs(R(0, 1)) > 1e-9)
        has_rotation = true;
    }
  }
  for (const auto& Rf : m.rep.finite) {
    if (Rf.size() == 0) continue;
    MatrixXd img = Rf * kd.kernel;
    kd.kernel_invariance_defect =
        std::max(kd.kernel_invariance_defect, (img - P * img).cwiseAbs().maxCoeff());
    if ((kd.kernel.transpose() * Rf * kd.kernel - MatrixXd::Identity(kdim, kdim))
            .cwiseAbs()
            .maxCoeff() > 1e-9)
      trivial_action = false;
  }
  if (kdim == 1) {
    kd.cohomogeneity_one = trivial_action;
    kd.detail = trivial_action ? "1-dimensional kernel, trivial action"
                               : "1-dimensional kernel with non-trivial action";
  } else if (kdim == 2) {
    kd.cohomogeneity_one = has_rotation;
    kd.detail = has_rotation ? "2-dimensional kernel with the standard circle action"
                             : "2-dimensional kernel without a circle action";
  } else {
    kd.cohomogeneity_one = false;
    kd.detail = "kernel dimension > 2: outside the structural check";
  }
  return kd;
}

CrossingResult detect_crossing(const std::function<double(double)>& sigma, double a,
                               double b, int samples, double xtol) {
  if (!(b > a)) throw DimensionError("detect_crossing: empty interval");
  CrossingResult res;
  // exact grid zeros count as crossings only when the flanking signs differ;
  // tangential zeros (same sign on both sides) are discarded
  double last_nz_x = 0.0, last_nz_s = 0.0;
  bool have_nz = false;
  std::vector<double> pending_zeros;
  for (int i = 0; i < samples; ++i) {
    const double x = a + (b - a) * i / (samples - 1);
    const double s = sigma(x);
    if (!std::isfinite(s)) throw SolverError("detect_crossing: non-finite sample");
    if (s == 0.0) {
      pending_zeros.push_back(x);
      continue;
    }
    if (have_nz && last_nz_s * s < 0.0) {
      if (!pending_zeros.empty())
        res.crossings.push_back(pending_zeros.front());
      else
        res.crossings.push_back(bisect_sign_change(sigma, last_nz_x, x, xtol));
    }
    pending_zeros.clear();
    last_nz_x = x;
    last_nz_s = s;
    have_nz = true;
  }
  return res;
}

BifurcationReport lyapunov_schmidt(const LocalModel& m, const ParameterChart& chart,
                                   const KernelData& kernel, const SubgroupSpec& L,
                                   const std::vector<double>& y_norms,
                                   const LyapunovSchmidtOptions& opts) {
  BifurcationReport rep;
  rep.kernel = kernel;
  if (!kernel.degenerate)
    throw HypothesisError("degeneracy", "lyapunov_schmidt: empty kernel");
  if (!kernel.cohomogeneity_one)
    throw HypothesisError("cohomogeneity-one",
                          "lyapunov_schmidt: kernel representation is not of "
                          "cohomogeneity one: " + kernel.detail);
  rep.hypothesis_checks.push_back({"cohomogeneity-one", true, kernel.detail});

  const VectorXd yhat = kernel.kernel.col(0);
  const MatrixXd& BS = kernel.complement;
  double min_inner_eig = std::numeric_limits<double>::infinity();

  // inner Newton solve for the complement variables at fixed (lambda, y)
  auto solve_s = [&](double lambda, const VectorXd& y, VectorXd& s_out) -> bool {
    VectorXd rho = chart.rho(lambda);
    VectorXd eta = chart.eta(lambda);
    VectorXd s = s_out.size() == BS.cols() ? s_out : VectorXd::Zero(BS.cols());
    for (int it = 0; it < opts.max_inner_iterations; ++it) {
      if (BS.cols() == 0) break;
      VectorXd v = y + BS * s;
      HbarDerivs d = hbar_eta_derivs(m, eta, rho, v);
      VectorXd g = BS.transpose() * d.d_N;
      MatrixXd H = BS.transpose() * d.d2_N * BS;
      Eigen::SelfAdjointEigenSolver<MatrixXd> es(H, Eigen::EigenvaluesOnly);
      const double mae = es.eigenvalues().cwiseAbs().minCoeff();
      const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
      min_inner_eig = std::min(min_inner_eig, mae);
      if (mae <= opts.inner_nondegeneracy_floor * scale) return false;
      if (g.norm() < 1e-12) break;
      s -= H.ldlt().solve(g);
    }
    s_out = s;
    return true;
  };

  auto reduced = [&](double lambda, const VectorXd& y, VectorXd& s_io,
                     bool& ok) -> double {
    ok = solve_s(lambda, y, s_io);
    if (!ok) return std::numeric_limits<double>::quiet_NaN();
    VectorXd v = y + (BS.cols() > 0 ? VectorXd(BS * s_io) : VectorXd::Zero(m.N_dim));
    HbarDerivs d = hbar_eta_derivs(m, chart.eta(lambda), chart.rho(lambda), v);
    return d.d_N.dot(yhat);
  };

  for (double r : y_norms) {
    BifurcationPoint bp;
    bp.y_norm = r;
    if (r <= 0.0) {
      bp.skipped = true;
      bp.reason = "y = 0 excluded (trivial branch)";
      rep.points.push_back(bp);
      continue;
    }
    VectorXd y = r * yhat;
    VectorXd s = VectorXd::Zero(BS.cols());

    // sample the reduced derivative over the window, bracket a sign change
    bool ok = true;
    double prev_x = chart.lo;
    VectorXd s_prev = s;
    double prev_g = reduced(prev_x, y, s_prev, ok);
    double root = std::numeric_limits<double>::quiet_NaN();
    bool found = false;
    if (ok) {
      for (int i = 1; i < opts.samples && !found; ++i) {
        const double x = chart.lo + (chart.hi - chart.lo) * i / (opts.samples - 1);
        VectorXd s_loc = s_prev;
        bool ok2 = true;
        const double g = reduced(x, y, s_loc, ok2);
        if (!ok2) {
          ok = false;
          break;
        }
        if (g == 0.0) {
          root = x;
          found = true;
          s_prev = s_loc;
          break;
        }
        if (prev_g * g < 0.0) {
          VectorXd s_b = s_prev;
          root = bisect_sign_change(
              [&](double xx) {
                bool okb = true;
                return reduced(xx, y, s_b, okb);
              },
              prev_x, x, opts.param_tol);
          found = true;
        }
        prev_x = x;
        prev_g = g;
        s_prev = s_loc;
      }
    }
    if (!ok) {
      bp.skipped = true;
      bp.reason = "inner Hessian lost non-degeneracy on the complement";
      rep.points.push_back(bp);
      continue;
    }
    if (!found) {
      bp.skipped = true;
      bp.reason = "no sign change of the reduced derivative in the window";
      rep.points.push_back(bp);
      continue;
    }

    VectorXd s_fin = s_prev;
    bool okf = true;
    solve_s(root, y, s_fin);
    VectorXd v = y + (BS.cols() > 0 ? VectorXd(BS * s_fin) : VectorXd::Zero(m.N_dim));
    (void)okf;
    bp.lambda = root;
    REResidual rr = re_residual(m, chart.rho(root), chart.eta(root), v);
    bp.point.rho = chart.rho(root);
    bp.point.eta = chart.eta(root);
    bp.point.v = v;
    bp.point.r1_norm = rr.r1.size() > 0 ? rr.r1.norm() : 0.0;
    bp.point.r2_norm = rr.r2.size() > 0 ? rr.r2.norm() : 0.0;
    bp.point.xi = velocity_of(m, bp.point.rho, v, bp.point.eta);
    bp.point.converged =
        bp.point.r1_norm < opts.residual_tol && bp.point.r2_norm < opts.residual_tol;
    bp.inner_hessian_min_abs_eig = min_inner_eig;

    // stabilizer diagnostics
    bp.L_fixes_point = true;
    for (const auto& A : L.on_N.infinitesimal)
      if (A.size() > 0 && (A * v).norm() > 1e-9) bp.L_fixes_point = false;
    for (const auto& R : L.on_N.finite)
      if (R.size() > 0 && (R * v - v).norm() > 1e-9) bp.L_fixes_point = false;
    bool any_gz_fixes = false;
    for (const auto& A : m.rep.infinitesimal)
      if (A.size() > 0 && (A * v).norm() <= 1e-9) any_gz_fixes = true;
    bp.trivial_isotropy = !any_gz_fixes && v.norm() > 1e-9;

    if (bp.point.converged) ++rep.n_converged;
    rep.points.push_back(bp);
  }
  return rep;
}

DegenerateShift find_degenerate_shift(const MatrixXd& M0, const MatrixXd& D) {
  if (M0.rows() != 2 || M0.cols() != 2 || D.rows() != 2 || D.cols() != 2)
    throw DimensionError("find_degenerate_shift: 2x2 blocks required");
  const double scaleM = std::max(M0.cwiseAbs().maxCoeff(), 1e-300);
  const double scaleD = D.cwiseAbs().maxCoeff();
  if (scaleD < 1e-14 * scaleM)
    throw HypothesisError("genericity", "find_degenerate_shift: zero direction");
  const double c = (M0.cwiseProduct(D)).sum() / std::max(D.squaredNorm(), 1e-300);
  if ((M0 - c * D).cwiseAbs().maxCoeff() < 1e-10 * scaleM)
    throw HypothesisError("genericity",
                          "find_degenerate_shift: direction proportional to the base "
                          "form (non-generic)");

  // det(M0 + tD) = det(M0) + t * mix + t^2 * det(D)
  const double a2 = D(0, 0) * D(1, 1) - D(0, 1) * D(1, 0);
  const double a1 = M0(0, 0) * D(1, 1) + M0(1, 1) * D(0, 0) - M0(0, 1) * D(1, 0) -
                    M0(1, 0) * D(0, 1);
  const double a0 = M0(0, 0) * M0(1, 1) - M0(0, 1) * M0(1, 0);

  DegenerateShift out;
  auto q = [&](double t) { return a0 + t * (a1 + t * a2); };
  auto dq = [&](double t) { return a1 + 2.0 * t * a2; };
  std::vector<double> roots;
  if (std::abs(a2) < 1e-14 * (std::abs(a1) + std::abs(a0))) {
    if (a1 == 0.0) throw HypothesisError("genericity",
                                         "find_degenerate_shift: determinant constant in t");
    roots.push_back(-a0 / a1);
  } else {
    const double disc = a1 * a1 - 4.0 * a2 * a0;
    if (disc < 0.0)
      throw HypothesisError("crossing",
                            "find_degenerate_shift: no real root of the determinant");
    const double sq = std::sqrt(disc);
    const double q1 = -0.5 * (a1 + (a1 >= 0 ? sq : -sq));
    double r1 = q1 / a2;
    double r2 = q1 != 0.0 ? a0 / q1 : -a1 / a2 - r1;
    roots = {r1, r2};
  }
  // Newton polish, safeguarded by the analytic bracket
  for (double& r : roots) {
    for (int it = 0; it < 8; ++it) {
      const double d = dq(r);
      if (d == 0.0) break;
      const double step = q(r) / d;
      if (!std::isfinite(step)) break;
      r -= step;
      if (std::abs(step) < 1e-15 * (1.0 + std::abs(r))) break;
    }
  }
  std::sort(roots.begin(), roots.end(),
            [](double x, double y) { return std::abs(x) < std::abs(y); });
  out.roots = roots;
  out.t_star = roots.front();
  out.matrix = M0 + out.t_star * D;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (out.matrix + out.matrix.transpose()),
                                             Eigen::EigenvaluesOnly);
  out.zero_eigenvalue = std::abs(es.eigenvalues()(0)) < std::abs(es.eigenvalues()(1))
                            ? es.eigenvalues()(0)
                            : es.eigenvalues()(1);
  return out;
}

GenericCrossing generic_crossing_search(const HessianPencil& p, const MatrixXd& subspace,
                                        const VectorXd& eta_base,
                                        const VectorXd& eta_dir) {
  if (subspace.cols() != 2)
    throw DimensionError("generic_crossing_search: 2-dimensional restriction required");
  GenericCrossing gc;
  MatrixXd M0 = subspace.transpose() * p.eval(eta_base) * subspace;
  MatrixXd Qd = MatrixXd::Zero(2, 2);
  for (int i = 0; i < p.eta_dim(); ++i)
    Qd += eta_dir(i) * (subspace.transpose() * p.Q[i] * subspace);

  Eigen::SelfAdjointEigenSolver<MatrixXd> es0(M0, Eigen::EigenvaluesOnly);
  const bool definite = es0.eigenvalues()(0) * es0.eigenvalues()(1) > 0.0;
  gc.hypothesis_checks.push_back(
      {"definite-restriction", definite,
       definite ? "base restricted pencil definite"
                : "base restricted pencil not definite"});
  if (!definite)
    throw HypothesisError("definite-restriction",
                          "generic_crossing_search: base restriction is not definite");

  DegenerateShift sh = find_degenerate_shift(M0, -Qd);  // H(eta + t dir) = H - t Q(dir)
  gc.hypothesis_checks.push_back({"genericity", true, "direction not proportional"});

  const double scale = sh.matrix.cwiseAbs().maxCoeff();
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(sh.matrix, Eigen::EigenvaluesOnly);
  const int zero_count = (std::abs(es.eigenvalues()(0)) < 1e-7 * scale ? 1 : 0) +
                         (std::abs(es.eigenvalues()(1)) < 1e-7 * scale ? 1 : 0);
  if (scale <= 0.0 || zero_count != 1)
    throw HypothesisError("crossing",
                          "generic_crossing_search: shifted block is zero or has a "
                          "double kernel");
  gc.hypothesis_checks.push_back(
      {"rank-deficiency", true, "rank-deficient non-zero restriction located"});
  gc.t_star = sh.t_star;
  gc.restricted = sh.matrix;
  gc.eta_total = eta_base + sh.t_star * eta_dir;
  return gc;
}

}  // namespace retool

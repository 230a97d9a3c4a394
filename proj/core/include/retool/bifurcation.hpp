#ifndef RETOOL_BIFURCATION_HPP
#define RETOOL_BIFURCATION_HPP

#include <functional>

#include "retool/resolve.hpp"

namespace retool {

/// Kernel of the restricted Hessian pencil at a degenerate parameter, with
/// the structural cohomogeneity-one diagnosis.
struct KernelData {
  MatrixXd kernel;      // orthonormal basis of ker within N^L (ambient N coords)
  MatrixXd complement;  // orthonormal basis of S with N^L = ker + S
  bool degenerate = false;
  bool cohomogeneity_one = false;
  double kernel_invariance_defect = 0.0;
  VectorXd restricted_eigenvalues;  // spectrum of the pencil on N^L
  std::string detail;
};

/// Eigen-analysis of the pencil at isotropy parameter eta restricted to N^L.
/// Kernel threshold: |eigenvalue| < 1e-7 * ||H||.
KernelData kernel_analysis(const LocalModel& m, const HessianPencil& p,
                           const VectorXd& eta, const SubgroupSpec& L);

struct CrossingResult {
  std::vector<double> crossings;  // all bracketed sign changes, in order
  bool found() const { return !crossings.empty(); }
  double location() const { return crossings.front(); }
};

/// Samples sigma on [a, b] and bisects every sign change to parameter
/// tolerance xtol.  Tangential zeros (no sign change) report no crossing.
CrossingResult detect_crossing(const std::function<double(double)>& sigma, double a,
                               double b, int samples = 129, double xtol = 1e-10);

/// One-parameter chart lambda -> (rho, eta) along which the reduction runs.
struct ParameterChart {
  std::function<VectorXd(double)> rho;
  std::function<VectorXd(double)> eta;
  double lo = 0.0, hi = 0.0;  // window W
};

struct BifurcationPoint {
  double y_norm = 0.0;
  double lambda = 0.0;  // located parameter value
  REPoint point;
  bool skipped = false;
  bool trivial_isotropy = false;
  bool L_fixes_point = false;
  double inner_hessian_min_abs_eig = 0.0;
  std::string reason;
};

struct BifurcationReport {
  double crossing_param = 0.0;
  KernelData kernel;
  std::vector<BifurcationPoint> points;
  std::vector<HypothesisCheck> hypothesis_checks;
  int n_converged = 0;
};

struct LyapunovSchmidtOptions {
  double residual_tol = 1e-8;
  double param_tol = 1e-12;
  int samples = 65;
  int max_inner_iterations = 50;
  double inner_nondegeneracy_floor = 1e-6;
};

/// Numerical Lyapunov-Schmidt reduction: for each kernel magnitude in
/// y_norms (sampled along the first kernel direction; circle equivariance
/// makes the half-axis sufficient), solves the complement variables by
/// Newton, then locates the root of the reduced derivative along the chart
/// by bisection and assembles the bifurcating relative equilibrium.
BifurcationReport lyapunov_schmidt(const LocalModel& m, const ParameterChart& chart,
                                   const KernelData& kernel, const SubgroupSpec& L,
                                   const std::vector<double>& y_norms,
                                   const LyapunovSchmidtOptions& opts = {});

struct DegenerateShift {
  double t_star = 0.0;           // root of det(M0 + t D) nearest zero
  std::vector<double> roots;     // all real roots
  MatrixXd matrix;               // M0 + t_star * D
  double zero_eigenvalue = 0.0;  // the eigenvalue closest to zero at t_star
};

/// Roots of det(M0 + t D) = 0 for symmetric 2x2 blocks (quadratic in t,
/// polished by safeguarded Newton).  Throws HypothesisError when D is
/// proportional to M0 (non-generic) or no real root exists.
DegenerateShift find_degenerate_shift(const MatrixXd& M0, const MatrixXd& D);

struct GenericCrossing {
  double t_star = 0.0;
  MatrixXd restricted;  // 2x2 pencil value at eta_base + t_star * eta_dir
  VectorXd eta_total;   // eta_base + t_star * eta_dir
  std::vector<HypothesisCheck> hypothesis_checks;
};

/// Finds t with H(eta_base + t eta_dir)|_subspace degenerate but nonzero
/// (one zero eigenvalue); the entry point of the bifurcation pipeline for
/// branches of formally stable points with a 2-dimensional restriction.
GenericCrossing generic_crossing_search(const HessianPencil& p, const MatrixXd& subspace,
                                        const VectorXd& eta_base,
                                        const VectorXd& eta_dir);

}  // namespace retool

#endif

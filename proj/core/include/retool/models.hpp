#ifndef RETOOL_MODELS_HPP
#define RETOOL_MODELS_HPP

#include <functional>

#include "retool/model.hpp"

namespace retool {

// ---------------------------------------------------------------------------
// Sleeping Lagrange top

struct TopParams {
  double m = 1.0;       // mass
  double g = 1.0;       // gravity
  double l = 1.0;       // pendulum length
  double I1 = 1.0;      // transverse moment of inertia
  double I3 = 0.5;      // axial moment of inertia
  double lambda = 5.0;  // spin rate
  double quartic = 1.0; // invariant quartic coefficient of the slice model

  void validate() const;
};

struct TopHessian {
  MatrixXd M;  // 4x4 slice Hessian
  double A, B, C;
};

/// Slice Hessian of the augmented Hamiltonian for the sleeping top at spin
/// rate p.lambda and isotropy parameter eta.
TopHessian lagrange_top_hessian(const TopParams& p, double eta);

/// Q = -dM/deta of the family above (independent of eta).
MatrixXd lagrange_top_Q(const TopParams& p);

/// Closed-form eigenvalues sigma_-/sigma_+ of the 4x4 family (each twice).
std::pair<double, double> lagrange_top_sigma(double A, double B, double C);

struct FastTopThreshold {
  double lambda_sq;  // stability boundary lambda*^2 = 4 g l m I1 / I3^2
  double k_opt;      // optimal ratio eta/lambda = (I3 - I1) / (2 I1)
};

FastTopThreshold fast_top_threshold(const TopParams& p);

/// Determinant family AC - B^2 transported along the sleeping branch,
/// evaluated at branch offset rho and isotropy parameter eta (the base spin
/// rate is p.lambda).  Vanishing of this quadratic locates the eigenvalue
/// crossing used by the bifurcation analysis.
double sleeping_branch_det(const TopParams& p, double eta, double rho);

/// Local model of the sleeping top at spin rate p.lambda: T^2 symmetry,
/// dim m* = 1, N = R^4 with the standard diagonal circle action.  The
/// rho-dependence of the slice Hessian follows the transported family of
/// sleeping_branch_det; quartic term (p.quartic/4)*||v||^4.
LocalModel make_lagrange_top(const TopParams& p);

// ---------------------------------------------------------------------------
// toy model: SO(3) with S^1 isotropy on the slice R^4

/// f(rho) is a polynomial in ||rho||^2: f = sum_k radial_coeffs[k] * ||rho||^(2k+2).
LocalModel make_toy_so3_s1(const std::vector<double>& radial_coeffs = {});

// ---------------------------------------------------------------------------
// Two point vortices on the sphere

struct VortexParams {
  double Gamma1 = 2.0;
  double Gamma2 = 1.0;
  double theta = M_PI / 2;  // angular separation for non-antipodal configurations

  void validate() const;
};

/// Slice model at the antipodal pair (e3, -e3).  For Gamma1 != Gamma2 the
/// slice is 2-dimensional; for Gamma1 == Gamma2 the slice is trivial and the
/// model carries the 2-dimensional m* instead.
LocalModel build_vortex_slice(double Gamma1, double Gamma2);

/// Configuration of the two vortices reconstructed from slice coordinates
/// (Gamma1 != Gamma2 case).
struct VortexConfiguration {
  Vector3d x1, x2;
  double theta() const { return std::acos(std::clamp(x1.dot(x2), -1.0, 1.0)); }
  Vector3d momentum(double Gamma1, double Gamma2) const {
    return Gamma1 * x1 + Gamma2 * x2;
  }
};

VortexConfiguration vortex_reconstruct(const LocalModel& m, const VectorXd& v);

/// Angular velocity xi = mu / (2 sin^2(theta/2)) of the configured pair;
/// theta == pi is handled through the limit xi -> mu/2.
Vector3d vortex_velocity(const VortexParams& p);

/// Right-hand side of the two-vortex equations of motion on S^2 x S^2.
void vortex_eom(double Gamma1, double Gamma2, const Vector3d& x1, const Vector3d& x2,
                Vector3d& x1dot, Vector3d& x2dot);

/// RK4 integration of the full-space vortex equations (rigid-rotation checks).
void vortex_integrate(double Gamma1, double Gamma2, Vector3d& x1, Vector3d& x2,
                      double t_end, double dt);

}  // namespace retool

#endif

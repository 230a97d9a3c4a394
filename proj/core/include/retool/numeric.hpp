#ifndef RETOOL_NUMERIC_HPP
#define RETOOL_NUMERIC_HPP

#include <Eigen/Dense>
#include <functional>
#include <stdexcept>
#include <string>

namespace retool {

using Eigen::MatrixXd;
using Eigen::Vector3d;
using Eigen::VectorXd;

/// Thrown when an input has the wrong dimensions or violates a structural
/// precondition (non-symmetric matrix, basis not contained in a subspace, ...).
struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Thrown when a Newton/continuation Jacobian is singular at the requested
/// point.  Signals the degenerate regime handled by the bifurcation tools.
struct SingularJacobianError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Thrown when a checked structural hypothesis fails; `hypothesis` names it
/// ("co-central", "cohomogeneity-one", "crossing", ...).
struct HypothesisError : std::runtime_error {
  std::string hypothesis;
  HypothesisError(std::string hyp, const std::string& what)
      : std::runtime_error(what), hypothesis(std::move(hyp)) {}
};

struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Orthonormal basis of the null space of M, singular values below
/// rtol * sigma_max treated as zero.  Columns of the result span ker M.
MatrixXd nullspace(const MatrixXd& M, double rtol = 1e-10);

/// Euclidean-orthonormalized copy of the columns of B (rank-revealing QR).
MatrixXd orthonormalize(const MatrixXd& B, double rtol = 1e-12);

/// Orthonormalize columns of B with respect to the inner product G (SPD).
MatrixXd orthonormalize_wrt(const MatrixXd& B, const MatrixXd& G, double rtol = 1e-12);

/// Max-norm symmetry defect ||M - M^T||_inf.
double symmetry_defect(const MatrixXd& M);

/// Central finite-difference gradient, step h_i = scale * (1 + |x_i|).
VectorXd fd_gradient(const std::function<double(const VectorXd&)>& f, const VectorXd& x,
                     double scale);

/// Central finite-difference Hessian (symmetrized).
MatrixXd fd_hessian(const std::function<double(const VectorXd&)>& f, const VectorXd& x,
                    double scale);

/// Golden-section maximization of a unimodal (concave) function on [a, b].
/// Returns the located maximizer; writes the value through fmax if non-null.
double golden_max(const std::function<double(double)>& f, double a, double b,
                  double xtol, double* fmax = nullptr, int* iterations = nullptr);

/// Bisection for a sign change of f on the bracket [a, b] (f(a)*f(b) < 0).
double bisect_sign_change(const std::function<double(double)>& f, double a, double b,
                          double xtol);

/// Rodrigues rotation exp(hat(w)) for w in R^3.
Eigen::Matrix3d so3_exp(const Vector3d& w);

/// hat: R^3 -> so(3), hat(w) * x = w x x.
Eigen::Matrix3d so3_hat(const Vector3d& w);

}  // namespace retool

#endif

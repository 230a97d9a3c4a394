#ifndef RETOOL_PENCIL_HPP
#define RETOOL_PENCIL_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "retool/numeric.hpp"

namespace retool {

/// Affine family of symmetric forms H(eta) = H0 - sum_i eta_i Q_i on the
/// symplectic slice, optionally restricted to an orthonormal subspace basis.
struct HessianPencil {
  MatrixXd H0;
  std::vector<MatrixXd> Q;
  std::optional<MatrixXd> subspace;  // columns orthonormal

  int eta_dim() const { return static_cast<int>(Q.size()); }
  int ambient_dim() const { return static_cast<int>(H0.rows()); }
  int dim() const {
    return subspace ? static_cast<int>(subspace->cols()) : ambient_dim();
  }

  /// H(eta), restricted to the subspace when one is set.
  MatrixXd eval(const VectorXd& eta) const;
  /// Same pencil restricted to an (orthonormal) basis B.
  HessianPencil restricted(const MatrixXd& B) const;
  /// Symmetry defect of H0 and all Q_i.
  double symmetry_residual() const;
  void validate(double tol = 1e-12) const;
};

struct EigResult {
  VectorXd values;   // ascending
  MatrixXd vectors;  // orthonormal columns
};

/// Eigen-decomposition of a symmetric form, optionally pulled back to an
/// orthonormal subspace basis (B^T M B).  Throws on non-symmetric input.
EigResult eig_sym(const MatrixXd& M, const std::optional<MatrixXd>& subspace = std::nullopt);

enum class Definiteness { PositiveDefinite, NegativeDefinite, Indefinite, Inconclusive };

std::string to_string(Definiteness d);

/// Box of admissible eta values, one interval per coordinate.
struct EtaBox {
  VectorXd lo, hi;
  static EtaBox cube(int k, double halfwidth);
  static EtaBox point(const VectorXd& eta);
};

/// Outcome of the definiteness search over the pencil.
///
/// PositiveDefinite / NegativeDefinite: margin is the optimal lambda_min
/// (resp. lambda_max) at eta_star, recomputed by a direct eigensolve.
/// Indefinite: certified indefinite for every eta in the box.
/// Inconclusive: the relevant optimum lies within tolerance of zero.
struct StabilityCertificate {
  Definiteness verdict = Definiteness::Inconclusive;
  VectorXd eta_star;
  double margin = 0.0;
  int iterations = 0;
  double lambda_min_opt = 0.0;   // max over box of lambda_min(H(eta))
  double lambda_max_opt = 0.0;   // min over box of lambda_max(H(eta))
  VectorXd eta_star_pos, eta_star_neg;
  bool at_box_boundary = false;
  double tolerance = 0.0;
  int subspace_dim = 0;
};

/// Optimizes definiteness of the pencil over the box.  lambda_min(H(eta)) is
/// concave in eta, so golden-section (1-D) or coordinate ascent with random
/// restarts (multi-D, seeded) reaches the global optimum.
StabilityCertificate certify_definite(const HessianPencil& p, const EtaBox& box,
                                      std::uint64_t seed = 12345);

struct ProfileRow {
  VectorXd eta;
  double lambda_min;
  double lambda_max;
};

/// Table of extreme eigenvalues of H(eta) over a grid (rows in grid order).
std::vector<ProfileRow> lambda_min_profile(const HessianPencil& p,
                                           const std::vector<VectorXd>& grid);

}  // namespace retool

#endif

#ifndef RETOOL_LIE_HPP
#define RETOOL_LIE_HPP

#include <optional>
#include <string>
#include <vector>

#include "retool/numeric.hpp"

namespace retool {

/// Which matrix group realizes the algebra (for exponentials and Ad*).
enum class GroupKind { SO3, Torus, None };

/// Finite-dimensional Lie algebra given by structure constants
/// [e_i, e_j] = sum_k c[i][j][k] e_k, together with an invariant inner
/// product.  Dual vectors are carried in coordinates of the dual basis, so
/// the pairing <mu, xi> is the plain dot product.
class LieAlgebra {
 public:
  LieAlgebra() = default;
  /// c[i][j][k] indexed as c[i](j,k) -> coefficient of e_k in [e_i, e_j].
  LieAlgebra(std::vector<MatrixXd> structure, MatrixXd inner_product,
             std::vector<std::string> labels, GroupKind realization);

  int dim() const { return dim_; }
  const MatrixXd& inner_product() const { return ip_; }
  const std::vector<std::string>& labels() const { return labels_; }
  GroupKind realization() const { return realization_; }

  /// Matrix of ad(e_i); column j holds the coordinates of [e_i, e_j].
  const MatrixXd& ad_basis(int i) const { return ad_[i]; }
  /// Matrix of ad(xi).
  MatrixXd ad(const VectorXd& xi) const;

  /// Structure constant c[i][j][k].
  double c(int i, int j, int k) const { return ad_[i](k, j); }

  /// Residual of antisymmetry over all basis pairs (max norm).
  double antisymmetry_residual() const;
  /// Residual of the Jacobi identity over all basis triples (max norm).
  double jacobi_residual() const;

  static LieAlgebra so3();
  static LieAlgebra torus(int n);
  /// R^n with the zero bracket ("abelian:<n>").
  static LieAlgebra abelian(int n);

 private:
  int dim_ = 0;
  std::vector<MatrixXd> ad_;
  MatrixXd ip_;
  std::vector<std::string> labels_;
  GroupKind realization_ = GroupKind::None;
};

/// [xi, eta] in algebra coordinates.
VectorXd lie_bracket(const LieAlgebra& alg, const VectorXd& xi, const VectorXd& eta);

/// Coadjoint operator with the convention <ad*_xi mu, eta> = <mu, [xi, eta]>.
VectorXd coad(const LieAlgebra& alg, const VectorXd& xi, const VectorXd& mu);

/// Linear group representation on R^n: infinitesimal generators (one per
/// continuous-subgroup basis element) and finite generators (orthogonal
/// matrices for discrete parts).
struct GroupRep {
  int n = 0;
  std::vector<MatrixXd> infinitesimal;
  std::vector<MatrixXd> finite;

  bool empty() const { return infinitesimal.empty() && finite.empty(); }
  /// Max orthogonality defect of the finite generators.
  double finite_orthogonality_defect() const;
};

/// Orthonormal basis of the joint fixed space: intersection of ker(A) over
/// infinitesimal generators and ker(R - I) over finite generators.
MatrixXd fixed_subspace(const GroupRep& rep, double rtol = 1e-10);

/// Invariant splitting g = g_z + m + q with g_mu = g_z + m.  Bases are kept
/// exactly as supplied; complements are orthogonal with respect to the
/// algebra's inner product.  Dual coordinates use the bi-orthogonal dual
/// bases, so embed/extract are exact.
class Splitting {
 public:
  Splitting() = default;

  /// Build from bases of g_z and g_mu (and optionally q); missing complements
  /// are inner-product orthogonal complements.
  static Splitting make(const LieAlgebra& alg, const MatrixXd& basis_gz,
                        const MatrixXd& basis_gmu,
                        const std::optional<MatrixXd>& basis_m = std::nullopt,
                        const std::optional<MatrixXd>& basis_q = std::nullopt);

  int dim() const { return n_; }
  int dim_gz() const { return static_cast<int>(B_gz_.cols()); }
  int dim_m() const { return static_cast<int>(B_m_.cols()); }
  int dim_q() const { return static_cast<int>(B_q_.cols()); }

  const MatrixXd& basis_gz() const { return B_gz_; }
  const MatrixXd& basis_m() const { return B_m_; }
  const MatrixXd& basis_q() const { return B_q_; }

  /// Projections onto the three factors (algebra side), summing to I.
  VectorXd proj_gz(const VectorXd& xi) const { return B_gz_ * gz_coords(xi); }
  VectorXd proj_m(const VectorXd& xi) const { return B_m_ * m_coords(xi); }
  VectorXd proj_q(const VectorXd& xi) const { return B_q_ * q_coords(xi); }

  /// Factor coordinates of an algebra vector.
  VectorXd gz_coords(const VectorXd& xi) const { return R_gz_ * xi; }
  VectorXd m_coords(const VectorXd& xi) const { return R_m_ * xi; }
  VectorXd q_coords(const VectorXd& xi) const { return R_q_ * xi; }

  /// Dual-side extraction: coordinates of Proj_{f*} mu in the factor's dual
  /// basis (annihilator identification).
  VectorXd mstar_coords(const VectorXd& mu) const { return B_m_.transpose() * mu; }
  VectorXd gzstar_coords(const VectorXd& mu) const { return B_gz_.transpose() * mu; }

  /// Dual-side embeddings m* -> g*, g_z* -> g* (annihilating the other factors).
  VectorXd embed_mstar(const VectorXd& alpha) const { return D_m_ * alpha; }
  VectorXd embed_gzstar(const VectorXd& alpha) const { return D_gz_ * alpha; }

  /// Assemble an algebra vector from m-coords and g_z-coords (velocity embed).
  VectorXd embed_velocity(const VectorXd& m_part, const VectorXd& gz_part) const {
    return B_m_ * m_part + B_gz_ * gz_part;
  }

  /// Max defect of factor invariance under the given generators acting on g
  /// (infinitesimal: A f subset f; finite: R f = f).
  double invariance_defect(const GroupRep& rep_on_g) const;

 private:
  int n_ = 0;
  MatrixXd B_gz_, B_m_, B_q_;   // bases (columns)
  MatrixXd R_gz_, R_m_, R_q_;   // coordinate extraction rows (from B^-1)
  MatrixXd D_gz_, D_m_, D_q_;   // dual bases (columns of B^-T)
};

/// Result of the co-centrality test: on failure, (witness_a, witness_b) is a
/// pair with [witness_a, witness_b] != 0, witness_a in the complement m.
struct CocentralResult {
  bool cocentral = false;
  double max_bracket_norm = 0.0;
  VectorXd witness_a, witness_b, witness_bracket;
};

/// Tests whether `sub` is a co-central subalgebra of `ambient`: the
/// inner-product complement m of sub in ambient must satisfy [m, ambient]=0.
/// Independent of the complement chosen (any invariant one works).
CocentralResult check_cocentral(const LieAlgebra& alg, const MatrixXd& sub,
                                const MatrixXd& ambient, double tol = 1e-12);

/// Basis of h + m^H where m is the inner-product complement of h in g and
/// m^H the fixed space of the (Ad) representation of H restricted to m.
MatrixXd normalizer_algebra(const LieAlgebra& alg, const GroupRep& rep_on_g,
                            const MatrixXd& basis_h);

}  // namespace retool

#endif

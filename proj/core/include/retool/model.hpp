#ifndef RETOOL_MODEL_HPP
#define RETOOL_MODEL_HPP

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "retool/lie.hpp"
#include "retool/pencil.hpp"

namespace retool {

/// Invariant Hamiltonian h-bar(rho, v) on m* x N.  Analytic derivatives are
/// optional; callers fall back to central finite differences.
class SliceHamiltonian {
 public:
  virtual ~SliceHamiltonian() = default;
  virtual double value(const VectorXd& rho, const VectorXd& v) const = 0;
  /// Analytic gradient; return false when not available.
  virtual bool gradient(const VectorXd& rho, const VectorXd& v, VectorXd& d_rho,
                        VectorXd& d_v) const {
    (void)rho; (void)v; (void)d_rho; (void)d_v;
    return false;
  }
  /// Analytic Hessian in the N variables; return false when not available.
  virtual bool hessian_v(const VectorXd& rho, const VectorXd& v, MatrixXd& H) const {
    (void)rho; (void)v; (void)H;
    return false;
  }
  virtual std::string describe() const { return "custom"; }
};

/// Polynomial Hamiltonian: sum of monomials c * rho^a * v^b.
class PolynomialHamiltonian : public SliceHamiltonian {
 public:
  struct Monomial {
    double coeff;
    std::vector<int> powers;  // dim_mstar + N_dim exponents
  };
  PolynomialHamiltonian(int dim_rho, int dim_v, std::vector<Monomial> terms);

  double value(const VectorXd& rho, const VectorXd& v) const override;
  bool gradient(const VectorXd& rho, const VectorXd& v, VectorXd& d_rho,
                VectorXd& d_v) const override;
  bool hessian_v(const VectorXd& rho, const VectorXd& v, MatrixXd& H) const override;
  std::string describe() const override { return "poly"; }
  const std::vector<Monomial>& terms() const { return terms_; }
  int dim_rho() const { return dim_rho_; }
  int dim_v() const { return dim_v_; }

 private:
  int dim_rho_, dim_v_;
  std::vector<Monomial> terms_;
};

/// Subgroup K <= G_z described by its generators acting on the slice N, on
/// m*, and on g (via Ad).  Continuous generators are spanned by coefficient
/// vectors in the g_z basis; action matrices are stored explicitly.
struct SubgroupSpec {
  std::string name = "e";
  GroupRep on_N;      // action on the slice
  GroupRep on_mstar;  // dual action on m* (empty = trivial)
  GroupRep on_g;      // Ad action on g (empty = trivial)
  bool is_full_gz = false;

  static SubgroupSpec trivial(int n_dim, int mstar_dim, int g_dim);
};

/// Local (MGS slice) model of the G-Hamiltonian system around a point with
/// momentum mu: algebra + splitting, symplectic slice (N, Omega) with the
/// linear G_z action, and the invariant Hamiltonian.
struct LocalModel {
  LieAlgebra alg;
  Splitting split;
  VectorXd mu;           // in g* coordinates
  int dim_mstar = 0;
  int N_dim = 0;
  MatrixXd Omega;        // antisymmetric, nondegenerate on N
  GroupRep rep;          // G_z on N (one infinitesimal generator per g_z basis vector)
  GroupRep rep_mstar;    // G_z on m* (empty = trivial)
  GroupRep rep_g;        // G_z on g via Ad (empty = trivial)
  std::shared_ptr<const SliceHamiltonian> hbar;
  std::map<std::string, SubgroupSpec> subgroups;
  std::string name = "custom";
  std::map<std::string, double> params;

  // derived, filled by finalize(): S_i = D^2 J_N^{e_i}, Omega^sharp
  std::vector<MatrixXd> JN_hess;
  MatrixXd Omega_sharp;

  int gz_dim() const { return split.dim_gz(); }

  /// Validates invariants (Omega antisymmetric and nondegenerate, generators
  /// symplectic, splitting consistent) and precomputes J_N data.
  void finalize();

  /// Invariance defect of h-bar under the G_z generators, sampled at random
  /// points (seeded).  Part of model validation.
  double hbar_invariance_defect(int samples = 20, std::uint64_t seed = 7) const;
};

/// J_N(v) in g_z* coordinates: component i equals 1/2 v^T S_i v.
VectorXd momentum_map_N(const LocalModel& m, const VectorXd& v);

/// Tangent map T_v J_N applied to w: component i equals v^T S_i w.
VectorXd momentum_map_N_tangent(const LocalModel& m, const VectorXd& v, const VectorXd& w);

/// Group element in the matrix realization used by J_Y and the bundle flow.
struct GroupElement {
  GroupKind kind = GroupKind::None;
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();  // SO3
  VectorXd angles;                                         // torus

  static GroupElement identity(const LieAlgebra& alg);
  /// g * exp(xi) with xi in algebra coordinates (exact exponential).
  GroupElement translated(const LieAlgebra& alg, const VectorXd& xi) const;
  /// Ad*_{g^-1} mu in dual coordinates.
  VectorXd coadjoint(const VectorXd& mu) const;
  /// Distance from the group manifold (orthogonality defect for SO3).
  double manifold_defect() const;
};

/// Momentum normal form J_Y([g, rho, v]) = Ad*_{g^-1}(mu + rho + J_N(v)).
VectorXd momentum_map_Y(const LocalModel& m, const GroupElement& g, const VectorXd& rho,
                        const VectorXd& v);

/// Value and derivatives of the augmented Hamiltonian
/// h-bar_eta = h-bar - J_N^eta at (rho, v).
struct HbarDerivs {
  double value;
  VectorXd d_rho;  // in m-coordinates (gradient wrt rho)
  VectorXd d_N;    // gradient wrt v
  MatrixXd d2_N;   // symmetric Hessian wrt v
};

HbarDerivs hbar_eta_derivs(const LocalModel& m, const VectorXd& eta, const VectorXd& rho,
                           const VectorXd& v);

/// Tangent vector (lambda, rho-dot, v-dot) to the local model at [e, rho, v].
struct TangentY {
  VectorXd lambda;   // in g
  VectorXd rho_dot;  // m* coordinates
  VectorXd v_dot;    // N coordinates
};

/// Local symplectic form omega_Y evaluated at [e, rho, v] on two tangents.
double eval_omega_Y(const LocalModel& m, const VectorXd& rho, const VectorXd& v,
                    const TangentY& t1, const TangentY& t2);

/// Hessian pencil D^2_N hbar_eta(rho, 0) = H0(rho) - sum eta_i Q_i.
HessianPencil pencil_at(const LocalModel& m, const VectorXd& rho);

/// Candidate relative equilibrium in the local model.
struct REPoint {
  VectorXd rho;    // m* coordinates
  VectorXd v;      // N coordinates
  VectorXd eta;    // g_z coordinates
  VectorXd xi;     // derived velocity in g coordinates
  double r1_norm = 0.0;
  double r2_norm = 0.0;
  bool converged = false;
};

/// Velocity xi = D_{m*} h-bar(rho, v) + eta embedded in g.
VectorXd velocity_of(const LocalModel& m, const VectorXd& rho, const VectorXd& v,
                     const VectorXd& eta);

}  // namespace retool

#endif

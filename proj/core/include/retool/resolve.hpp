#ifndef RETOOL_RESOLVE_HPP
#define RETOOL_RESOLVE_HPP

#include "retool/model.hpp"

namespace retool {

/// Orthonormal basis of the fixed subspace N^K.
MatrixXd fixed_N_basis(const LocalModel& m, const SubgroupSpec& K);
/// Orthonormal basis of (m*)^K in m* coordinates.
MatrixXd fixed_mstar_basis(const LocalModel& m, const SubgroupSpec& K);
/// Basis of (g_z)^K in g_z coordinates (columns).
MatrixXd fixed_gz_basis(const LocalModel& m, const SubgroupSpec& K);

/// Residuals of the relative-equilibrium equations at (rho, eta, v):
///   r1 = Proj_{m*} ad*_{D_{m*} h-bar + eta} (rho + J_N(v)),
///   r2 = D_N h-bar_eta(rho, v).
struct REResidual {
  VectorXd r1;
  VectorXd r2;
};
REResidual re_residual(const LocalModel& m, const VectorXd& rho, const VectorXd& eta,
                       const VectorXd& v);

struct SolveOptions {
  double tol = 1e-10;
  int max_iterations = 50;
  double singular_rtol = 1e-12;
};

/// Newton iteration on v (restricted to N^K when K is given) with (rho, eta)
/// held as parameters.  Throws SingularJacobianError in the degenerate
/// regime.  A converged point must also satisfy r1 below tolerance; a
/// violation is reported as a co-centrality hypothesis failure.
REPoint solve_re(const LocalModel& m, const VectorXd& rho, const VectorXd& eta,
                 const VectorXd& v_guess, const SubgroupSpec* K = nullptr,
                 const SolveOptions& opts = {});

/// Tensor grid of offsets from the base point; rho axes first, then eta
/// axes, each strictly increasing and containing 0.
struct GridSpec {
  std::vector<std::vector<double>> rho_axes;  // offsets along (m*)^K basis vectors
  std::vector<std::vector<double>> eta_axes;  // offsets along (g_z)^K basis vectors
  void validate() const;
};

struct HypothesisCheck {
  std::string name;
  bool passed;
  std::string detail;
};

struct BranchNode {
  std::vector<double> offsets;
  REPoint point;
  VectorXd jy;           // momentum at the node (identity group factor)
  VectorXd eigenvalues;  // spectrum of D^2_N hbar_eta at the node (full N)
  bool k_fixes_point = false;
  int stabilizer_gen_count = 0;  // G_z generators fixing (rho, v)
  int rho_stabilizer_gen_count = 0;
  bool converged = false;
  std::string diagnostic;
  // orbit-type branches only:
  double symplectic_det = 0.0;
  bool symplectic_checked = false;
};

struct Branch {
  std::string subgroup;
  GridSpec grid;
  std::vector<BranchNode> nodes;  // lexicographic over the grid axes
  int origin_node = -1;
  std::vector<HypothesisCheck> hypothesis_checks;
  bool all_converged = false;
  bool same_symplectic_type = false;
  int manifold_dimension = 0;  // dim G/G_z + dim (m*)^{G_z} for orbit-type branches

  const BranchNode& node(const std::vector<int>& idx) const;
  std::vector<int> shape() const;
};

/// Natural-parameter continuation over the (rho, eta) grid in the fixed
/// subspaces of K, warm-starting each node from its solved neighbor.
Branch continue_branch(const LocalModel& m, const REPoint& base, const SubgroupSpec& K,
                       const GridSpec& grid, const SolveOptions& opts = {});

/// Constant-orbit-type continuation (K = G_z) over (m*)^{G_z}, with the
/// restricted omega_Y determinant recorded per node.  Requires the Lie
/// algebra of N_{G_mu}(G_z)/G_z (= m^{G_z}) to be Abelian.
Branch orbit_type_branch(const LocalModel& m, const REPoint& base,
                         const std::vector<double>& rho_axis,
                         const SolveOptions& opts = {});

struct PersistOptions {
  VectorXd gamma;          // augmenting velocity from the stability certificate
  bool negative = false;   // certificate was NegativeDefinite
  double tol = 1e-9;
  int max_outer = 60;
  int max_inner = 4000;
};

/// Persists the formally stable base relative equilibrium to the nearby
/// momentum mu + rho_bar + eps_bar by the constrained critical-point search
/// over the coadjoint orbit (sphere for SO(3), point for tori).
REPoint persist_to_momentum(const LocalModel& m, const VectorXd& rho_bar,
                            const VectorXd& eps_bar, const PersistOptions& opts);

}  // namespace retool

#endif

#include "retool/resolve.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <numeric>

namespace retool {

MatrixXd fixed_N_basis(const LocalModel& m, const SubgroupSpec& K) {
  if (K.on_N.empty()) return MatrixXd::Identity(m.N_dim, m.N_dim);
  return fixed_subspace(K.on_N);
}

MatrixXd fixed_mstar_basis(const LocalModel& m, const SubgroupSpec& K) {
  if (K.on_mstar.empty()) return MatrixXd::Identity(m.dim_mstar, m.dim_mstar);
  return fixed_subspace(K.on_mstar);
}

MatrixXd fixed_gz_basis(const LocalModel& m, const SubgroupSpec& K) {
  const int kz = m.gz_dim();
  if (K.on_g.empty()) return MatrixXd::Identity(kz, kz);
  const MatrixXd& Bgz = m.split.basis_gz();
  const int rows =
      static_cast<int>(K.on_g.infinitesimal.size() + K.on_g.finite.size()) * m.alg.dim();
  MatrixXd S(rows, kz);
  int r = 0;
  for (const auto& A : K.on_g.infinitesimal) {
    S.middleRows(r, m.alg.dim()) = A * Bgz;
    r += m.alg.dim();
  }
  for (const auto& R : K.on_g.finite) {
    S.middleRows(r, m.alg.dim()) = R * Bgz - Bgz;
    r += m.alg.dim();
  }
  return nullspace(S);
}

REResidual re_residual(const LocalModel& m, const VectorXd& rho, const VectorXd& eta,
                       const VectorXd& v) {
  HbarDerivs d = hbar_eta_derivs(m, eta, rho, v);
  VectorXd xi = m.split.embed_velocity(d.d_rho, eta);
  VectorXd total = m.split.embed_mstar(rho) + m.split.embed_gzstar(momentum_map_N(m, v));
  REResidual r;
  r.r1 = m.split.mstar_coords(coad(m.alg, xi, total));
  r.r2 = d.d_N;
  return r;
}

namespace {

// membership diagnostics: does every generator of K fix (rho, v)?
bool k_fixes(const SubgroupSpec& K, const VectorXd& rho, const VectorXd& v,
             double tol = 1e-9) {
  for (const auto& A : K.on_N.infinitesimal)
    if (v.size() > 0 && (A * v).norm() > tol) return false;
  for (const auto& R : K.on_N.finite)
    if (v.size() > 0 && (R * v - v).norm() > tol) return false;
  for (const auto& A : K.on_mstar.infinitesimal)
    if (rho.size() > 0 && (A * rho).norm() > tol) return false;
  for (const auto& R : K.on_mstar.finite)
    if (rho.size() > 0 && (R * rho - rho).norm() > tol) return false;
  return true;
}

int count_fixing_generators(const GroupRep& rep, const VectorXd& x, double tol = 1e-9) {
  if (x.size() == 0) return static_cast<int>(rep.infinitesimal.size() + rep.finite.size());
  int c = 0;
  for (const auto& A : rep.infinitesimal)
    if (A.size() == 0 || (A * x).norm() <= tol) ++c;
  for (const auto& R : rep.finite)
    if (R.size() == 0 || (R * x - x).norm() <= tol) ++c;
  return c;
}

// generators of G_z (indexed per g_z basis element) fixing both rho and v
int count_joint_fixing(const LocalModel& m, const VectorXd& rho, const VectorXd& v,
                       double tol = 1e-9) {
  int c = 0;
  for (size_t gi = 0; gi < m.rep.infinitesimal.size(); ++gi) {
    const bool fixes_v =
        v.size() == 0 || m.rep.infinitesimal[gi].size() == 0 ||
        (m.rep.infinitesimal[gi] * v).norm() <= tol;
    const bool fixes_rho =
        rho.size() == 0 || gi >= m.rep_mstar.infinitesimal.size() ||
        (m.rep_mstar.infinitesimal[gi] * rho).norm() <= tol;
    if (fixes_v && fixes_rho) ++c;
  }
  return c;
}

}  // namespace

REPoint solve_re(const LocalModel& m, const VectorXd& rho, const VectorXd& eta,
                 const VectorXd& v_guess, const SubgroupSpec* K,
                 const SolveOptions& opts) {
  MatrixXd B = K ? fixed_N_basis(m, *K) : MatrixXd::Identity(m.N_dim, m.N_dim);
  VectorXd v = v_guess;
  if (K && v.size() > 0) v = B * (B.transpose() * v);  // project guess onto N^K

  REPoint p;
  p.rho = rho;
  p.eta = eta;
  const int k = static_cast<int>(B.cols());

  for (int it = 0; it <= opts.max_iterations; ++it) {
    HbarDerivs d = hbar_eta_derivs(m, eta, rho, v);
    if (d.d_N.size() > 0 && d.d_N.norm() < opts.tol) break;
    if (k == 0) break;  // N^K trivial: nothing to solve
    if (it == opts.max_iterations)
      throw SolverError("solve_re: max Newton iterations exceeded");
    VectorXd gr = B.transpose() * d.d_N;
    if (gr.norm() < opts.tol) break;
    MatrixXd Hr = B.transpose() * d.d2_N * B;
    Eigen::FullPivLU<MatrixXd> lu(Hr);
    lu.setThreshold(opts.singular_rtol);
    if (!lu.isInvertible())
      throw SingularJacobianError(
          "solve_re: singular restricted Hessian (degenerate regime)");
    v -= B * lu.solve(gr);
  }

  if (k > 0) {
    // a near-singular restricted Hessian at the located point signals the
    // degenerate regime even when the residual is already below tolerance;
    // the comparison scale is that of the affine family, not of the (possibly
    // vanishing) matrix itself
    HbarDerivs d = hbar_eta_derivs(m, eta, rho, v);
    MatrixXd Hr = B.transpose() * d.d2_N * B;
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(Hr, Eigen::EigenvaluesOnly);
    double family_scale =
        (B.transpose() * hbar_eta_derivs(m, VectorXd::Zero(eta.size()), rho, v).d2_N *
         B)
            .cwiseAbs()
            .maxCoeff();
    for (int i = 0; i < eta.size(); ++i)
      family_scale +=
          std::abs(eta(i)) * (B.transpose() * m.JN_hess[i] * B).cwiseAbs().maxCoeff();
    if (family_scale == 0.0 ||
        es.eigenvalues().cwiseAbs().minCoeff() <= 1e-6 * family_scale)
      throw SingularJacobianError(
          "solve_re: restricted Hessian singular at the solution (degenerate "
          "regime)");
  }

  REResidual r = re_residual(m, rho, eta, v);
  p.v = v;
  p.r1_norm = r.r1.size() > 0 ? r.r1.norm() : 0.0;
  p.r2_norm = r.r2.size() > 0 ? r.r2.norm() : 0.0;
  p.xi = velocity_of(m, rho, v, eta);
  p.converged = p.r2_norm < opts.tol;
  if (p.converged && p.r1_norm >= opts.tol) {
    p.converged = false;
    throw HypothesisError("co-central",
                          "solve_re: r2 converged but r1 = " + std::to_string(p.r1_norm) +
                              " does not vanish; the co-centrality hypothesis fails "
                              "for this (rho, eta)");
  }
  return p;
}

void GridSpec::validate() const {
  auto check_axis = [](const std::vector<double>& ax) {
    if (ax.empty()) throw DimensionError("GridSpec: empty axis");
    bool has_origin = false;
    for (size_t i = 0; i < ax.size(); ++i) {
      if (i > 0 && !(ax[i] > ax[i - 1]))
        throw DimensionError("GridSpec: axis values must be strictly increasing");
      if (std::abs(ax[i]) < 1e-15) has_origin = true;
    }
    if (!has_origin) throw DimensionError("GridSpec: every axis must contain 0");
  };
  for (const auto& ax : rho_axes) check_axis(ax);
  for (const auto& ax : eta_axes) check_axis(ax);
}

const BranchNode& Branch::node(const std::vector<int>& idx) const {
  const auto sh = shape();
  int flat = 0;
  for (size_t d = 0; d < sh.size(); ++d) flat = flat * sh[d] + idx[d];
  return nodes[flat];
}

std::vector<int> Branch::shape() const {
  std::vector<int> sh;
  for (const auto& ax : grid.rho_axes) sh.push_back(static_cast<int>(ax.size()));
  for (const auto& ax : grid.eta_axes) sh.push_back(static_cast<int>(ax.size()));
  return sh;
}

namespace {

struct GridWalk {
  std::vector<std::vector<double>> axes;
  std::vector<int> shape, origin;
  std::vector<std::vector<int>> order;  // processing order, origin-outward

  explicit GridWalk(const GridSpec& g) {
    for (const auto& ax : g.rho_axes) axes.push_back(ax);
    for (const auto& ax : g.eta_axes) axes.push_back(ax);
    for (const auto& ax : axes) {
      shape.push_back(static_cast<int>(ax.size()));
      int oi = 0;
      for (size_t i = 0; i < ax.size(); ++i)
        if (std::abs(ax[i]) < std::abs(ax[oi])) oi = static_cast<int>(i);
      origin.push_back(oi);
    }
    std::vector<int> idx(axes.size(), 0);
    build(idx);
    std::stable_sort(order.begin(), order.end(),
                     [&](const std::vector<int>& a, const std::vector<int>& b) {
                       return l1(a) < l1(b);
                     });
  }
  int l1(const std::vector<int>& idx) const {
    int d = 0;
    for (size_t i = 0; i < idx.size(); ++i) d += std::abs(idx[i] - origin[i]);
    return d;
  }
  void build(std::vector<int>& idx, size_t d = 0) {
    if (d == axes.size()) {
      order.push_back(idx);
      return;
    }
    for (int i = 0; i < shape[d]; ++i) {
      idx[d] = i;
      build(idx, d + 1);
    }
  }
  int flat(const std::vector<int>& idx) const {
    int f = 0;
    for (size_t d = 0; d < shape.size(); ++d) f = f * shape[d] + idx[d];
    return f;
  }
  // neighbor one step toward the origin (already processed by L1 ordering)
  std::vector<int> warm_source(const std::vector<int>& idx) const {
    std::vector<int> s = idx;
    for (size_t d = 0; d < idx.size(); ++d) {
      if (idx[d] > origin[d]) {
        s[d] -= 1;
        return s;
      }
      if (idx[d] < origin[d]) {
        s[d] += 1;
        return s;
      }
    }
    return s;  // origin itself
  }
};

}  // namespace

Branch continue_branch(const LocalModel& m, const REPoint& base, const SubgroupSpec& K,
                       const GridSpec& grid, const SolveOptions& opts) {
  grid.validate();
  Branch br;
  br.subgroup = K.name;
  br.grid = grid;

  MatrixXd BN = fixed_N_basis(m, K);
  MatrixXd Bms = fixed_mstar_basis(m, K);
  MatrixXd Bgzk = fixed_gz_basis(m, K);
  if (static_cast<int>(grid.rho_axes.size()) > Bms.cols())
    throw DimensionError("continue_branch: more rho axes than dim (m*)^K");
  if (static_cast<int>(grid.eta_axes.size()) > Bgzk.cols())
    throw DimensionError("continue_branch: more eta axes than dim (g_z)^K");

  // non-degeneracy of the restricted Hessian at the base point
  {
    HbarDerivs d = hbar_eta_derivs(m, base.eta, base.rho, base.v);
    if (BN.cols() > 0) {
      MatrixXd Hr = BN.transpose() * d.d2_N * BN;
      Eigen::SelfAdjointEigenSolver<MatrixXd> es(Hr, Eigen::EigenvaluesOnly);
      const double scale = es.eigenvalues().cwiseAbs().maxCoeff();
      if (es.eigenvalues().cwiseAbs().minCoeff() <= 1e-10 * std::max(1.0, scale))
        throw HypothesisError("non-degeneracy",
                              "continue_branch: restricted Hessian degenerate at base");
      br.hypothesis_checks.push_back({"non-degeneracy", true, "restricted Hessian invertible"});
    } else {
      br.hypothesis_checks.push_back({"non-degeneracy", true, "N^K trivial"});
    }
  }

  // co-centrality of (g_z)^K in (g_mu)^K (informational; r1 is the hard check)
  {
    MatrixXd Bgmu(m.alg.dim(), m.split.dim_gz() + m.split.dim_m());
    Bgmu << m.split.basis_gz(), m.split.basis_m();
    MatrixXd sub = m.split.basis_gz() * Bgzk;
    MatrixXd amb = Bgmu;
    if (!K.on_g.empty()) {
      GroupRep restricted;
      restricted.n = static_cast<int>(Bgmu.cols());
      MatrixXd Q = orthonormalize(Bgmu);
      for (const auto& A : K.on_g.infinitesimal)
        restricted.infinitesimal.push_back(Q.transpose() * A * Q);
      for (const auto& R : K.on_g.finite)
        restricted.finite.push_back(Q.transpose() * R * Q);
      amb = Q * fixed_subspace(restricted);
    }
    CocentralResult cc = check_cocentral(m.alg, sub, amb);
    br.hypothesis_checks.push_back(
        {"co-central", cc.cocentral,
         cc.cocentral ? "(g_z)^K is co-central in (g_mu)^K"
                      : "non-vanishing bracket of norm " +
                            std::to_string(cc.max_bracket_norm)});
  }

  GridWalk walk(grid);
  br.nodes.resize(walk.order.empty() ? 1 : static_cast<int>(std::accumulate(
                      walk.shape.begin(), walk.shape.end(), 1, std::multiplies<int>())));
  const int n_rho_axes = static_cast<int>(grid.rho_axes.size());

  std::vector<VectorXd> warm(br.nodes.size());
  br.all_converged = true;
  for (const auto& idx : walk.order) {
    const int f = walk.flat(idx);
    BranchNode& node = br.nodes[f];
    node.offsets.resize(idx.size());
    VectorXd rho = base.rho, eta = base.eta;
    for (size_t d = 0; d < idx.size(); ++d) {
      const double off = walk.axes[d][idx[d]];
      node.offsets[d] = off;
      if (static_cast<int>(d) < n_rho_axes)
        rho += off * Bms.col(d);
      else
        eta += off * Bgzk.col(d - n_rho_axes);
    }
    const int src = walk.flat(walk.warm_source(idx));
    VectorXd guess = warm[src].size() > 0 ? warm[src] : base.v;
    try {
      node.point = solve_re(m, rho, eta, guess, &K, opts);
      node.converged = node.point.converged;
    } catch (const SingularJacobianError& e) {
      node.converged = false;
      node.diagnostic = e.what();
    } catch (const HypothesisError& e) {
      node.converged = false;
      node.diagnostic = std::string("hypothesis '") + e.hypothesis + "': " + e.what();
      node.point.rho = rho;
      node.point.eta = eta;
      node.point.v = guess;
    } catch (const SolverError& e) {
      node.converged = false;
      node.diagnostic = e.what();
    }
    warm[f] = node.converged ? node.point.v : guess;
    if (node.converged) {
      node.jy = momentum_map_Y(m, GroupElement::identity(m.alg), node.point.rho,
                               node.point.v);
      HbarDerivs d = hbar_eta_derivs(m, node.point.eta, node.point.rho, node.point.v);
      if (m.N_dim > 0) {
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(d.d2_N, Eigen::EigenvaluesOnly);
        node.eigenvalues = es.eigenvalues();
      }
      node.k_fixes_point = k_fixes(K, node.point.rho, node.point.v);
      node.stabilizer_gen_count = count_joint_fixing(m, node.point.rho, node.point.v);
      node.rho_stabilizer_gen_count =
          count_fixing_generators(m.rep_mstar, node.point.rho);
    } else {
      br.all_converged = false;
    }
    if (walk.l1(idx) == 0) br.origin_node = f;
  }
  return br;
}

Branch orbit_type_branch(const LocalModel& m, const REPoint& base,
                         const std::vector<double>& rho_axis, const SolveOptions& opts) {
  const SubgroupSpec& Gz = m.subgroups.at("Gz");

  // l = m^{G_z} must be Abelian (as the Lie algebra of N_{G_mu}(G_z)/G_z)
  MatrixXd m_fixed;
  {
    const MatrixXd& Bm = m.split.basis_m();
    if (Bm.cols() == 0 || m.rep_g.empty()) {
      m_fixed = Bm;
    } else {
      MatrixXd Q = orthonormalize(Bm);
      GroupRep restricted;
      restricted.n = static_cast<int>(Q.cols());
      for (const auto& A : m.rep_g.infinitesimal)
        restricted.infinitesimal.push_back(Q.transpose() * A * Q);
      for (const auto& R : m.rep_g.finite)
        restricted.finite.push_back(Q.transpose() * R * Q);
      m_fixed = Q * fixed_subspace(restricted);
    }
    for (int a = 0; a < m_fixed.cols(); ++a)
      for (int b = a + 1; b < m_fixed.cols(); ++b)
        if (lie_bracket(m.alg, m_fixed.col(a), m_fixed.col(b)).norm() > 1e-12)
          throw HypothesisError("abelian-normalizer",
                                "orbit_type_branch: m^{G_z} is not Abelian");
  }

  // chart over (m*)^{G_z}; empty chart when the fixed space vanishes
  MatrixXd Bms = fixed_mstar_basis(m, Gz);
  Branch br;
  if (Bms.cols() == 0) {
    br.subgroup = "Gz";
    br.hypothesis_checks.push_back(
        {"abelian-normalizer", true, "m^{G_z} Abelian"});
    br.hypothesis_checks.push_back(
        {"chart", false, "(m*)^{G_z} = 0: branch degenerates to the single orbit"});
    br.manifold_dimension = m.alg.dim() - m.gz_dim();
    br.same_symplectic_type = true;
    return br;
  }

  GridSpec grid;
  grid.rho_axes = {rho_axis};
  br = continue_branch(m, base, Gz, grid, opts);
  br.hypothesis_checks.push_back({"abelian-normalizer", true, "m^{G_z} Abelian"});
  br.manifold_dimension =
      (m.alg.dim() - m.gz_dim()) + static_cast<int>(Bms.cols());

  // symplecticity: restricted omega_Y on g.z x (m*)^{G_z} tangents per node
  const bool m_fixed_is_all = m_fixed.cols() == m.split.dim_m();
  const int ng = m.split.dim_m() + m.split.dim_q();
  const int nb = static_cast<int>(Bms.cols());
  MatrixXd Bgroup(m.alg.dim(), ng);
  if (ng > 0) Bgroup << m.split.basis_m(), m.split.basis_q();

  for (size_t i = 0; i < br.nodes.size(); ++i) {
    BranchNode& node = br.nodes[i];
    if (!node.converged) continue;
    // finite-difference branch tangent dv/drho from neighbors
    MatrixXd Dv = MatrixXd::Zero(m.N_dim, nb);
    if (br.nodes.size() > 1) {
      const size_t prev = i > 0 ? i - 1 : i;
      const size_t next = i + 1 < br.nodes.size() ? i + 1 : i;
      if (br.nodes[prev].converged && br.nodes[next].converged && next > prev) {
        const double h = br.nodes[next].offsets[0] - br.nodes[prev].offsets[0];
        if (h > 0)
          Dv.col(0) = (br.nodes[next].point.v - br.nodes[prev].point.v) / h;
      }
    }
    const int dim = ng + nb;
    MatrixXd W(dim, dim);
    std::vector<TangentY> tangents;
    for (int a = 0; a < ng; ++a)
      tangents.push_back({Bgroup.col(a), VectorXd::Zero(m.dim_mstar),
                          VectorXd::Zero(m.N_dim)});
    for (int a = 0; a < nb; ++a)
      tangents.push_back({VectorXd::Zero(m.alg.dim()), Bms.col(a), Dv.col(a)});
    for (int a = 0; a < dim; ++a)
      for (int b = 0; b < dim; ++b)
        W(a, b) = eval_omega_Y(m, node.point.rho, node.point.v, tangents[a], tangents[b]);
    node.symplectic_det = W.determinant();
    node.symplectic_checked = m_fixed_is_all;
  }
  br.same_symplectic_type = true;  // torus/Abelian momentum stabilizers in scope
  return br;
}

REPoint persist_to_momentum(const LocalModel& m, const VectorXd& rho_bar,
                            const VectorXd& eps_bar, const PersistOptions& opts) {
  if (opts.gamma.size() != m.gz_dim())
    throw HypothesisError("formal-stability",
                          "persist_to_momentum: base certificate (gamma) required");
  const double s = opts.negative ? -1.0 : 1.0;
  const VectorXd nu_bar =
      m.split.embed_mstar(rho_bar) + m.split.embed_gzstar(eps_bar);

  const bool sphere_orbit = m.alg.realization() == GroupKind::SO3 &&
                            m.split.dim_gz() + m.split.dim_m() == m.alg.dim();

  if (!sphere_orbit) {
    // Abelian momentum stabilizer: the coadjoint orbit is a point
    if (eps_bar.norm() == 0.0) {
      REPoint p = solve_re(m, rho_bar, opts.gamma, VectorXd::Zero(m.N_dim));
      return p;
    }
  }

  // augmented-Lagrangian search over (alpha on the orbit, v in N) for a
  // constrained critical point of f = hbar_gamma with phi = J_N(v) - alpha|g_z
  const double radius = nu_bar.norm();
  VectorXd alpha = sphere_orbit && radius > 0 ? nu_bar : nu_bar;
  VectorXd v = VectorXd::Zero(m.N_dim);
  VectorXd mult = VectorXd::Zero(m.gz_dim());
  double nu = 10.0;

  auto S_of = [&](const VectorXd& e) {
    MatrixXd S = MatrixXd::Zero(m.N_dim, m.N_dim);
    for (int i = 0; i < m.gz_dim(); ++i) S += e(i) * m.JN_hess[i];
    return S;
  };
  const MatrixXd Sgamma = S_of(opts.gamma);
  const MatrixXd& Bm = m.split.basis_m();
  const MatrixXd& Bgz = m.split.basis_gz();

  auto phi = [&](const VectorXd& a, const VectorXd& w) {
    return VectorXd(momentum_map_N(m, w) - m.split.gzstar_coords(a));
  };
  auto objective = [&](const VectorXd& a, const VectorXd& w) {
    VectorXd rho = m.split.mstar_coords(a);
    return s * (m.hbar->value(rho, w) - opts.gamma.dot(momentum_map_N(m, w)));
  };
  auto lagrangian = [&](const VectorXd& a, const VectorXd& w) {
    VectorXd ph = phi(a, w);
    return objective(a, w) - mult.dot(ph) + 0.5 * nu * ph.squaredNorm();
  };
  auto gradients = [&](const VectorXd& a, const VectorXd& w, VectorXd& ga, VectorXd& gv) {
    VectorXd rho = m.split.mstar_coords(a);
    VectorXd d_rho, d_v;
    if (!m.hbar->gradient(rho, w, d_rho, d_v)) {
      HbarDerivs d = hbar_eta_derivs(m, VectorXd::Zero(m.gz_dim()), rho, w);
      d_rho = d.d_rho;
      d_v = d.d_N;
    }
    VectorXd ph = phi(a, w);
    VectorXd lam = mult - nu * ph;  // effective multiplier
    gv = s * (d_v - Sgamma * w) - S_of(lam) * w;
    ga = s * (Bm * d_rho) + Bgz * lam;
    if (sphere_orbit && radius > 0) {
      VectorXd ah = a / a.norm();
      ga -= ah * ah.dot(ga);  // project to the sphere tangent
    } else {
      ga.setZero();  // point orbit: alpha is frozen
    }
  };

  double kkt = std::numeric_limits<double>::infinity();
  for (int outer = 0; outer < opts.max_outer; ++outer) {
    // inner: projected gradient descent with backtracking
    double step = 0.1;
    double L = lagrangian(alpha, v);
    for (int inner = 0; inner < opts.max_inner; ++inner) {
      VectorXd ga, gv;
      gradients(alpha, v, ga, gv);
      const double gnorm = std::sqrt(ga.squaredNorm() + gv.squaredNorm());
      if (gnorm < 0.1 * opts.tol) break;
      VectorXd a_try, v_try;
      double L_try = 0.0;
      bool accepted = false;
      for (int bt = 0; bt < 60; ++bt) {
        a_try = alpha - step * ga;
        if (sphere_orbit && radius > 0) a_try = radius * a_try.normalized();
        v_try = v - step * gv;
        L_try = lagrangian(a_try, v_try);
        if (L_try < L - 1e-4 * step * gnorm * gnorm) {
          accepted = true;
          break;
        }
        step *= 0.5;
      }
      if (!accepted) break;
      alpha = a_try;
      v = v_try;
      L = L_try;
      step = std::min(step * 2.0, 1.0);
    }
    VectorXd ph = phi(alpha, v);
    mult -= nu * ph;
    VectorXd ga, gv;
    gradients(alpha, v, ga, gv);
    kkt = std::sqrt(ga.squaredNorm() + gv.squaredNorm()) + ph.norm();
    if (kkt < opts.tol) break;
    if (outer % 4 == 3) nu *= 4.0;
  }
  if (!(kkt < opts.tol))
    throw SolverError("persist_to_momentum: descent stagnation, KKT residual " +
                      std::to_string(kkt));

  // The gamma-augmented objective shifts the Lagrange multiplier, so the
  // relative equilibrium's isotropy element is recovered from the RE
  // equations at the located point: least squares over eta of
  //   || D_N hbar(v) - S(eta) v ||^2 + sum_j <ad*_{b_j} alpha, xi(eta)>^2.
  VectorXd eta_re = opts.gamma + s * mult;
  {
    const int kz = m.gz_dim();
    VectorXd rho = m.split.mstar_coords(alpha);
    VectorXd d_rho, d_v;
    if (!m.hbar->gradient(rho, v, d_rho, d_v)) {
      HbarDerivs d = hbar_eta_derivs(m, VectorXd::Zero(kz), rho, v);
      d_rho = d.d_rho;
      d_v = d.d_N;
    }
    const int n_orbit = m.split.dim_gz() + m.split.dim_m();
    MatrixXd Borb(m.alg.dim(), n_orbit);
    Borb << Bgz, Bm;
    MatrixXd A(m.N_dim + n_orbit, kz);
    VectorXd b(m.N_dim + n_orbit);
    for (int i = 0; i < kz; ++i)
      A.col(i).head(m.N_dim) = m.JN_hess[i].size() > 0 ? VectorXd(m.JN_hess[i] * v)
                                                       : VectorXd::Zero(m.N_dim);
    b.head(m.N_dim) = d_v;
    const VectorXd xi_m = Bm * d_rho;
    for (int j = 0; j < n_orbit; ++j) {
      VectorXd w = coad(m.alg, Borb.col(j), alpha);
      for (int i = 0; i < kz; ++i) A(m.N_dim + j, i) = -w.dot(Bgz.col(i));
      b(m.N_dim + j) = w.dot(xi_m);
    }
    Eigen::FullPivLU<MatrixXd> lu(A.transpose() * A);
    lu.setThreshold(1e-10);
    if (lu.isInvertible()) eta_re = lu.solve(A.transpose() * b);
  }

  REPoint p;
  p.rho = m.split.mstar_coords(alpha);
  p.v = v;
  p.eta = eta_re;
  REResidual r = re_residual(m, p.rho, p.eta, p.v);
  p.r1_norm = r.r1.size() > 0 ? r.r1.norm() : 0.0;
  p.r2_norm = r.r2.size() > 0 ? r.r2.norm() : 0.0;
  p.xi = velocity_of(m, p.rho, p.v, p.eta);
  p.converged = p.r1_norm < 1e-8 && p.r2_norm < 1e-8;
  if (!p.converged)
    throw SolverError("persist_to_momentum: located point fails the residual check");
  return p;
}

}  // namespace retool

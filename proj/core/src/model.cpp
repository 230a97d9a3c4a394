#include "retool/model.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <unsupported/Eigen/MatrixFunctions>
#include <cmath>
#include <random>

namespace retool {

// ---------------------------------------------------------------------------
// PolynomialHamiltonian

PolynomialHamiltonian::PolynomialHamiltonian(int dim_rho, int dim_v,
                                             std::vector<Monomial> terms)
    : dim_rho_(dim_rho), dim_v_(dim_v), terms_(std::move(terms)) {
  for (const auto& t : terms_)
    if (static_cast<int>(t.powers.size()) != dim_rho_ + dim_v_)
      throw DimensionError("PolynomialHamiltonian: exponent list length mismatch");
}

namespace {
double ipow(double x, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= x;
  return r;
}
}  // namespace

double PolynomialHamiltonian::value(const VectorXd& rho, const VectorXd& v) const {
  double s = 0.0;
  for (const auto& t : terms_) {
    double m = t.coeff;
    for (int i = 0; i < dim_rho_; ++i) m *= ipow(rho(i), t.powers[i]);
    for (int i = 0; i < dim_v_; ++i) m *= ipow(v(i), t.powers[dim_rho_ + i]);
    s += m;
  }
  return s;
}

bool PolynomialHamiltonian::gradient(const VectorXd& rho, const VectorXd& v,
                                     VectorXd& d_rho, VectorXd& d_v) const {
  d_rho = VectorXd::Zero(dim_rho_);
  d_v = VectorXd::Zero(dim_v_);
  auto coord = [&](int i) { return i < dim_rho_ ? rho(i) : v(i - dim_rho_); };
  const int n = dim_rho_ + dim_v_;
  for (const auto& t : terms_) {
    for (int d = 0; d < n; ++d) {
      if (t.powers[d] == 0) continue;
      double m = t.coeff * t.powers[d];
      for (int i = 0; i < n; ++i)
        m *= ipow(coord(i), i == d ? t.powers[i] - 1 : t.powers[i]);
      if (d < dim_rho_)
        d_rho(d) += m;
      else
        d_v(d - dim_rho_) += m;
    }
  }
  return true;
}

bool PolynomialHamiltonian::hessian_v(const VectorXd& rho, const VectorXd& v,
                                      MatrixXd& H) const {
  H = MatrixXd::Zero(dim_v_, dim_v_);
  auto coord = [&](int i) { return i < dim_rho_ ? rho(i) : v(i - dim_rho_); };
  const int n = dim_rho_ + dim_v_;
  for (const auto& t : terms_) {
    for (int a = 0; a < dim_v_; ++a) {
      const int da = dim_rho_ + a;
      if (t.powers[da] == 0) continue;
      for (int b = a; b < dim_v_; ++b) {
        const int db = dim_rho_ + b;
        double factor;
        if (a == b) {
          if (t.powers[da] < 2) continue;
          factor = static_cast<double>(t.powers[da]) * (t.powers[da] - 1);
        } else {
          if (t.powers[db] == 0) continue;
          factor = static_cast<double>(t.powers[da]) * t.powers[db];
        }
        double m = t.coeff * factor;
        for (int i = 0; i < n; ++i) {
          int p = t.powers[i];
          if (i == da) p -= (a == b ? 2 : 1);
          if (i == db && a != b) p -= 1;
          m *= ipow(coord(i), p);
        }
        H(a, b) += m;
        if (a != b) H(b, a) += m;
      }
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// SubgroupSpec

SubgroupSpec SubgroupSpec::trivial(int n_dim, int mstar_dim, int g_dim) {
  SubgroupSpec s;
  s.name = "e";
  s.on_N.n = n_dim;
  s.on_mstar.n = mstar_dim;
  s.on_g.n = g_dim;
  return s;
}

// ---------------------------------------------------------------------------
// LocalModel

void LocalModel::finalize() {
  if (Omega.rows() != N_dim || Omega.cols() != N_dim)
    throw DimensionError("LocalModel: Omega has wrong shape");
  if (dim_mstar != split.dim_m())
    throw DimensionError("LocalModel: dim_mstar inconsistent with splitting");
  if (mu.size() != alg.dim()) throw DimensionError("LocalModel: mu has wrong length");

  if (N_dim > 0) {
    if ((Omega + Omega.transpose()).cwiseAbs().maxCoeff() >
        1e-12 * std::max(1.0, Omega.cwiseAbs().maxCoeff()))
      throw DimensionError("LocalModel: Omega not antisymmetric");
    Eigen::FullPivLU<MatrixXd> lu(Omega);
    lu.setThreshold(1e-12);
    if (!lu.isInvertible()) throw SolverError("LocalModel: Omega is singular");
    // Omega^sharp: Omega(Omega^sharp a, .) = a  =>  Omega^sharp = Omega^{-T}
    Omega_sharp = Omega.transpose().fullPivLu().inverse();
    if (static_cast<int>(rep.infinitesimal.size()) != split.dim_gz())
      throw DimensionError("LocalModel: one N-generator per g_z basis vector required");
    for (const auto& A : rep.infinitesimal) {
      if ((A.transpose() * Omega + Omega * A).cwiseAbs().maxCoeff() >
          1e-10 * std::max(1.0, A.cwiseAbs().maxCoeff() * Omega.cwiseAbs().maxCoeff()))
        throw DimensionError("LocalModel: generator is not Omega-Hamiltonian");
    }
    if (rep.finite_orthogonality_defect() > 1e-12)
      throw DimensionError("LocalModel: finite generator not orthogonal");
    JN_hess.clear();
    for (const auto& A : rep.infinitesimal) {
      MatrixXd S = A.transpose() * Omega;  // D^2 J_N^{e_i}
      if (symmetry_defect(S) > 1e-10 * std::max(1.0, S.cwiseAbs().maxCoeff()))
        throw DimensionError("LocalModel: D^2 J_N not symmetric (action/Omega mismatch)");
      JN_hess.push_back(0.5 * (S + S.transpose()));
    }
  } else {
    Omega_sharp = MatrixXd(0, 0);
    JN_hess.assign(split.dim_gz(), MatrixXd(0, 0));
  }
  if (rep_mstar.finite_orthogonality_defect() > 1e-12)
    throw DimensionError("LocalModel: finite m*-generator not orthogonal");
  // splitting invariance under the G_z action on g is asserted, not assumed
  if (!rep_g.empty() && split.invariance_defect(rep_g) > 1e-10)
    throw DimensionError("LocalModel: splitting is not invariant under the G_z action");
  if (!subgroups.count("e"))
    subgroups["e"] = SubgroupSpec::trivial(N_dim, dim_mstar, alg.dim());
  if (!subgroups.count("Gz")) {
    SubgroupSpec gz;
    gz.name = "Gz";
    gz.is_full_gz = true;
    gz.on_N = rep;
    gz.on_mstar = rep_mstar;
    gz.on_g = rep_g;
    subgroups["Gz"] = gz;
  }
}

double LocalModel::hbar_invariance_defect(int samples, std::uint64_t seed) const {
  if (N_dim == 0 || rep.empty()) return 0.0;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 0.3);
  std::uniform_real_distribution<double> angle(-1.0, 1.0);
  double defect = 0.0;
  for (int s = 0; s < samples; ++s) {
    VectorXd rho(dim_mstar), v(N_dim);
    for (int i = 0; i < dim_mstar; ++i) rho(i) = gauss(rng);
    for (int i = 0; i < N_dim; ++i) v(i) = gauss(rng);
    const double h0 = hbar->value(rho, v);
    for (size_t gi = 0; gi < rep.infinitesimal.size(); ++gi) {
      const double t = angle(rng);
      // exp(t A) via scaling-and-squaring on the small generator
      MatrixXd R = (t * rep.infinitesimal[gi]).exp();
      VectorXd rho2 = rho;
      if (!rep_mstar.infinitesimal.empty())
        rho2 = (t * rep_mstar.infinitesimal[gi]).exp() * rho;
      defect = std::max(defect, std::abs(hbar->value(rho2, R * v) - h0));
    }
    for (size_t gi = 0; gi < rep.finite.size(); ++gi) {
      VectorXd rho2 = rho;
      if (gi < rep_mstar.finite.size()) rho2 = rep_mstar.finite[gi] * rho;
      defect = std::max(defect, std::abs(hbar->value(rho2, rep.finite[gi] * v) - h0));
    }
  }
  return defect;
}

VectorXd momentum_map_N(const LocalModel& m, const VectorXd& v) {
  if (v.size() != m.N_dim) throw DimensionError("momentum_map_N: dimension mismatch");
  VectorXd j(m.gz_dim());
  for (int i = 0; i < m.gz_dim(); ++i) j(i) = 0.5 * v.dot(m.JN_hess[i] * v);
  return j;
}

VectorXd momentum_map_N_tangent(const LocalModel& m, const VectorXd& v,
                                const VectorXd& w) {
  VectorXd j(m.gz_dim());
  for (int i = 0; i < m.gz_dim(); ++i) j(i) = v.dot(m.JN_hess[i] * w);
  return j;
}

// ---------------------------------------------------------------------------
// GroupElement

GroupElement GroupElement::identity(const LieAlgebra& alg) {
  GroupElement g;
  g.kind = alg.realization();
  if (g.kind == GroupKind::Torus || g.kind == GroupKind::None)
    g.angles = VectorXd::Zero(alg.dim());
  return g;
}

GroupElement GroupElement::translated(const LieAlgebra& alg, const VectorXd& xi) const {
  GroupElement g = *this;
  switch (kind) {
    case GroupKind::SO3:
      g.rotation = rotation * so3_exp(xi);
      break;
    case GroupKind::Torus:
    case GroupKind::None:
      g.angles = angles + xi;
      break;
  }
  (void)alg;
  return g;
}

VectorXd GroupElement::coadjoint(const VectorXd& mu) const {
  if (kind == GroupKind::SO3) return rotation * mu;
  return mu;  // torus / abelian: trivial coadjoint action
}

double GroupElement::manifold_defect() const {
  if (kind != GroupKind::SO3) return 0.0;
  return (rotation.transpose() * rotation - Eigen::Matrix3d::Identity())
      .cwiseAbs()
      .maxCoeff();
}

VectorXd momentum_map_Y(const LocalModel& m, const GroupElement& g, const VectorXd& rho,
                        const VectorXd& v) {
  VectorXd total = m.mu + m.split.embed_mstar(rho) +
                   m.split.embed_gzstar(momentum_map_N(m, v));
  return g.coadjoint(total);
}

// ---------------------------------------------------------------------------
// hbar derivatives

namespace {
constexpr double kGradStep = 6.055454452393343e-06;   // eps^(1/3)
constexpr double kHessStep = 1.220703125e-04;         // eps^(1/4)
}  // namespace

HbarDerivs hbar_eta_derivs(const LocalModel& m, const VectorXd& eta, const VectorXd& rho,
                           const VectorXd& v) {
  if (eta.size() != m.gz_dim() || rho.size() != m.dim_mstar || v.size() != m.N_dim)
    throw DimensionError("hbar_eta_derivs: dimension mismatch");
  HbarDerivs d;
  const SliceHamiltonian& h = *m.hbar;
  d.value = h.value(rho, v);
  if (!std::isfinite(d.value))
    throw SolverError("hbar_eta_derivs: non-finite Hamiltonian value");

  VectorXd d_rho, d_v;
  if (!h.gradient(rho, v, d_rho, d_v)) {
    d_rho = fd_gradient([&](const VectorXd& r) { return h.value(r, v); }, rho, kGradStep);
    d_v = fd_gradient([&](const VectorXd& w) { return h.value(rho, w); }, v, kGradStep);
  }
  MatrixXd Hv;
  if (!h.hessian_v(rho, v, Hv)) {
    Hv = fd_hessian([&](const VectorXd& w) { return h.value(rho, w); }, v, kHessStep);
  }

  // subtract the quadratic momentum term J_N^eta
  MatrixXd S = MatrixXd::Zero(m.N_dim, m.N_dim);
  for (int i = 0; i < m.gz_dim(); ++i) S += eta(i) * m.JN_hess[i];
  d.value -= 0.5 * v.dot(S * v);
  d.d_rho = d_rho;
  d.d_N = d_v - S * v;
  d.d2_N = 0.5 * (Hv + Hv.transpose()) - S;
  return d;
}

double eval_omega_Y(const LocalModel& m, const VectorXd& rho, const VectorXd& v,
                    const TangentY& t1, const TangentY& t2) {
  if (t1.lambda.size() != m.alg.dim() || t2.lambda.size() != m.alg.dim() ||
      t1.rho_dot.size() != m.dim_mstar || t2.rho_dot.size() != m.dim_mstar ||
      t1.v_dot.size() != m.N_dim || t2.v_dot.size() != m.N_dim)
    throw DimensionError("eval_omega_Y: dimension mismatch");
  VectorXd a1 = m.split.embed_mstar(t1.rho_dot) +
                m.split.embed_gzstar(momentum_map_N_tangent(m, v, t1.v_dot));
  VectorXd a2 = m.split.embed_mstar(t2.rho_dot) +
                m.split.embed_gzstar(momentum_map_N_tangent(m, v, t2.v_dot));
  VectorXd total = m.mu + m.split.embed_mstar(rho) +
                   m.split.embed_gzstar(momentum_map_N(m, v));
  double s = a2.dot(t1.lambda) - a1.dot(t2.lambda);
  s += total.dot(lie_bracket(m.alg, t1.lambda, t2.lambda));
  if (m.N_dim > 0) s += t1.v_dot.dot(m.Omega * t2.v_dot);
  return s;
}

HessianPencil pencil_at(const LocalModel& m, const VectorXd& rho) {
  HessianPencil p;
  VectorXd eta0 = VectorXd::Zero(m.gz_dim());
  p.H0 = hbar_eta_derivs(m, eta0, rho, VectorXd::Zero(m.N_dim)).d2_N;
  p.Q = m.JN_hess;
  return p;
}

VectorXd velocity_of(const LocalModel& m, const VectorXd& rho, const VectorXd& v,
                     const VectorXd& eta) {
  HbarDerivs d = hbar_eta_derivs(m, VectorXd::Zero(m.gz_dim()), rho, v);
  return m.split.embed_velocity(d.d_rho, eta);
}

}  // namespace retool

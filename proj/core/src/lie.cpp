#include "retool/lie.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>
#include <cmath>

namespace retool {

// ---------------------------------------------------------------------------
// numeric.hpp helpers

MatrixXd nullspace(const MatrixXd& M, double rtol) {
  const int n = static_cast<int>(M.cols());
  if (M.rows() == 0 || M.size() == 0) return MatrixXd::Identity(n, n);
  Eigen::JacobiSVD<MatrixXd> svd(M, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > rtol * (smax > 0 ? smax : 1.0)) ++rank;
  return svd.matrixV().rightCols(n - rank);
}

MatrixXd orthonormalize(const MatrixXd& B, double rtol) {
  if (B.cols() == 0) return B;
  Eigen::ColPivHouseholderQR<MatrixXd> qr(B);
  qr.setThreshold(rtol);
  const int r = static_cast<int>(qr.rank());
  MatrixXd Q = qr.householderQ() * MatrixXd::Identity(B.rows(), r);
  return Q;
}

MatrixXd orthonormalize_wrt(const MatrixXd& B, const MatrixXd& G, double rtol) {
  if (B.cols() == 0) return B;
  Eigen::LLT<MatrixXd> llt(G);
  MatrixXd L = llt.matrixL();
  MatrixXd Q = orthonormalize(L.transpose() * B, rtol);
  return L.transpose().triangularView<Eigen::Upper>().solve(Q);
}

double symmetry_defect(const MatrixXd& M) {
  if (M.size() == 0) return 0.0;
  return (M - M.transpose()).cwiseAbs().maxCoeff();
}

VectorXd fd_gradient(const std::function<double(const VectorXd&)>& f, const VectorXd& x,
                     double scale) {
  VectorXd g(x.size());
  VectorXd xp = x, xm = x;
  for (int i = 0; i < x.size(); ++i) {
    const double h = scale * (1.0 + std::abs(x(i)));
    xp(i) = x(i) + h;
    xm(i) = x(i) - h;
    g(i) = (f(xp) - f(xm)) / (2.0 * h);
    xp(i) = x(i);
    xm(i) = x(i);
  }
  return g;
}

MatrixXd fd_hessian(const std::function<double(const VectorXd&)>& f, const VectorXd& x,
                    double scale) {
  const int n = static_cast<int>(x.size());
  MatrixXd H(n, n);
  const double f0 = f(x);
  VectorXd h(n);
  for (int i = 0; i < n; ++i) h(i) = scale * (1.0 + std::abs(x(i)));
  VectorXd y = x;
  for (int i = 0; i < n; ++i) {
    y(i) = x(i) + h(i);
    const double fp = f(y);
    y(i) = x(i) - h(i);
    const double fm = f(y);
    y(i) = x(i);
    H(i, i) = (fp - 2.0 * f0 + fm) / (h(i) * h(i));
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      y(i) = x(i) + h(i); y(j) = x(j) + h(j);
      const double fpp = f(y);
      y(j) = x(j) - h(j);
      const double fpm = f(y);
      y(i) = x(i) - h(i); y(j) = x(j) + h(j);
      const double fmp = f(y);
      y(j) = x(j) - h(j);
      const double fmm = f(y);
      y(i) = x(i); y(j) = x(j);
      H(i, j) = H(j, i) = (fpp - fpm - fmp + fmm) / (4.0 * h(i) * h(j));
    }
  }
  return 0.5 * (H + H.transpose());
}

double golden_max(const std::function<double(double)>& f, double a, double b,
                  double xtol, double* fmax, int* iterations) {
  constexpr double invphi = 0.6180339887498949;
  int iters = 0;
  if (b < a) std::swap(a, b);
  if (b - a < xtol) {
    const double x = 0.5 * (a + b);
    if (fmax) *fmax = f(x);
    if (iterations) *iterations = 0;
    return x;
  }
  double x1 = b - invphi * (b - a);
  double x2 = a + invphi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > xtol && iters < 400) {
    if (f1 < f2) {
      a = x1;
      x1 = x2; f1 = f2;
      x2 = a + invphi * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1; f2 = f1;
      x1 = b - invphi * (b - a);
      f1 = f(x1);
    }
    ++iters;
  }
  const double x = 0.5 * (a + b);
  if (fmax) *fmax = f(x);
  if (iterations) *iterations = iters;
  return x;
}

double bisect_sign_change(const std::function<double(double)>& f, double a, double b,
                          double xtol) {
  double fa = f(a), fb = f(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if (fa * fb > 0.0) throw SolverError("bisect_sign_change: no sign change on bracket");
  while (b - a > xtol) {
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    if (fm == 0.0) return m;
    if (fa * fm < 0.0) {
      b = m; fb = fm;
    } else {
      a = m; fa = fm;
    }
  }
  return 0.5 * (a + b);
}

Eigen::Matrix3d so3_hat(const Vector3d& w) {
  Eigen::Matrix3d W;
  W << 0, -w(2), w(1), w(2), 0, -w(0), -w(1), w(0), 0;
  return W;
}

Eigen::Matrix3d so3_exp(const Vector3d& w) {
  const double t = w.norm();
  const Eigen::Matrix3d W = so3_hat(w);
  if (t < 1e-12) return Eigen::Matrix3d::Identity() + W + 0.5 * W * W;
  return Eigen::Matrix3d::Identity() + (std::sin(t) / t) * W +
         ((1.0 - std::cos(t)) / (t * t)) * W * W;
}

// ---------------------------------------------------------------------------
// LieAlgebra

LieAlgebra::LieAlgebra(std::vector<MatrixXd> structure, MatrixXd inner_product,
                       std::vector<std::string> labels, GroupKind realization)
    : dim_(static_cast<int>(structure.size())),
      ad_(std::move(structure)),
      ip_(std::move(inner_product)),
      labels_(std::move(labels)),
      realization_(realization) {
  for (const auto& a : ad_)
    if (a.rows() != dim_ || a.cols() != dim_)
      throw DimensionError("LieAlgebra: structure constant block has wrong shape");
  if (ip_.rows() != dim_ || ip_.cols() != dim_)
    throw DimensionError("LieAlgebra: inner product has wrong shape");
  if (static_cast<int>(labels_.size()) != dim_)
    labels_.resize(dim_, "e");
}

MatrixXd LieAlgebra::ad(const VectorXd& xi) const {
  if (xi.size() != dim_) throw DimensionError("LieAlgebra::ad: dimension mismatch");
  MatrixXd A = MatrixXd::Zero(dim_, dim_);
  for (int i = 0; i < dim_; ++i) A += xi(i) * ad_[i];
  return A;
}

double LieAlgebra::antisymmetry_residual() const {
  double r = 0.0;
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j)
      r = std::max(r, (ad_[i].col(j) + ad_[j].col(i)).cwiseAbs().maxCoeff());
  return r;
}

double LieAlgebra::jacobi_residual() const {
  double r = 0.0;
  for (int i = 0; i < dim_; ++i) {
    VectorXd ei = VectorXd::Unit(dim_, i);
    for (int j = 0; j < dim_; ++j) {
      VectorXd ej = VectorXd::Unit(dim_, j);
      for (int k = 0; k < dim_; ++k) {
        VectorXd ek = VectorXd::Unit(dim_, k);
        VectorXd s = lie_bracket(*this, lie_bracket(*this, ei, ej), ek) +
                     lie_bracket(*this, lie_bracket(*this, ej, ek), ei) +
                     lie_bracket(*this, lie_bracket(*this, ek, ei), ej);
        r = std::max(r, s.cwiseAbs().maxCoeff());
      }
    }
  }
  return r;
}

LieAlgebra LieAlgebra::so3() {
  std::vector<MatrixXd> ad(3);
  for (int i = 0; i < 3; ++i) ad[i] = so3_hat(Vector3d::Unit(i));
  return LieAlgebra(std::move(ad), MatrixXd::Identity(3, 3), {"e1", "e2", "e3"},
                    GroupKind::SO3);
}

LieAlgebra LieAlgebra::torus(int n) {
  std::vector<MatrixXd> ad(n, MatrixXd::Zero(n, n));
  std::vector<std::string> labels;
  for (int i = 0; i < n; ++i) labels.push_back("t" + std::to_string(i + 1));
  return LieAlgebra(std::move(ad), MatrixXd::Identity(n, n), std::move(labels),
                    GroupKind::Torus);
}

LieAlgebra LieAlgebra::abelian(int n) {
  LieAlgebra a = torus(n);
  return a;
}

VectorXd lie_bracket(const LieAlgebra& alg, const VectorXd& xi, const VectorXd& eta) {
  if (xi.size() != alg.dim() || eta.size() != alg.dim())
    throw DimensionError("lie_bracket: dimension mismatch");
  return alg.ad(xi) * eta;
}

VectorXd coad(const LieAlgebra& alg, const VectorXd& xi, const VectorXd& mu) {
  if (xi.size() != alg.dim() || mu.size() != alg.dim())
    throw DimensionError("coad: dimension mismatch");
  // <ad*_xi mu, e_j> = <mu, [xi, e_j]> = (ad(xi)^T mu)_j
  return alg.ad(xi).transpose() * mu;
}

// ---------------------------------------------------------------------------
// GroupRep / fixed subspaces

double GroupRep::finite_orthogonality_defect() const {
  double r = 0.0;
  for (const auto& R : finite)
    r = std::max(r, (R.transpose() * R - MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff());
  return r;
}

MatrixXd fixed_subspace(const GroupRep& rep, double rtol) {
  const int n = rep.n;
  if (rep.empty()) return MatrixXd::Identity(n, n);
  const int rows = static_cast<int>(rep.infinitesimal.size() + rep.finite.size()) * n;
  MatrixXd S(rows, n);
  int r = 0;
  for (const auto& A : rep.infinitesimal) {
    if (A.rows() != n || A.cols() != n)
      throw DimensionError("fixed_subspace: generator has wrong shape");
    S.middleRows(r, n) = A;
    r += n;
  }
  for (const auto& R : rep.finite) {
    if (R.rows() != n || R.cols() != n)
      throw DimensionError("fixed_subspace: generator has wrong shape");
    S.middleRows(r, n) = R - MatrixXd::Identity(n, n);
    r += n;
  }
  return nullspace(S, rtol);
}

// ---------------------------------------------------------------------------
// Splitting

namespace {

// Basis of the subspace of span(B_ambient) orthogonal (wrt G) to span(B_sub).
MatrixXd complement_in(const MatrixXd& B_sub, const MatrixXd& B_ambient,
                       const MatrixXd& G) {
  if (B_ambient.cols() == 0) return B_ambient;
  if (B_sub.cols() == 0) return B_ambient;
  MatrixXd C = B_sub.transpose() * G * B_ambient;  // constraints on coefficients
  MatrixXd N = nullspace(C);
  return B_ambient * N;
}

}  // namespace

Splitting Splitting::make(const LieAlgebra& alg, const MatrixXd& basis_gz,
                          const MatrixXd& basis_gmu,
                          const std::optional<MatrixXd>& basis_m,
                          const std::optional<MatrixXd>& basis_q) {
  Splitting s;
  const int n = alg.dim();
  s.n_ = n;
  const MatrixXd& G = alg.inner_product();
  s.B_gz_ = basis_gz;
  s.B_m_ = basis_m ? *basis_m : complement_in(basis_gz, basis_gmu, G);
  s.B_q_ = basis_q ? *basis_q : complement_in(basis_gmu, MatrixXd::Identity(n, n), G);

  if (s.B_gz_.cols() + s.B_m_.cols() + s.B_q_.cols() != n)
    throw DimensionError("Splitting: factor dimensions do not sum to dim g");
  MatrixXd B(n, n);
  B << s.B_gz_, s.B_m_, s.B_q_;
  Eigen::FullPivLU<MatrixXd> lu(B);
  if (!lu.isInvertible())
    throw DimensionError("Splitting: union of bases is not linearly independent");
  MatrixXd Binv = lu.inverse();
  const int kz = s.dim_gz(), km = s.dim_m(), kq = s.dim_q();
  s.R_gz_ = Binv.topRows(kz);
  s.R_m_ = Binv.middleRows(kz, km);
  s.R_q_ = Binv.bottomRows(kq);
  MatrixXd Dual = Binv.transpose();  // columns are the dual basis vectors
  s.D_gz_ = Dual.leftCols(kz);
  s.D_m_ = Dual.middleCols(kz, km);
  s.D_q_ = Dual.rightCols(kq);
  return s;
}

double Splitting::invariance_defect(const GroupRep& rep_on_g) const {
  double r = 0.0;
  auto factor_defect = [&](const MatrixXd& Bf) {
    if (Bf.cols() == 0) return;
    MatrixXd Q = orthonormalize(Bf);
    MatrixXd P = Q * Q.transpose();
    for (const auto& A : rep_on_g.infinitesimal) {
      MatrixXd img = A * Bf;
      r = std::max(r, (img - P * img).cwiseAbs().maxCoeff());
    }
    for (const auto& R : rep_on_g.finite) {
      MatrixXd img = R * Bf;
      r = std::max(r, (img - P * img).cwiseAbs().maxCoeff());
    }
  };
  factor_defect(B_gz_);
  factor_defect(B_m_);
  factor_defect(B_q_);
  return r;
}

// ---------------------------------------------------------------------------
// co-centrality and normalizers

CocentralResult check_cocentral(const LieAlgebra& alg, const MatrixXd& sub,
                                const MatrixXd& ambient, double tol) {
  // containment check: each sub vector must lie in span(ambient)
  if (sub.cols() > 0 && ambient.cols() == 0)
    throw DimensionError("check_cocentral: sub not contained in ambient");
  if (ambient.cols() > 0) {
    MatrixXd Q = orthonormalize(ambient);
    for (int j = 0; j < sub.cols(); ++j) {
      VectorXd v = sub.col(j);
      if ((v - Q * (Q.transpose() * v)).norm() > 1e-9 * std::max(1.0, v.norm()))
        throw DimensionError("check_cocentral: sub not contained in ambient");
    }
  }
  CocentralResult res;
  MatrixXd m = complement_in(sub, ambient, alg.inner_product());
  res.cocentral = true;
  for (int a = 0; a < m.cols(); ++a) {
    VectorXd va = m.col(a).normalized();
    for (int b = 0; b < ambient.cols(); ++b) {
      VectorXd vb = ambient.col(b).normalized();
      VectorXd br = lie_bracket(alg, va, vb);
      const double nb = br.cwiseAbs().maxCoeff();
      if (nb > res.max_bracket_norm) {
        res.max_bracket_norm = nb;
        if (nb > tol) {
          res.cocentral = false;
          res.witness_a = va;
          res.witness_b = vb;
          res.witness_bracket = br;
        }
      }
    }
  }
  return res;
}

MatrixXd normalizer_algebra(const LieAlgebra& alg, const GroupRep& rep_on_g,
                            const MatrixXd& basis_h) {
  if (rep_on_g.n != alg.dim())
    throw DimensionError("normalizer_algebra: rep dimension mismatch");
  MatrixXd m = complement_in(basis_h, MatrixXd::Identity(alg.dim(), alg.dim()),
                             alg.inner_product());
  MatrixXd Qm = orthonormalize(m);
  if (Qm.cols() == 0) return basis_h;
  GroupRep restricted;
  restricted.n = static_cast<int>(Qm.cols());
  for (const auto& A : rep_on_g.infinitesimal)
    restricted.infinitesimal.push_back(Qm.transpose() * A * Qm);
  for (const auto& R : rep_on_g.finite)
    restricted.finite.push_back(Qm.transpose() * R * Qm);
  MatrixXd fixed = fixed_subspace(restricted);
  MatrixXd out(alg.dim(), basis_h.cols() + fixed.cols());
  out << basis_h, Qm * fixed;
  return out;
}

}  // namespace retool

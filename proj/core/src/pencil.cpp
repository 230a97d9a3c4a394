#include "retool/pencil.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>

namespace retool {

MatrixXd HessianPencil::eval(const VectorXd& eta) const {
  if (eta.size() != eta_dim())
    throw DimensionError("HessianPencil::eval: eta dimension mismatch");
  MatrixXd M = H0;
  for (int i = 0; i < eta_dim(); ++i) M -= eta(i) * Q[i];
  if (!M.allFinite()) throw SolverError("HessianPencil::eval: NaN in pencil");
  if (subspace) return subspace->transpose() * M * (*subspace);
  return M;
}

HessianPencil HessianPencil::restricted(const MatrixXd& B) const {
  HessianPencil r;
  r.H0 = B.transpose() * H0 * B;
  for (const auto& q : Q) r.Q.push_back(B.transpose() * q * B);
  return r;
}

double HessianPencil::symmetry_residual() const {
  double r = symmetry_defect(H0);
  for (const auto& q : Q) r = std::max(r, symmetry_defect(q));
  return r;
}

void HessianPencil::validate(double tol) const {
  if (symmetry_residual() > tol)
    throw DimensionError("HessianPencil: matrices not symmetric");
  for (const auto& q : Q)
    if (q.rows() != H0.rows() || q.cols() != H0.cols())
      throw DimensionError("HessianPencil: Q block has wrong shape");
  if (subspace && subspace->rows() != H0.rows())
    throw DimensionError("HessianPencil: subspace has wrong row count");
}

EigResult eig_sym(const MatrixXd& M, const std::optional<MatrixXd>& subspace) {
  const double scale = M.size() > 0 ? M.cwiseAbs().maxCoeff() : 0.0;
  if (symmetry_defect(M) > 1e-12 * std::max(1.0, scale))
    throw DimensionError("eig_sym: input not symmetric");
  MatrixXd A = subspace ? MatrixXd(subspace->transpose() * M * (*subspace)) : M;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(A);
  if (es.info() != Eigen::Success) throw SolverError("eig_sym: eigensolver failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

std::string to_string(Definiteness d) {
  switch (d) {
    case Definiteness::PositiveDefinite: return "PositiveDefinite";
    case Definiteness::NegativeDefinite: return "NegativeDefinite";
    case Definiteness::Indefinite: return "Indefinite";
    default: return "Inconclusive";
  }
}

EtaBox EtaBox::cube(int k, double halfwidth) {
  EtaBox b;
  b.lo = VectorXd::Constant(k, -halfwidth);
  b.hi = VectorXd::Constant(k, halfwidth);
  return b;
}

EtaBox EtaBox::point(const VectorXd& eta) { return EtaBox{eta, eta}; }

namespace {

double lambda_min_at(const HessianPencil& p, const VectorXd& eta) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(p.eval(eta),
                                             Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

struct OptResult {
  VectorXd eta;
  double value;
  int iterations;
};

// Maximize the concave map eta -> lambda_min(H(eta)) over the box.
OptResult maximize_lambda_min(const HessianPencil& p, const EtaBox& box,
                              std::uint64_t seed) {
  const int k = p.eta_dim();
  if (k == 0) return {VectorXd(0), lambda_min_at(p, VectorXd(0)), 0};
  const double span = (box.hi - box.lo).cwiseAbs().maxCoeff();
  const double xtol = std::max(1e-12, 1e-12 * span);

  if (k == 1) {
    int iters = 0;
    double fbest = 0.0;
    VectorXd eta(1);
    auto f = [&](double x) {
      VectorXd e(1);
      e << x;
      return lambda_min_at(p, e);
    };
    eta(0) = golden_max(f, box.lo(0), box.hi(0), xtol, &fbest, &iters);
    return {eta, fbest, iters};
  }

  // coordinate ascent with golden-section line searches, restarted; random
  // directions escape the non-smooth ridges of lambda_min where coordinate
  // moves stall (concavity makes any ascent direction sufficient)
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  OptResult best{VectorXd::Zero(k), -std::numeric_limits<double>::infinity(), 0};
  const int restarts = 8;

  auto line_search = [&](VectorXd& eta, const VectorXd& dir, double& fcur, int& iters) {
    double t_lo = -std::numeric_limits<double>::infinity();
    double t_hi = std::numeric_limits<double>::infinity();
    for (int i = 0; i < k; ++i) {
      if (dir(i) == 0.0) continue;
      double a = (box.lo(i) - eta(i)) / dir(i);
      double b = (box.hi(i) - eta(i)) / dir(i);
      if (a > b) std::swap(a, b);
      t_lo = std::max(t_lo, a);
      t_hi = std::min(t_hi, b);
    }
    if (!(t_hi > t_lo)) return false;
    auto f = [&](double t) { return lambda_min_at(p, eta + t * dir); };
    int it = 0;
    double fv = 0.0;
    const double t_star = golden_max(f, t_lo, t_hi, xtol, &fv, &it);
    iters += it;
    if (fv > fcur + 1e-14 * std::max(1.0, std::abs(fcur))) {
      eta += t_star * dir;
      for (int i = 0; i < k; ++i) eta(i) = std::clamp(eta(i), box.lo(i), box.hi(i));
      fcur = std::max(fv, lambda_min_at(p, eta));
      return true;
    }
    return false;
  };

  for (int r = 0; r < restarts; ++r) {
    VectorXd eta(k);
    for (int i = 0; i < k; ++i) {
      if (r == 0) {
        eta(i) = 0.5 * (box.lo(i) + box.hi(i));
      } else {
        std::uniform_real_distribution<double> u(box.lo(i), box.hi(i));
        eta(i) = u(rng);
      }
    }
    double fcur = lambda_min_at(p, eta);
    int iters = 0;
    for (int round = 0; round < 40; ++round) {
      bool improved = false;
      for (int i = 0; i < k; ++i)
        improved |= line_search(eta, VectorXd::Unit(k, i), fcur, iters);
      if (!improved) {
        for (int d = 0; d < 8 * k && !improved; ++d) {
          VectorXd dir(k);
          for (int i = 0; i < k; ++i) dir(i) = gauss(rng);
          if (dir.norm() == 0.0) continue;
          dir.normalize();
          improved = line_search(eta, dir, fcur, iters);
        }
      }
      if (!improved) break;
    }
    if (fcur > best.value) best = {eta, fcur, iters};
    best.iterations += iters;
  }
  return best;
}

bool on_boundary(const VectorXd& eta, const EtaBox& box) {
  for (int i = 0; i < eta.size(); ++i) {
    const double w = std::max(1.0, box.hi(i) - box.lo(i));
    if (std::abs(eta(i) - box.lo(i)) < 1e-6 * w ||
        std::abs(eta(i) - box.hi(i)) < 1e-6 * w)
      return true;
  }
  return false;
}

}  // namespace

StabilityCertificate certify_definite(const HessianPencil& p, const EtaBox& box,
                                      std::uint64_t seed) {
  p.validate();
  if (box.lo.size() != p.eta_dim() || box.hi.size() != p.eta_dim())
    throw DimensionError("certify_definite: box dimension mismatch");
  for (int i = 0; i < box.lo.size(); ++i)
    if (!(box.lo(i) <= box.hi(i)) || !std::isfinite(box.lo(i)) || !std::isfinite(box.hi(i)))
      throw DimensionError("certify_definite: empty or infinite box");

  StabilityCertificate cert;
  cert.subspace_dim = p.dim();
  MatrixXd H0r = p.subspace ? MatrixXd(p.subspace->transpose() * p.H0 * (*p.subspace))
                            : p.H0;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es0(H0r, Eigen::EigenvaluesOnly);
  const double h0norm = es0.eigenvalues().cwiseAbs().maxCoeff();
  const double tol = 1e-8 * h0norm;
  cert.tolerance = tol;

  // positive side: maximize lambda_min
  OptResult pos = maximize_lambda_min(p, box, seed);
  // negative side: minimize lambda_max == -max lambda_min of the negated pencil
  HessianPencil neg;
  neg.H0 = -p.H0;
  for (const auto& q : p.Q) neg.Q.push_back(-q);
  neg.subspace = p.subspace;
  OptResult negr = maximize_lambda_min(neg, box, seed + 1);

  // recompute at the optimizers (certificate invariant)
  auto lmin = [&](const VectorXd& e) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(p.eval(e), Eigen::EigenvaluesOnly);
    return es.eigenvalues();
  };
  const double m_pos = lmin(pos.eta)(0);
  const VectorXd ev_neg = lmin(negr.eta);
  const double m_neg = ev_neg(ev_neg.size() - 1);

  cert.lambda_min_opt = m_pos;
  cert.lambda_max_opt = m_neg;
  cert.eta_star_pos = pos.eta;
  cert.eta_star_neg = negr.eta;
  cert.iterations = pos.iterations + negr.iterations;

  const bool pd = m_pos > tol;
  const bool nd = m_neg < -tol;
  // when both signs certify, the larger margin wins; near-ties go negative
  const double tie_eps = 1e-12 * std::max(1.0, std::abs(m_pos));
  if (pd && (!nd || m_pos > -m_neg + tie_eps)) {
    cert.verdict = Definiteness::PositiveDefinite;
    cert.eta_star = pos.eta;
    cert.margin = m_pos;
  } else if (nd) {
    cert.verdict = Definiteness::NegativeDefinite;
    cert.eta_star = negr.eta;
    cert.margin = m_neg;
  } else if (m_pos < -tol && m_neg > tol) {
    cert.verdict = Definiteness::Indefinite;
    cert.eta_star = pos.eta;
    cert.margin = m_pos;
  } else {
    cert.verdict = Definiteness::Inconclusive;
    cert.eta_star = std::abs(m_pos) <= std::abs(m_neg) ? pos.eta : negr.eta;
    cert.margin = std::abs(m_pos) <= std::abs(m_neg) ? m_pos : m_neg;
  }
  cert.at_box_boundary = on_boundary(cert.eta_star, box);
  return cert;
}

std::vector<ProfileRow> lambda_min_profile(const HessianPencil& p,
                                           const std::vector<VectorXd>& grid) {
  std::vector<ProfileRow> rows;
  rows.reserve(grid.size());
  for (const auto& eta : grid) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(p.eval(eta), Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    rows.push_back({eta, ev(0), ev(ev.size() - 1)});
  }
  return rows;
}

}  // namespace retool

#include "retool/models.hpp"

#include <algorithm>
#include <cmath>

namespace retool {

// ---------------------------------------------------------------------------
// Lagrange top

void TopParams::validate() const {
  if (I1 <= 0 || I3 <= 0) throw DimensionError("TopParams: moments of inertia must be positive");
}

TopHessian lagrange_top_hessian(const TopParams& p, double eta) {
  p.validate();
  TopHessian h;
  const double lam = p.lambda;
  // sign of the lambda^2 term fixed by three independent consistency checks:
  // the determinant quadratic in eta/lambda, the along-branch determinant
  // family, and the classical fast-top threshold all require +.
  h.A = -p.m * p.g * p.l + (lam * lam * p.I3 / (2.0 * p.I1)) * (2.0 * p.I3 - p.I1) -
        eta * lam * p.I3;
  h.B = (lam / (2.0 * p.I1)) * (2.0 * p.I3 - p.I1) - eta;
  h.C = 1.0 / p.I1;
  h.M = MatrixXd::Zero(4, 4);
  h.M(0, 0) = h.M(1, 1) = h.A;
  h.M(2, 2) = h.M(3, 3) = h.C;
  h.M(0, 3) = h.M(3, 0) = h.B;
  h.M(1, 2) = h.M(2, 1) = -h.B;
  return h;
}

MatrixXd lagrange_top_Q(const TopParams& p) {
  // Q = -dM/deta: dA/deta = -lambda I3, dB/deta = -1
  MatrixXd Q = MatrixXd::Zero(4, 4);
  Q(0, 0) = Q(1, 1) = p.lambda * p.I3;
  Q(0, 3) = Q(3, 0) = 1.0;
  Q(1, 2) = Q(2, 1) = -1.0;
  return Q;
}

std::pair<double, double> lagrange_top_sigma(double A, double B, double C) {
  const double t = A + C;
  const double disc = std::sqrt(std::max(0.0, t * t - 4.0 * (A * C - B * B)));
  return {0.5 * (t - disc), 0.5 * (t + disc)};
}

FastTopThreshold fast_top_threshold(const TopParams& p) {
  p.validate();
  return {4.0 * p.g * p.l * p.m * p.I1 / (p.I3 * p.I3), (p.I3 - p.I1) / (2.0 * p.I1)};
}

double sleeping_branch_det(const TopParams& p, double eta, double rho) {
  const double I1 = p.I1, I3 = p.I3, l0 = p.lambda;
  const double u = 2.0 * eta + l0;
  const double quad =
      rho * rho * (2.0 * I3 - I1) +
      rho * (u * I3 * (I1 - I3) - 2.0 * I3 * I3 * l0) -
      (u * u * I1 * I3 * I3 - 2.0 * u * I3 * I3 * I3 * l0 + 4.0 * p.m * p.g * p.l * I3 * I3);
  return quad / (4.0 * I1 * I3 * I3);
}

namespace {

/// Entries of the transported slice family along the sleeping branch:
/// M(rho, eta) has the block structure of lagrange_top_hessian with
/// A = A0(rho) - eta*lambda0*I3 and B = B0(rho) - eta, fitted so that
/// A*C - B^2 reproduces sleeping_branch_det identically.
struct TopBranchCoeffs {
  double A0(const TopParams& p, double rho) const {
    const double det0 = sleeping_branch_det(p, 0.0, rho);
    const double b0 = B0(p, rho);
    return p.I1 * (det0 + b0 * b0);
  }
  double B0(const TopParams& p, double rho) const {
    return 0.5 * (rho * (p.I1 - p.I3) / (2.0 * p.I1 * p.I3) +
                  p.lambda * (2.0 * p.I3 - p.I1) / p.I1);
  }
  double dB0(const TopParams& p) const { return (p.I1 - p.I3) / (4.0 * p.I1 * p.I3); }
  double dA0(const TopParams& p, double rho) const {
    const double I1 = p.I1, I3 = p.I3, l0 = p.lambda;
    const double ddet0 = (2.0 * rho * (2.0 * I3 - I1) + l0 * I3 * (I1 - I3) -
                          2.0 * I3 * I3 * l0) /
                         (4.0 * I1 * I3 * I3);
    return I1 * (ddet0 + 2.0 * B0(p, rho) * dB0(p));
  }
  static MatrixXd assemble(double A, double B, double C) {
    MatrixXd M = MatrixXd::Zero(4, 4);
    M(0, 0) = M(1, 1) = A;
    M(2, 2) = M(3, 3) = C;
    M(0, 3) = M(3, 0) = B;
    M(1, 2) = M(2, 1) = -B;
    return M;
  }
  MatrixXd matrix(const TopParams& p, double rho) const {
    return assemble(A0(p, rho), B0(p, rho), 1.0 / p.I1);
  }
  MatrixXd dmatrix(const TopParams& p, double rho) const {
    return assemble(dA0(p, rho), dB0(p), 0.0);
  }
};

class TopHamiltonian : public SliceHamiltonian {
 public:
  explicit TopHamiltonian(TopParams p) : p_(p) {}

  double value(const VectorXd& rho, const VectorXd& v) const override {
    const double r2 = v.squaredNorm();
    return 0.5 * v.dot(coeffs_.matrix(p_, rho(0)) * v) + 0.25 * p_.quartic * r2 * r2;
  }
  bool gradient(const VectorXd& rho, const VectorXd& v, VectorXd& d_rho,
                VectorXd& d_v) const override {
    d_v = coeffs_.matrix(p_, rho(0)) * v + p_.quartic * v.squaredNorm() * v;
    d_rho = VectorXd::Constant(1, 0.5 * v.dot(coeffs_.dmatrix(p_, rho(0)) * v));
    return true;
  }
  bool hessian_v(const VectorXd& rho, const VectorXd& v, MatrixXd& H) const override {
    H = coeffs_.matrix(p_, rho(0)) +
        p_.quartic * (v.squaredNorm() * MatrixXd::Identity(4, 4) +
                      2.0 * v * v.transpose());
    return true;
  }
  std::string describe() const override { return "lagrange_top"; }

 private:
  TopParams p_;
  TopBranchCoeffs coeffs_;
};

}  // namespace

LocalModel make_lagrange_top(const TopParams& p) {
  p.validate();
  LocalModel m;
  m.name = "lagrange_top";
  m.alg = LieAlgebra::torus(2);
  MatrixXd Bgz(2, 1), Bm(2, 1);
  Bgz << 1, 1;                  // g_z: diagonal circle
  Bm << 0.5, -0.5;              // dual basis vector (1,-1): J_Y = mu + rho*(1,-1)
  m.split = Splitting::make(m.alg, Bgz, MatrixXd::Identity(2, 2), Bm);
  m.mu = VectorXd(2);
  m.mu << p.lambda * p.I3, -p.lambda * p.I3;
  m.dim_mstar = 1;
  m.N_dim = 4;

  // standard diagonal circle action on R^4 = R^2 + R^2
  MatrixXd J2(2, 2);
  J2 << 0, -1, 1, 0;
  MatrixXd A = MatrixXd::Zero(4, 4);
  A.block<2, 2>(0, 0) = J2;
  A.block<2, 2>(2, 2) = J2;
  m.rep.n = 4;
  m.rep.infinitesimal = {A};
  m.rep_mstar.n = 1;  // torus: trivial action on m*
  m.rep_g.n = 2;

  // Omega = -Q A^{-1} makes J_N^{(1,1)} = 1/2 v^T Q v with Q = lagrange_top_Q
  const MatrixXd Q = lagrange_top_Q(p);
  m.Omega = -Q * A.inverse();

  m.hbar = std::make_shared<TopHamiltonian>(p);
  m.params = {{"m", p.m},   {"g", p.g},   {"l", p.l},      {"I1", p.I1},
              {"I3", p.I3}, {"lambda", p.lambda}, {"quartic", p.quartic}};
  m.finalize();
  return m;
}

// ---------------------------------------------------------------------------
// toy model

namespace {

class ToyHamiltonian : public SliceHamiltonian {
 public:
  explicit ToyHamiltonian(std::vector<double> radial) : radial_(std::move(radial)) {}

  double value(const VectorXd& rho, const VectorXd& v) const override {
    double s = 0.5 * (v(0) * v(0) + v(1) * v(1) - v(2) * v(2) - v(3) * v(3));
    const double w = rho.squaredNorm();
    double wk = w;
    for (double c : radial_) {
      s += c * wk;
      wk *= w;
    }
    return s;
  }
  bool gradient(const VectorXd& rho, const VectorXd& v, VectorXd& d_rho,
                VectorXd& d_v) const override {
    d_v = VectorXd(4);
    d_v << v(0), v(1), -v(2), -v(3);
    const double w = rho.squaredNorm();
    double dfdw = 0.0, wk = 1.0;
    for (size_t k = 0; k < radial_.size(); ++k) {
      dfdw += radial_[k] * (k + 1) * wk;
      wk *= w;
    }
    d_rho = 2.0 * dfdw * rho;
    return true;
  }
  bool hessian_v(const VectorXd&, const VectorXd&, MatrixXd& H) const override {
    H = MatrixXd::Zero(4, 4);
    H(0, 0) = H(1, 1) = 1.0;
    H(2, 2) = H(3, 3) = -1.0;
    return true;
  }
  std::string describe() const override { return "toy_so3_s1"; }

  const std::vector<double>& radial() const { return radial_; }

 private:
  std::vector<double> radial_;
};

}  // namespace

LocalModel make_toy_so3_s1(const std::vector<double>& radial_coeffs) {
  LocalModel m;
  m.name = "toy_so3_s1";
  m.alg = LieAlgebra::so3();
  MatrixXd Bgz(3, 1);
  Bgz << 0, 0, 1;
  MatrixXd Bm(3, 2);
  Bm << 1, 0, 0, 1, 0, 0;
  m.split = Splitting::make(m.alg, Bgz, MatrixXd::Identity(3, 3), Bm);
  m.mu = VectorXd::Zero(3);  // G_mu = SO(3) forces mu = 0
  m.dim_mstar = 2;
  m.N_dim = 4;

  MatrixXd Omega = MatrixXd::Zero(4, 4);
  Omega(0, 1) = 1;
  Omega(1, 0) = -1;
  Omega(2, 3) = 1;
  Omega(3, 2) = -1;
  m.Omega = Omega;

  // generator oriented clockwise so that J_N(v) = +1/2 ||v||^2
  MatrixXd K(2, 2);
  K << 0, 1, -1, 0;
  MatrixXd A = MatrixXd::Zero(4, 4);
  A.block<2, 2>(0, 0) = K;
  A.block<2, 2>(2, 2) = K;
  m.rep.n = 4;
  m.rep.infinitesimal = {A};

  // Ad action of G_z = S^1(e3) on g = so(3) and the dual action on m*
  m.rep_g.n = 3;
  m.rep_g.infinitesimal = {m.alg.ad(Bgz.col(0))};
  MatrixXd J2(2, 2);
  J2 << 0, -1, 1, 0;
  m.rep_mstar.n = 2;
  m.rep_mstar.infinitesimal = {J2};

  m.hbar = std::make_shared<ToyHamiltonian>(radial_coeffs);
  for (size_t k = 0; k < radial_coeffs.size(); ++k)
    m.params["f" + std::to_string(k + 1)] = radial_coeffs[k];
  m.finalize();
  return m;
}

// ---------------------------------------------------------------------------
// two point vortices

void VortexParams::validate() const {
  if (Gamma1 == 0 || Gamma2 == 0)
    throw DimensionError("VortexParams: vorticities must be non-zero");
  if (theta <= 0 || theta > M_PI)
    throw DimensionError("VortexParams: theta must lie in (0, pi]");
}

namespace {

/// Exact slice chart for the unequal pair: radius r in N maps to the
/// co-axial configuration
///   x1 = (sin u1 cos(phi), sin u1 sin(phi),  cos u1),
///   x2 = (-sin u2 cos(phi), -sin u2 sin(phi), -cos u2),
/// with sin u1 = G2 t, sin u2 = G1 t and t = t(r) solving
///   G1 c1 - G2 c2 = (G1 - G2)(1 + G1 G2 r^2 / 2),
/// which renders the chart momentum-exact and symplectic.
struct VortexChart {
  double G1, G2;

  double t_max() const { return 1.0 / std::max(std::abs(G1), std::abs(G2)); }

  double J3(double t) const {
    return G1 * std::sqrt(1.0 - G2 * G2 * t * t) - G2 * std::sqrt(1.0 - G1 * G1 * t * t);
  }

  double solve_t(double r) const {
    const double target = (G1 - G2) * (1.0 + 0.5 * G1 * G2 * r * r);
    double lo = 0.0, hi = 0.999999 * t_max();
    // J3 is monotone in t on [0, t_max) with J3(0) = G1 - G2
    auto f = [&](double t) { return J3(t) - target; };
    if (f(hi) * f(lo) > 0)
      throw SolverError("vortex chart: radius outside chart domain");
    double t = std::min(r, hi);
    for (int it = 0; it < 60; ++it) {
      const double ft = f(t);
      const double c1 = std::sqrt(1.0 - G2 * G2 * t * t);
      const double c2 = std::sqrt(1.0 - G1 * G1 * t * t);
      const double df = G1 * G2 * t * (G1 / c2 - G2 / c1);
      double tn = df != 0.0 ? t - ft / df : t;
      if (!(tn > lo && tn < hi)) tn = 0.5 * (lo + hi);
      if (f(tn) == 0.0) return tn;
      if (f(tn) * f(lo) < 0)
        hi = tn;
      else
        lo = tn;
      if (std::abs(tn - t) < 1e-16 * (1.0 + std::abs(t))) return tn;
      t = tn;
    }
    return t;
  }

  void angles(double r, double& u1, double& u2, double& t) const {
    t = solve_t(r);
    u1 = std::asin(G2 * t);
    u2 = std::asin(G1 * t);
  }
};

/// h-bar for the unequal pair through the exact chart; S^1-invariant, so a
/// function F of w = r^2.  Gradient and Hessian from the parametric closed
/// forms, with a series fallback near r = 0.
class VortexHamiltonian : public SliceHamiltonian {
 public:
  VortexHamiltonian(double G1, double G2) : chart_{G1, G2} {
    const double d = G1 - G2;
    const double kappa = G1 * G1 + G1 * G2 + G2 * G2;
    Fp0_ = 0.25 * G1 * G2 * d * d;
    Fpp0_ = G1 * G2 * d * d * (2.0 * kappa + d * d) / 48.0;
  }

  double value(const VectorXd&, const VectorXd& v) const override {
    const double r = v.norm();
    double u1, u2, t;
    chart_.angles(r, u1, u2, t);
    return -chart_.G1 * chart_.G2 * std::log(2.0 + 2.0 * std::cos(u1 - u2));
  }

  bool gradient(const VectorXd&, const VectorXd& v, VectorXd& d_rho,
                VectorXd& d_v) const override {
    d_rho = VectorXd(0);
    d_v = 2.0 * Fprime(v.squaredNorm()) * v;
    return true;
  }

  bool hessian_v(const VectorXd&, const VectorXd& v, MatrixXd& H) const override {
    const double w = v.squaredNorm();
    H = 2.0 * Fprime(w) * MatrixXd::Identity(2, 2) +
        4.0 * Fsecond(w) * v * v.transpose();
    return true;
  }

  std::string describe() const override { return "two_vortices"; }

  double Fprime(double w) const {
    if (w < 1e-10) return Fp0_ + Fpp0_ * w;
    const double r = std::sqrt(w);
    double u1, u2, t;
    chart_.angles(r, u1, u2, t);
    // 2F'(w) I + ... with 2F'(w) = -G1 G2 (G1-G2) tan(Delta/2)/t
    return -0.5 * chart_.G1 * chart_.G2 * (chart_.G1 - chart_.G2) *
           std::tan(0.5 * (u1 - u2)) / t;
  }

  double Fsecond(double w) const {
    if (w < 1e-6) return Fpp0_;
    const double h = 1e-4 * (1.0 + w);
    return (Fprime(w + h) - Fprime(w - h)) / (2.0 * h);
  }

 private:
  VortexChart chart_;
  double Fp0_, Fpp0_;
};

/// Equal vorticities: trivial slice, h-bar lives on m* only.
class EqualVortexHamiltonian : public SliceHamiltonian {
 public:
  explicit EqualVortexHamiltonian(double G) : G_(G) {}
  double value(const VectorXd& rho, const VectorXd&) const override {
    return -G_ * G_ * std::log(4.0 - rho.squaredNorm() / (G_ * G_));
  }
  bool gradient(const VectorXd& rho, const VectorXd&, VectorXd& d_rho,
                VectorXd& d_v) const override {
    d_rho = 2.0 * rho / (4.0 - rho.squaredNorm() / (G_ * G_));
    d_v = VectorXd(0);
    return true;
  }
  bool hessian_v(const VectorXd&, const VectorXd&, MatrixXd& H) const override {
    H = MatrixXd(0, 0);
    return true;
  }
  std::string describe() const override { return "two_vortices_equal"; }

 private:
  double G_;
};

}  // namespace

LocalModel build_vortex_slice(double Gamma1, double Gamma2) {
  if (Gamma1 == 0.0 || Gamma2 == 0.0)
    throw DimensionError("build_vortex_slice: vorticities must be non-zero");
  LocalModel m;
  m.alg = LieAlgebra::so3();
  m.params = {{"Gamma1", Gamma1}, {"Gamma2", Gamma2}};

  MatrixXd Bgz(3, 1);
  Bgz << 0, 0, 1;

  if (Gamma1 != Gamma2) {
    m.name = "two_vortices";
    // g_mu = g_z = span(e3), q = span(e1, e2)
    m.split = Splitting::make(m.alg, Bgz, Bgz);
    m.mu = VectorXd::Zero(3);
    m.mu(2) = Gamma1 - Gamma2;
    m.dim_mstar = 0;
    m.N_dim = 2;
    const double s = Gamma1 * Gamma2 * (Gamma2 - Gamma1);
    m.Omega = MatrixXd::Zero(2, 2);
    m.Omega(0, 1) = s;
    m.Omega(1, 0) = -s;
    MatrixXd J2(2, 2);
    J2 << 0, -1, 1, 0;  // rotation about e3 carries v1 to v2
    m.rep.n = 2;
    m.rep.infinitesimal = {J2};
    m.rep_mstar.n = 0;
    m.rep_g.n = 3;
    m.rep_g.infinitesimal = {m.alg.ad(Bgz.col(0))};
    m.hbar = std::make_shared<VortexHamiltonian>(Gamma1, Gamma2);
  } else {
    m.name = "two_vortices";
    // mu = 0: g_mu = so(3), m = span(e1, e2), N trivial
    MatrixXd Bm(3, 2);
    Bm << 1, 0, 0, 1, 0, 0;
    m.split = Splitting::make(m.alg, Bgz, MatrixXd::Identity(3, 3), Bm);
    m.mu = VectorXd::Zero(3);
    m.dim_mstar = 2;
    m.N_dim = 0;
    m.Omega = MatrixXd(0, 0);
    m.rep.n = 0;
    m.rep.infinitesimal = {MatrixXd(0, 0)};
    MatrixXd J2(2, 2);
    J2 << 0, -1, 1, 0;
    m.rep_mstar.n = 2;
    m.rep_mstar.infinitesimal = {J2};
    m.rep_g.n = 3;
    m.rep_g.infinitesimal = {m.alg.ad(Bgz.col(0))};
    m.hbar = std::make_shared<EqualVortexHamiltonian>(Gamma1);

    // Z2(n) with n = e1: rotation by pi about e1 composed with the swap
    SubgroupSpec z2;
    z2.name = "Z2n";
    z2.on_N.n = 0;
    MatrixXd R(2, 2);
    R << 1, 0, 0, -1;
    z2.on_mstar.n = 2;
    z2.on_mstar.finite = {R};
    z2.on_g.n = 3;
    MatrixXd Rg = MatrixXd::Identity(3, 3);
    Rg(1, 1) = -1;
    Rg(2, 2) = -1;
    z2.on_g.finite = {Rg};
    m.subgroups["Z2n"] = z2;
  }
  m.finalize();
  return m;
}

VortexConfiguration vortex_reconstruct(const LocalModel& m, const VectorXd& v) {
  const double G1 = m.params.at("Gamma1"), G2 = m.params.at("Gamma2");
  if (G1 == G2)
    throw DimensionError("vortex_reconstruct: slice chart exists only for Gamma1 != Gamma2");
  VortexChart chart{G1, G2};
  const double r = v.norm();
  const double phi = r > 0 ? std::atan2(v(1), v(0)) : 0.0;
  double u1, u2, t;
  chart.angles(r, u1, u2, t);
  VortexConfiguration c;
  c.x1 = Vector3d(std::sin(u1) * std::cos(phi), std::sin(u1) * std::sin(phi),
                  std::cos(u1));
  c.x2 = Vector3d(-std::sin(u2) * std::cos(phi), -std::sin(u2) * std::sin(phi),
                  -std::cos(u2));
  return c;
}

Vector3d vortex_velocity(const VortexParams& p) {
  p.validate();
  const Vector3d x1 = Vector3d::UnitZ();
  const Vector3d x2 =
      std::cos(p.theta) * Vector3d::UnitZ() + std::sin(p.theta) * Vector3d::UnitX();
  const Vector3d mu = p.Gamma1 * x1 + p.Gamma2 * x2;
  const double s2 = std::sin(0.5 * p.theta) * std::sin(0.5 * p.theta);
  if (p.theta >= M_PI) return 0.5 * mu;  // antipodal limit
  return mu / (2.0 * s2);
}

void vortex_eom(double Gamma1, double Gamma2, const Vector3d& x1, const Vector3d& x2,
                Vector3d& x1dot, Vector3d& x2dot) {
  const double denom = 1.0 - x1.dot(x2);
  x1dot = Gamma2 * x2.cross(x1) / denom;
  x2dot = Gamma1 * x1.cross(x2) / denom;
}

void vortex_integrate(double Gamma1, double Gamma2, Vector3d& x1, Vector3d& x2,
                      double t_end, double dt) {
  const int steps = static_cast<int>(std::round(t_end / dt));
  Vector3d k1a, k1b, k2a, k2b, k3a, k3b, k4a, k4b;
  for (int s = 0; s < steps; ++s) {
    vortex_eom(Gamma1, Gamma2, x1, x2, k1a, k1b);
    vortex_eom(Gamma1, Gamma2, x1 + 0.5 * dt * k1a, x2 + 0.5 * dt * k1b, k2a, k2b);
    vortex_eom(Gamma1, Gamma2, x1 + 0.5 * dt * k2a, x2 + 0.5 * dt * k2b, k3a, k3b);
    vortex_eom(Gamma1, Gamma2, x1 + dt * k3a, x2 + dt * k3b, k4a, k4b);
    x1 += dt / 6.0 * (k1a + 2.0 * k2a + 2.0 * k3a + k4a);
    x2 += dt / 6.0 * (k1b + 2.0 * k2b + 2.0 * k3b + k4b);
    x1.normalize();
    x2.normalize();
  }
}

}  // namespace retool

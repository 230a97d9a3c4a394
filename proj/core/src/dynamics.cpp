#include "retool/dynamics.hpp"

#include <Eigen/SVD>
#include <cmath>

namespace retool {

BundleField bundle_vector_field(const LocalModel& m, const VectorXd& eta,
                                const BundleState& s) {
  HbarDerivs d = hbar_eta_derivs(m, eta, s.rho, s.v);
  BundleField f;
  f.xi_g = m.split.embed_velocity(d.d_rho, eta);
  VectorXd total = m.split.embed_mstar(s.rho) +
                   m.split.embed_gzstar(momentum_map_N(m, s.v));
  f.rho_dot = m.split.mstar_coords(coad(m.alg, f.xi_g, total));
  f.v_dot = m.N_dim > 0 ? VectorXd(m.Omega_sharp * d.d_N) : VectorXd(0);
  return f;
}

double impliedcond_residual(const LocalModel& m, const VectorXd& eta,
                            const BundleState& s) {
  BundleField f = bundle_vector_field(m, eta, s);
  VectorXd total = m.split.embed_mstar(s.rho) +
                   m.split.embed_gzstar(momentum_map_N(m, s.v));
  VectorXd lhs = m.split.gzstar_coords(coad(m.alg, f.xi_g, total));
  VectorXd rhs = momentum_map_N_tangent(m, s.v, f.v_dot);
  return (lhs - rhs).norm();
}

TrajectoryReport integrate_bundle(const LocalModel& m, const VectorXd& eta,
                                  const BundleState& s0, double t_end, double dt,
                                  int sample_stride) {
  if (dt <= 0.0 || !std::isfinite(t_end))
    throw DimensionError("integrate_bundle: dt must be positive, t_end finite");
  TrajectoryReport rep;
  BundleState s = s0;
  const VectorXd jy0 = momentum_map_Y(m, s.g, s.rho, s.v);
  const VectorXd rho0 = s.rho, v0 = s.v;
  const int steps = static_cast<int>(std::round(t_end / dt));

  // monitors are evaluated every step; full rows stored every sample_stride
  auto monitor = [&](const BundleState& st) {
    VectorXd jy = momentum_map_Y(m, st.g, st.rho, st.v);
    const double drift = (jy - jy0).norm();
    const double impl = impliedcond_residual(m, eta, st);
    const double dev =
        std::sqrt((st.rho - rho0).squaredNorm() + (st.v - v0).squaredNorm());
    rep.max_jy_drift = std::max(rep.max_jy_drift, drift);
    rep.max_impliedcond = std::max(rep.max_impliedcond, impl);
    rep.max_state_deviation = std::max(rep.max_state_deviation, dev);
    rep.max_group_defect = std::max(rep.max_group_defect, st.g.manifold_defect());
    return TrajectorySample{st.t, st.rho, st.v, jy, drift, impl};
  };

  rep.samples.push_back(monitor(s));
  for (int k = 0; k < steps; ++k) {
    BundleState s1 = s;
    BundleField k1 = bundle_vector_field(m, eta, s1);
    BundleState s2 = s;
    s2.rho = s.rho + 0.5 * dt * k1.rho_dot;
    s2.v = s.v + 0.5 * dt * k1.v_dot;
    BundleField k2 = bundle_vector_field(m, eta, s2);
    BundleState s3 = s;
    s3.rho = s.rho + 0.5 * dt * k2.rho_dot;
    s3.v = s.v + 0.5 * dt * k2.v_dot;
    BundleField k3 = bundle_vector_field(m, eta, s3);
    BundleState s4 = s;
    s4.rho = s.rho + dt * k3.rho_dot;
    s4.v = s.v + dt * k3.v_dot;
    BundleField k4 = bundle_vector_field(m, eta, s4);

    s.rho += dt / 6.0 * (k1.rho_dot + 2.0 * k2.rho_dot + 2.0 * k3.rho_dot + k4.rho_dot);
    s.v += dt / 6.0 * (k1.v_dot + 2.0 * k2.v_dot + 2.0 * k3.v_dot + k4.v_dot);
    VectorXd xi_avg = dt / 6.0 * (k1.xi_g + 2.0 * k2.xi_g + 2.0 * k3.xi_g + k4.xi_g);
    s.g = s.g.translated(m.alg, xi_avg);
    if (s.g.kind == GroupKind::SO3) {
      // re-orthonormalize the rotation factor
      Eigen::JacobiSVD<Eigen::Matrix3d> svd(
          s.g.rotation, Eigen::ComputeFullU | Eigen::ComputeFullV);
      s.g.rotation = svd.matrixU() * svd.matrixV().transpose();
    }
    s.t += dt;

    const double norm2 = s.rho.squaredNorm() + s.v.squaredNorm();
    if (!std::isfinite(norm2) || norm2 > 1e12) {
      rep.aborted = true;
      rep.samples.push_back(monitor(s));
      return rep;
    }
    TrajectorySample row = monitor(s);
    if ((k + 1) % sample_stride == 0 || k + 1 == steps) rep.samples.push_back(row);
  }
  return rep;
}

}  // namespace retool

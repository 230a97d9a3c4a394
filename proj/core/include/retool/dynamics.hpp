#ifndef RETOOL_DYNAMICS_HPP
#define RETOOL_DYNAMICS_HPP

#include "retool/model.hpp"

namespace retool {

/// State of the lifted bundle flow on G x m* x N.
struct BundleState {
  GroupElement g;
  VectorXd rho;
  VectorXd v;
  double t = 0.0;
};

struct BundleField {
  VectorXd xi_g;     // g-component in algebra coordinates (left translation applied by caller)
  VectorXd rho_dot;  // m* coordinates
  VectorXd v_dot;    // N coordinates
};

/// Bundle equations with a constant isotropy parameter eta in g_z:
///   g-dot   = g . (D_{m*} h-bar + eta)
///   rho-dot = Proj_{m*} ad*_{D_{m*} h-bar + eta} (rho + J_N(v))
///   v-dot   = Omega^sharp (D_N h-bar - d J_N^eta)
BundleField bundle_vector_field(const LocalModel& m, const VectorXd& eta,
                                const BundleState& s);

/// Residual of the conserved-projection identity
/// Proj_{g_z*} ad*_xi (rho + J_N(v)) = T_v J_N (v-dot); identically zero for
/// the exact field, so a nonzero value flags an implementation error.
double impliedcond_residual(const LocalModel& m, const VectorXd& eta,
                            const BundleState& s);

struct TrajectorySample {
  double t;
  VectorXd rho;
  VectorXd v;
  VectorXd jy;
  double jy_drift;
  double impliedcond;
};

struct TrajectoryReport {
  std::vector<TrajectorySample> samples;
  double max_jy_drift = 0.0;
  double max_impliedcond = 0.0;
  double max_state_deviation = 0.0;  // max ||(rho,v)(t) - (rho,v)(0)||
  double max_group_defect = 0.0;
  bool aborted = false;  // blow-up guard tripped, report is partial
};

/// Classical RK4 on (rho, v) with the group factor advanced by the exact
/// exponential of the RK4-averaged algebra velocity, then re-orthonormalized.
/// Records the J_Y drift and the impliedcond residual per step.
TrajectoryReport integrate_bundle(const LocalModel& m, const VectorXd& eta,
                                  const BundleState& s0, double t_end, double dt,
                                  int sample_stride = 100);

}  // namespace retool

#endif

#include "retool/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "retool/bifurcation.hpp"
#include "retool/dynamics.hpp"
#include "retool/io.hpp"
#include "retool/models.hpp"
#include "retool/version.hpp"

namespace retool {
namespace cli {

using ordered_json = nlohmann::ordered_json;

namespace {

struct AxisSpec {
  std::string name;
  double lo = 0.0, hi = 0.0;
  int n = 1;
};

AxisSpec parse_axis(const std::string& s) {
  // "name=a:b:n"
  AxisSpec ax;
  const auto eq = s.find('=');
  if (eq == std::string::npos) throw CLI::ValidationError("axis", "expected name=a:b:n");
  ax.name = s.substr(0, eq);
  const std::string rest = s.substr(eq + 1);
  std::stringstream ss(rest);
  std::string tok;
  std::vector<std::string> parts;
  while (std::getline(ss, tok, ':')) parts.push_back(tok);
  if (parts.size() != 3) throw CLI::ValidationError("axis", "expected name=a:b:n");
  ax.lo = std::stod(parts[0]);
  ax.hi = std::stod(parts[1]);
  ax.n = std::stoi(parts[2]);
  if (ax.n < 1 || !(ax.hi >= ax.lo))
    throw CLI::ValidationError("axis", "need n >= 1 and b >= a");
  return ax;
}

std::vector<double> axis_values(const AxisSpec& ax) {
  std::vector<double> v;
  if (ax.n == 1) {
    v.push_back(ax.lo);
    return v;
  }
  for (int i = 0; i < ax.n; ++i)
    v.push_back(ax.lo + (ax.hi - ax.lo) * i / (ax.n - 1));
  return v;
}

std::map<std::string, double> parse_params(const std::string& s) {
  std::map<std::string, double> out;
  if (s.empty()) return out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos)
      throw CLI::ValidationError("--params", "expected key=value[,key=value...]");
    out[item.substr(0, eq)] = std::stod(item.substr(eq + 1));
  }
  return out;
}

VectorXd parse_vector(const std::string& s) {
  std::vector<double> vals;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) vals.push_back(std::stod(item));
  VectorXd v(vals.size());
  for (size_t i = 0; i < vals.size(); ++i) v(i) = vals[i];
  return v;
}

ordered_json vec_json(const VectorXd& v) {
  ordered_json a = ordered_json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

ordered_json checks_json(const std::vector<HypothesisCheck>& checks) {
  ordered_json a = ordered_json::array();
  for (const auto& c : checks) {
    ordered_json j;
    j["name"] = c.name;
    j["passed"] = c.passed;
    j["detail"] = c.detail;
    a.push_back(j);
  }
  return a;
}

struct ReportWriter {
  ordered_json report;
  std::string out_path;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  ReportWriter(const std::string& subcommand, const LocalModel* m, std::uint64_t seed,
               std::string out)
      : out_path(std::move(out)) {
    report["schema_version"] = 1;
    ordered_json tool;
    tool["name"] = "retool";
    tool["version"] = kVersion;
    report["tool"] = tool;
    report["subcommand"] = subcommand;
    if (m) {
      ordered_json jm;
      jm["name"] = m->name;
      ordered_json params = ordered_json::object();
      for (const auto& [k, v] : m->params) params[k] = v;
      jm["params"] = params;
      report["model"] = jm;
    }
    report["seed"] = seed;
  }

  int finish(int code = 0) {
    const auto dt = std::chrono::steady_clock::now() - start;
    report["wall_time_s"] =
        std::chrono::duration_cast<std::chrono::microseconds>(dt).count() * 1e-6;
    const std::string text = report.dump(2) + "\n";
    if (out_path.empty()) {
      std::cout << text;
    } else {
      std::ofstream f(out_path);
      f << text;
    }
    return code;
  }

  int fail_hypothesis(const HypothesisError& e) {
    ordered_json err;
    err["hypothesis"] = e.hypothesis;
    err["message"] = e.what();
    report["error"] = err;
    std::cerr << "hypothesis check failed [" << e.hypothesis << "]: " << e.what()
              << "\n";
    return finish(2);
  }
};

ordered_json certificate_json(const StabilityCertificate& c) {
  ordered_json j;
  j["verdict"] = to_string(c.verdict);
  j["eta_star"] = vec_json(c.eta_star);
  j["margin"] = c.margin;
  j["lambda_min_opt"] = c.lambda_min_opt;
  j["lambda_max_opt"] = c.lambda_max_opt;
  j["iterations"] = c.iterations;
  j["tolerance"] = c.tolerance;
  j["at_box_boundary"] = c.at_box_boundary;
  j["subspace_dim"] = c.subspace_dim;
  return j;
}

ordered_json repoint_json(const REPoint& p) {
  ordered_json j;
  j["rho"] = vec_json(p.rho);
  j["v"] = vec_json(p.v);
  j["eta"] = vec_json(p.eta);
  j["xi"] = vec_json(p.xi);
  j["r1_norm"] = p.r1_norm;
  j["r2_norm"] = p.r2_norm;
  j["converged"] = p.converged;
  return j;
}

ordered_json branch_json(const Branch& br) {
  ordered_json j;
  j["subgroup"] = br.subgroup;
  j["all_converged"] = br.all_converged;
  j["origin_node"] = br.origin_node;
  j["hypothesis_checks"] = checks_json(br.hypothesis_checks);
  if (br.manifold_dimension > 0) j["manifold_dimension"] = br.manifold_dimension;
  ordered_json nodes = ordered_json::array();
  for (const auto& n : br.nodes) {
    ordered_json nj;
    nj["offsets"] = n.offsets;
    nj["point"] = repoint_json(n.point);
    nj["jy"] = vec_json(n.jy);
    nj["eigenvalues"] = vec_json(n.eigenvalues);
    nj["k_fixes_point"] = n.k_fixes_point;
    nj["stabilizer_gen_count"] = n.stabilizer_gen_count;
    nj["converged"] = n.converged;
    if (!n.diagnostic.empty()) nj["diagnostic"] = n.diagnostic;
    if (n.symplectic_checked) nj["symplectic_det"] = n.symplectic_det;
    nodes.push_back(nj);
  }
  j["nodes"] = nodes;
  return j;
}

void write_csv(const std::string& path, const std::string& content) {
  if (path.empty()) {
    std::cout << content;
  } else {
    std::ofstream f(path);
    f << content;
  }
}

int env_threads() {
  const char* t = std::getenv("RETOOL_THREADS");
  if (!t) return 1;
  const int n = std::atoi(t);
  return n > 0 ? n : 1;
}

// ---------------------------------------------------------------------------
// subcommand payloads

int run_stability(const LocalModel& m, const VectorXd& rho, double box_lo, double box_hi,
                  std::uint64_t seed, ReportWriter& rw) {
  HessianPencil p = pencil_at(m, rho);
  EtaBox box;
  box.lo = VectorXd::Constant(m.gz_dim(), box_lo);
  box.hi = VectorXd::Constant(m.gz_dim(), box_hi);
  StabilityCertificate cert = certify_definite(p, box, seed);
  rw.report["result"] = certificate_json(cert);
  return rw.finish(0);
}

int run_scan(LocalModel m, const std::map<std::string, double>& base_params,
             const AxisSpec& axis, double box_lo, double box_hi, std::uint64_t seed,
             const std::string& csv_path, ReportWriter& rw) {
  std::ostringstream csv;
  csv.precision(17);
  if (axis.name == "eta" || axis.name == "eta1") {
    HessianPencil p = pencil_at(m, VectorXd::Zero(m.dim_mstar));
    std::vector<VectorXd> grid;
    for (double x : axis_values(axis)) {
      VectorXd e = VectorXd::Zero(m.gz_dim());
      e(0) = x;
      grid.push_back(e);
    }
    auto rows = lambda_min_profile(p, grid);
    for (int i = 0; i < m.gz_dim(); ++i) csv << "eta_" << i + 1 << ",";
    csv << "lambda_min,lambda_max\n";
    for (const auto& r : rows) {
      for (int i = 0; i < r.eta.size(); ++i) csv << r.eta(i) << ",";
      csv << r.lambda_min << "," << r.lambda_max << "\n";
    }
    rw.report["result"] = {{"rows", rows.size()}, {"kind", "eta-profile"}};
  } else {
    // parameter scan: re-instantiate the model per grid value
    const auto values = axis_values(axis);
    std::vector<StabilityCertificate> certs(values.size());
    const int nthreads = std::min<int>(env_threads(), static_cast<int>(values.size()));
    auto work = [&](int tid) {
      for (size_t i = tid; i < values.size(); i += nthreads) {
        std::map<std::string, double> params = base_params;
        params[axis.name] = values[i];
        LocalModel mi = make_builtin_model(m.name, params);
        HessianPencil p = pencil_at(mi, VectorXd::Zero(mi.dim_mstar));
        EtaBox box;
        box.lo = VectorXd::Constant(mi.gz_dim(), box_lo);
        box.hi = VectorXd::Constant(mi.gz_dim(), box_hi);
        certs[i] = certify_definite(p, box, seed);
      }
    };
    if (nthreads > 1) {
      std::vector<std::thread> pool;
      for (int t = 0; t < nthreads; ++t) pool.emplace_back(work, t);
      for (auto& th : pool) th.join();
    } else {
      work(0);
    }
    csv << axis.name << ",verdict,margin,eta_star_1,lambda_min_opt,lambda_max_opt\n";
    for (size_t i = 0; i < values.size(); ++i) {
      csv << values[i] << "," << to_string(certs[i].verdict) << "," << certs[i].margin
          << "," << (certs[i].eta_star.size() ? certs[i].eta_star(0) : 0.0) << ","
          << certs[i].lambda_min_opt << "," << certs[i].lambda_max_opt << "\n";
    }
    rw.report["result"] = {{"rows", values.size()}, {"kind", "parameter-scan"}};
  }
  write_csv(csv_path, csv.str());
  return rw.finish(0);
}

int run_branch(const LocalModel& m, const std::string& subgroup,
               const std::vector<AxisSpec>& axes, const VectorXd& eta0, bool orbit_type,
               const std::string& csv_path, ReportWriter& rw) {
  auto it = m.subgroups.find(subgroup);
  if (it == m.subgroups.end())
    throw SchemaError("--subgroup", "model does not define subgroup '" + subgroup + "'");
  const SubgroupSpec& K = it->second;

  REPoint base = solve_re(m, VectorXd::Zero(m.dim_mstar), eta0,
                          VectorXd::Zero(m.N_dim), &K);
  Branch br;
  if (orbit_type) {
    std::vector<double> rho_axis;
    for (const auto& ax : axes)
      if (ax.name.rfind("rho", 0) == 0) rho_axis = axis_values(ax);
    if (rho_axis.empty()) throw SchemaError("--grid", "orbit-type branch needs a rho axis");
    br = orbit_type_branch(m, base, rho_axis);
  } else {
    GridSpec grid;
    for (const auto& ax : axes) {
      if (ax.name.rfind("rho", 0) == 0)
        grid.rho_axes.push_back(axis_values(ax));
      else if (ax.name.rfind("eta", 0) == 0)
        grid.eta_axes.push_back(axis_values(ax));
      else
        throw SchemaError("--grid", "axis must be named rho* or eta*");
    }
    br = continue_branch(m, base, K, grid);
  }
  rw.report["result"] = branch_json(br);
  rw.report["hypothesis_checks"] = checks_json(br.hypothesis_checks);

  std::ostringstream csv;
  csv.precision(17);
  csv << "offset_1,converged";
  const int neig = m.N_dim;
  for (int i = 0; i < neig; ++i) csv << ",eig_" << i + 1;
  csv << "\n";
  for (const auto& n : br.nodes) {
    csv << (n.offsets.empty() ? 0.0 : n.offsets[0]) << "," << (n.converged ? 1 : 0);
    for (int i = 0; i < neig; ++i)
      csv << "," << (n.eigenvalues.size() == neig ? n.eigenvalues(i) : 0.0);
    csv << "\n";
  }
  if (!csv_path.empty()) write_csv(csv_path, csv.str());

  // hypothesis failures surface as exit code 2
  for (const auto& c : br.hypothesis_checks) {
    if (!c.passed && !br.all_converged) {
      std::cerr << "hypothesis check failed [" << c.name << "]: " << c.detail << "\n";
      ordered_json err;
      err["hypothesis"] = c.name;
      err["message"] = c.detail;
      rw.report["error"] = err;
      return rw.finish(2);
    }
  }
  return rw.finish(0);
}

int run_bifurcate(const LocalModel& m, const std::string& along, double w_lo, double w_hi,
                  const std::vector<double>& y_norms, const std::string& csv_path,
                  ReportWriter& rw) {
  std::vector<HypothesisCheck> checks;
  BifurcationReport rep;
  const SubgroupSpec& L = m.subgroups.at("e");

  if (m.name == "two_vortices" && along == "eta") {
    if (m.N_dim != 2)
      throw SchemaError("--model",
                        "bifurcate needs the non-trivial slice (Gamma1 != Gamma2)");
    HessianPencil p = pencil_at(m, VectorXd::Zero(m.dim_mstar));
    auto sigma = [&](double x) {
      VectorXd e = VectorXd::Constant(1, x);
      Eigen::SelfAdjointEigenSolver<MatrixXd> es(p.eval(e), Eigen::EigenvaluesOnly);
      return es.eigenvalues()(0);
    };
    CrossingResult cr = detect_crossing(sigma, w_lo, w_hi);
    if (!cr.found())
      throw HypothesisError("crossing", "no eigenvalue crossing in the window");
    checks.push_back({"crossing", true,
                      "sigma crosses 0 at eta = " + std::to_string(cr.location())});
    const double eta_star = cr.location();
    KernelData kd = kernel_analysis(m, p, VectorXd::Constant(1, eta_star), L);
    ParameterChart chart;
    chart.lo = w_lo;
    chart.hi = w_hi;
    chart.rho = [&](double) { return VectorXd::Zero(m.dim_mstar); };
    chart.eta = [](double x) { return VectorXd::Constant(1, x); };
    rep = lyapunov_schmidt(m, chart, kd, L, y_norms);
    rep.crossing_param = eta_star;
  } else if (m.name == "lagrange_top" && along == "rho") {
    TopParams tp;
    tp.m = m.params.at("m");
    tp.g = m.params.at("g");
    tp.l = m.params.at("l");
    tp.I1 = m.params.at("I1");
    tp.I3 = m.params.at("I3");
    tp.lambda = m.params.at("lambda");
    tp.quartic = m.params.at("quartic");
    HessianPencil p = pencil_at(m, VectorXd::Zero(1));
    // re-base at a formally stable velocity before walking to Sym(2,0)
    StabilityCertificate cert = certify_definite(p, EtaBox::cube(1, 1e3));
    if (cert.verdict != Definiteness::PositiveDefinite &&
        cert.verdict != Definiteness::NegativeDefinite)
      throw HypothesisError("formal-stability",
                            "bifurcate: base point is not formally stable (verdict " +
                                to_string(cert.verdict) + ")");
    checks.push_back({"formal-stability", true,
                      "definite at eta = " + std::to_string(cert.eta_star(0))});
    MatrixXd block(4, 2);
    block.setZero();
    block(0, 0) = 1.0;
    block(3, 1) = 1.0;  // the (v1, v4) block of the top family
    GenericCrossing gc = generic_crossing_search(p, block, cert.eta_star,
                                                 VectorXd::Ones(1));
    checks.insert(checks.end(), gc.hypothesis_checks.begin(),
                  gc.hypothesis_checks.end());
    const double eta_tot = gc.eta_total(0);
    auto sigma = [&](double rho) { return sleeping_branch_det(tp, eta_tot, rho); };
    CrossingResult cr = detect_crossing(sigma, w_lo, w_hi);
    if (!cr.found())
      throw HypothesisError("crossing",
                            "no crossing of the branch determinant in the window");
    checks.push_back({"crossing", true,
                      "branch determinant crosses 0 at rho = " +
                          std::to_string(cr.location())});
    KernelData kd = kernel_analysis(m, p, gc.eta_total, L);
    ParameterChart chart;
    chart.lo = w_lo;
    chart.hi = w_hi;
    chart.rho = [](double x) { return VectorXd::Constant(1, x); };
    chart.eta = [eta_tot](double) { return VectorXd::Constant(1, eta_tot); };
    rep = lyapunov_schmidt(m, chart, kd, L, y_norms);
    rep.crossing_param = cr.location();
  } else {
    throw SchemaError("--along",
                      "bifurcate supports two_vortices --along eta and lagrange_top "
                      "--along rho");
  }

  rep.hypothesis_checks.insert(rep.hypothesis_checks.begin(), checks.begin(),
                               checks.end());
  ordered_json j;
  j["crossing_param"] = rep.crossing_param;
  j["kernel_dim"] = rep.kernel.kernel.cols();
  j["cohomogeneity_one"] = rep.kernel.cohomogeneity_one;
  j["kernel_detail"] = rep.kernel.detail;
  j["n_converged"] = rep.n_converged;
  ordered_json pts = ordered_json::array();
  for (const auto& bp : rep.points) {
    ordered_json pj;
    pj["y_norm"] = bp.y_norm;
    pj["lambda"] = bp.lambda;
    pj["skipped"] = bp.skipped;
    if (bp.skipped) {
      pj["reason"] = bp.reason;
    } else {
      pj["point"] = repoint_json(bp.point);
      pj["trivial_isotropy"] = bp.trivial_isotropy;
      pj["L_fixes_point"] = bp.L_fixes_point;
    }
    pts.push_back(pj);
  }
  j["points"] = pts;
  rw.report["result"] = j;
  rw.report["hypothesis_checks"] = checks_json(rep.hypothesis_checks);

  std::ostringstream csv;
  csv.precision(17);
  csv << "y_norm,lambda,residual\n";
  for (const auto& bp : rep.points)
    if (!bp.skipped)
      csv << bp.y_norm << "," << bp.lambda << ","
          << std::max(bp.point.r1_norm, bp.point.r2_norm) << "\n";
  if (!csv_path.empty()) write_csv(csv_path, csv.str());
  return rw.finish(0);
}

int run_integrate(const LocalModel& m, double eta_val, double t_end, double dt,
                  const VectorXd& rho0, const VectorXd& v0, int stride,
                  const std::string& csv_path, ReportWriter& rw) {
  BundleState s0;
  s0.g = GroupElement::identity(m.alg);
  s0.rho = rho0;
  s0.v = v0;
  VectorXd eta = VectorXd::Constant(m.gz_dim(), eta_val);
  TrajectoryReport tr = integrate_bundle(m, eta, s0, t_end, dt, stride);

  std::ostringstream csv;
  csv.precision(17);
  csv << "t";
  for (int i = 0; i < m.dim_mstar; ++i) csv << ",rho_" << i + 1;
  for (int i = 0; i < m.N_dim; ++i) csv << ",v_" << i + 1;
  csv << ",jy_drift,impliedcond_residual\n";
  for (const auto& row : tr.samples) {
    csv << row.t;
    for (int i = 0; i < row.rho.size(); ++i) csv << "," << row.rho(i);
    for (int i = 0; i < row.v.size(); ++i) csv << "," << row.v(i);
    csv << "," << row.jy_drift << "," << row.impliedcond << "\n";
  }
  write_csv(csv_path, csv.str());

  ordered_json j;
  j["max_jy_drift"] = tr.max_jy_drift;
  j["max_impliedcond_residual"] = tr.max_impliedcond;
  j["max_state_deviation"] = tr.max_state_deviation;
  j["max_group_defect"] = tr.max_group_defect;
  j["aborted"] = tr.aborted;
  j["samples"] = tr.samples.size();
  rw.report["result"] = j;
  return rw.finish(0);
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"retool: stability, persistence and bifurcation of relative "
               "equilibria in the symplectic-slice local model"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string model_name, params_str, out_path, csv_path;
  std::uint64_t seed = 12345;
  app.add_option("--seed", seed, "seed for stochastic restarts")->capture_default_str();

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--model", model_name, "built-in model name or JSON file")
        ->required();
    sub->add_option("--params", params_str, "model parameters key=value,...");
    sub->add_option("--out", out_path, "write the JSON report here (default stdout)");
  };

  // stability
  auto* sub_stab = app.add_subcommand("stability", "definiteness certificate");
  add_common(sub_stab);
  double box_lo = -1e3, box_hi = 1e3;
  std::string eta_box_str, rho_str;
  sub_stab->add_option("--eta-box", eta_box_str, "a,b bounds of the eta search box");
  sub_stab->add_option("--rho", rho_str, "base point in m* coordinates (default 0)");

  // scan
  auto* sub_scan = app.add_subcommand("scan", "eta profile or parameter scan CSV");
  add_common(sub_scan);
  std::string over_str;
  sub_scan->add_option("--over", over_str, "axis name=a:b:n")->required();
  sub_scan->add_option("--csv", csv_path, "CSV output path (default stdout)");
  std::string scan_eta_box;
  sub_scan->add_option("--eta-box", scan_eta_box, "a,b bounds of the eta search box");

  // branch
  auto* sub_branch = app.add_subcommand("branch", "continue a branch over a grid");
  add_common(sub_branch);
  std::string subgroup = "Gz";
  std::vector<std::string> grid_strs;
  double eta0 = 0.0;
  bool orbit_type = false;
  sub_branch->add_option("--subgroup", subgroup, "subgroup K name")->capture_default_str();
  sub_branch->add_option("--grid", grid_strs, "axis name=a:b:n (repeatable)")
      ->required();
  sub_branch->add_option("--eta0", eta0, "base isotropy parameter");
  sub_branch->add_flag("--orbit-type", orbit_type,
                       "constant-orbit-type branch with symplecticity data");
  sub_branch->add_option("--csv", csv_path, "eigenvalue-trace CSV path");

  // bifurcate
  auto* sub_bif = app.add_subcommand("bifurcate", "locate crossings and bifurcating points");
  add_common(sub_bif);
  std::string along = "eta", window_str = "-1,1", ygrid_str;
  sub_bif->add_option("--along", along, "parameter axis: eta | rho")
      ->capture_default_str();
  sub_bif->add_option("--window", window_str, "a,b parameter window")
      ->capture_default_str();
  sub_bif->add_option("--y-grid", ygrid_str, "kernel magnitudes a:b:n (geometric)");
  sub_bif->add_option("--csv", csv_path, "(y_norm, lambda, residual) CSV path");

  // integrate
  auto* sub_int = app.add_subcommand("integrate", "integrate the bundle equations");
  add_common(sub_int);
  double eta_val = 0.0, t_end = 10.0, dt = 1e-3;
  int stride = 100;
  std::string rho0_str, v0_str;
  sub_int->add_option("--eta", eta_val, "constant isotropy parameter")
      ->capture_default_str();
  sub_int->add_option("--t-end", t_end, "final time")->capture_default_str();
  sub_int->add_option("--dt", dt, "time step")->capture_default_str();
  sub_int->add_option("--rho0", rho0_str, "initial rho (comma separated)");
  sub_int->add_option("--v0", v0_str, "initial v (comma separated)");
  sub_int->add_option("--stride", stride, "sample every k-th step")
      ->capture_default_str();
  sub_int->add_option("--csv", csv_path, "trajectory CSV path (default stdout)");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;  // usage errors exit 1; --help exits 0
  }

  try {
    std::map<std::string, double> params = parse_params(params_str);
    LocalModel m = load_model(model_name, params);

    if (sub_stab->parsed()) {
      if (!eta_box_str.empty()) {
        VectorXd b = parse_vector(eta_box_str);
        if (b.size() != 2) throw SchemaError("--eta-box", "expected a,b");
        box_lo = b(0);
        box_hi = b(1);
      }
      VectorXd rho = rho_str.empty() ? VectorXd::Zero(m.dim_mstar)
                                     : parse_vector(rho_str);
      ReportWriter rw("stability", &m, seed, out_path);
      try {
        return run_stability(m, rho, box_lo, box_hi, seed, rw);
      } catch (const HypothesisError& e) {
        return rw.fail_hypothesis(e);
      }
    }
    if (sub_scan->parsed()) {
      if (!scan_eta_box.empty()) {
        VectorXd b = parse_vector(scan_eta_box);
        if (b.size() != 2) throw SchemaError("--eta-box", "expected a,b");
        box_lo = b(0);
        box_hi = b(1);
      }
      AxisSpec axis = parse_axis(over_str);
      ReportWriter rw("scan", &m, seed, out_path);
      try {
        return run_scan(m, params, axis, box_lo, box_hi, seed, csv_path, rw);
      } catch (const HypothesisError& e) {
        return rw.fail_hypothesis(e);
      }
    }
    if (sub_branch->parsed()) {
      std::vector<AxisSpec> axes;
      for (const auto& s : grid_strs) axes.push_back(parse_axis(s));
      VectorXd eta0v = VectorXd::Constant(m.gz_dim(), eta0);
      ReportWriter rw("branch", &m, seed, out_path);
      try {
        return run_branch(m, subgroup, axes, eta0v, orbit_type, csv_path, rw);
      } catch (const HypothesisError& e) {
        return rw.fail_hypothesis(e);
      }
    }
    if (sub_bif->parsed()) {
      VectorXd w = parse_vector(window_str);
      if (w.size() != 2) throw SchemaError("--window", "expected a,b");
      std::vector<double> y_norms;
      if (ygrid_str.empty()) {
        for (int i = 0; i < 8; ++i)
          y_norms.push_back(1e-3 * std::pow(100.0, i / 7.0));
      } else {
        AxisSpec ax = parse_axis("y=" + ygrid_str);
        for (int i = 0; i < ax.n; ++i)
          y_norms.push_back(ax.lo * std::pow(ax.hi / ax.lo, ax.n == 1 ? 0.0
                                             : static_cast<double>(i) / (ax.n - 1)));
      }
      ReportWriter rw("bifurcate", &m, seed, out_path);
      try {
        return run_bifurcate(m, along, w(0), w(1), y_norms, csv_path, rw);
      } catch (const HypothesisError& e) {
        return rw.fail_hypothesis(e);
      }
    }
    if (sub_int->parsed()) {
      VectorXd rho0 = rho0_str.empty() ? VectorXd::Zero(m.dim_mstar)
                                       : parse_vector(rho0_str);
      VectorXd v0 = v0_str.empty() ? VectorXd::Zero(m.N_dim) : parse_vector(v0_str);
      if (rho0.size() != m.dim_mstar) throw SchemaError("--rho0", "wrong length");
      if (v0.size() != m.N_dim) throw SchemaError("--v0", "wrong length");
      ReportWriter rw("integrate", &m, seed, out_path);
      try {
        return run_integrate(m, eta_val, t_end, dt, rho0, v0, stride, csv_path, rw);
      } catch (const HypothesisError& e) {
        return rw.fail_hypothesis(e);
      }
    }
  } catch (const SchemaError& e) {
    std::cerr << "error in '" << e.field << "': " << e.what() << "\n";
    return 1;
  } catch (const HypothesisError& e) {
    std::cerr << "hypothesis check failed [" << e.hypothesis << "]: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args);
}

}  // namespace cli
}  // namespace retool

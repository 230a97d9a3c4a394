#include "retool/io.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "retool/models.hpp"

namespace retool {

using ordered_json = nlohmann::ordered_json;

namespace {

TopParams top_params_from(const std::map<std::string, double>& params) {
  TopParams p;
  for (const auto& [k, v] : params) {
    if (k == "m") p.m = v;
    else if (k == "g") p.g = v;
    else if (k == "l") p.l = v;
    else if (k == "I1") p.I1 = v;
    else if (k == "I3") p.I3 = v;
    else if (k == "lambda") p.lambda = v;
    else if (k == "quartic") p.quartic = v;
    else throw SchemaError("params." + k, "unknown lagrange_top parameter: " + k);
  }
  return p;
}

MatrixXd matrix_from(const ordered_json& j, const std::string& field) {
  if (!j.is_array()) throw SchemaError(field, field + ": expected a matrix (array of rows)");
  const int rows = static_cast<int>(j.size());
  int cols = rows > 0 ? static_cast<int>(j[0].size()) : 0;
  MatrixXd M(rows, cols);
  for (int i = 0; i < rows; ++i) {
    if (static_cast<int>(j[i].size()) != cols)
      throw SchemaError(field, field + ": ragged rows");
    for (int k = 0; k < cols; ++k) M(i, k) = j[i][k].get<double>();
  }
  return M;
}

VectorXd vector_from(const ordered_json& j, const std::string& field) {
  if (!j.is_array()) throw SchemaError(field, field + ": expected an array");
  VectorXd v(j.size());
  for (size_t i = 0; i < j.size(); ++i) v(i) = j[i].get<double>();
  return v;
}

ordered_json matrix_to(const MatrixXd& M) {
  ordered_json rows = ordered_json::array();
  for (int i = 0; i < M.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (int j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(row);
  }
  return rows;
}

ordered_json vector_to(const VectorXd& v) {
  ordered_json a = ordered_json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

LieAlgebra algebra_from(const ordered_json& j) {
  if (j.is_string()) {
    const std::string name = j.get<std::string>();
    if (name == "so3") return LieAlgebra::so3();
    if (name == "t2") return LieAlgebra::torus(2);
    if (name.rfind("abelian:", 0) == 0)
      return LieAlgebra::abelian(std::stoi(name.substr(8)));
    throw SchemaError("algebra", "unknown algebra name: " + name);
  }
  if (!j.contains("dim")) throw SchemaError("algebra.dim", "algebra.dim missing");
  const int n = j.at("dim").get<int>();
  if (!j.contains("c")) throw SchemaError("algebra.c", "structure constants missing");
  std::vector<MatrixXd> ad(n, MatrixXd::Zero(n, n));
  const auto& c = j.at("c");
  if (static_cast<int>(c.size()) != n)
    throw SchemaError("algebra.c", "structure constants have wrong outer size");
  for (int i = 0; i < n; ++i)
    for (int jj = 0; jj < n; ++jj)
      for (int k = 0; k < n; ++k) ad[i](k, jj) = c[i][jj][k].get<double>();
  MatrixXd ip = j.contains("inner_product")
                    ? matrix_from(j.at("inner_product"), "algebra.inner_product")
                    : MatrixXd(MatrixXd::Identity(n, n));
  std::vector<std::string> labels;
  if (j.contains("labels"))
    for (const auto& l : j.at("labels")) labels.push_back(l.get<std::string>());
  GroupKind kind = GroupKind::None;
  if (j.contains("realization")) {
    const std::string r = j.at("realization").get<std::string>();
    kind = r == "so3" ? GroupKind::SO3 : r == "torus" ? GroupKind::Torus : GroupKind::None;
  }
  LieAlgebra alg(std::move(ad), std::move(ip), std::move(labels), kind);
  if (alg.antisymmetry_residual() > 1e-12)
    throw SchemaError("algebra.c", "structure constants are not antisymmetric");
  if (alg.jacobi_residual() > 1e-12)
    throw SchemaError("algebra.c", "structure constants violate the Jacobi identity");
  return alg;
}

ordered_json algebra_to(const LieAlgebra& alg) {
  ordered_json j;
  j["dim"] = alg.dim();
  ordered_json c = ordered_json::array();
  for (int i = 0; i < alg.dim(); ++i) {
    ordered_json ci = ordered_json::array();
    for (int jj = 0; jj < alg.dim(); ++jj) {
      ordered_json cij = ordered_json::array();
      for (int k = 0; k < alg.dim(); ++k) cij.push_back(alg.c(i, jj, k));
      ci.push_back(cij);
    }
    c.push_back(ci);
  }
  j["c"] = c;
  j["inner_product"] = matrix_to(alg.inner_product());
  j["labels"] = alg.labels();
  j["realization"] = alg.realization() == GroupKind::SO3
                         ? "so3"
                         : alg.realization() == GroupKind::Torus ? "torus" : "none";
  return j;
}

GroupRep rep_from(const ordered_json& j, int n, const std::string& field) {
  GroupRep r;
  r.n = n;
  if (j.contains("infinitesimal"))
    for (const auto& a : j.at("infinitesimal"))
      r.infinitesimal.push_back(matrix_from(a, field + ".infinitesimal"));
  if (j.contains("finite"))
    for (const auto& a : j.at("finite"))
      r.finite.push_back(matrix_from(a, field + ".finite"));
  return r;
}

ordered_json rep_to(const GroupRep& r) {
  ordered_json j;
  ordered_json inf = ordered_json::array();
  for (const auto& a : r.infinitesimal) inf.push_back(matrix_to(a));
  ordered_json fin = ordered_json::array();
  for (const auto& a : r.finite) fin.push_back(matrix_to(a));
  j["infinitesimal"] = inf;
  j["finite"] = fin;
  return j;
}

}  // namespace

bool is_builtin_model(const std::string& name) {
  return name == "lagrange_top" || name == "two_vortices" || name == "toy_so3_s1";
}

LocalModel make_builtin_model(const std::string& name,
                              const std::map<std::string, double>& params) {
  if (name == "lagrange_top") return make_lagrange_top(top_params_from(params));
  if (name == "two_vortices") {
    double g1 = 2.0, g2 = 1.0;
    for (const auto& [k, v] : params) {
      if (k == "Gamma1") g1 = v;
      else if (k == "Gamma2") g2 = v;
      else throw SchemaError("params." + k, "unknown two_vortices parameter: " + k);
    }
    return build_vortex_slice(g1, g2);
  }
  if (name == "toy_so3_s1") {
    std::vector<double> radial;
    for (const auto& [k, v] : params) {
      if (k.rfind("f", 0) == 0) {
        const size_t idx = std::stoul(k.substr(1));
        if (radial.size() < idx) radial.resize(idx, 0.0);
        radial[idx - 1] = v;
      } else {
        throw SchemaError("params." + k, "unknown toy_so3_s1 parameter: " + k);
      }
    }
    return make_toy_so3_s1(radial);
  }
  throw SchemaError("model", "unknown built-in model: " + name);
}

LocalModel parse_model_json(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const std::exception& e) {
    throw SchemaError("(root)", std::string("model file is not valid JSON: ") + e.what());
  }
  if (j.contains("builtin")) {
    std::map<std::string, double> params;
    if (j.contains("params"))
      for (auto it = j.at("params").begin(); it != j.at("params").end(); ++it)
        params[it.key()] = it.value().get<double>();
    return make_builtin_model(j.at("builtin").get<std::string>(), params);
  }

  LocalModel m;
  if (!j.contains("algebra")) throw SchemaError("algebra", "algebra missing");
  m.alg = algebra_from(j.at("algebra"));
  if (!j.contains("splitting") || !j.at("splitting").contains("gz"))
    throw SchemaError("splitting.gz", "splitting.gz missing");
  MatrixXd Bgz = matrix_from(j.at("splitting").at("gz"), "splitting.gz");
  MatrixXd Bgmu = j.at("splitting").contains("gmu")
                      ? matrix_from(j.at("splitting").at("gmu"), "splitting.gmu")
                      : MatrixXd(MatrixXd::Identity(m.alg.dim(), m.alg.dim()));
  std::optional<MatrixXd> Bm, Bq;
  if (j.at("splitting").contains("m"))
    Bm = matrix_from(j.at("splitting").at("m"), "splitting.m");
  if (j.at("splitting").contains("q"))
    Bq = matrix_from(j.at("splitting").at("q"), "splitting.q");
  m.split = Splitting::make(m.alg, Bgz, Bgmu, Bm, Bq);

  if (!j.contains("mu")) throw SchemaError("mu", "mu missing");
  m.mu = vector_from(j.at("mu"), "mu");
  if (!j.contains("dim_mstar")) throw SchemaError("dim_mstar", "dim_mstar missing");
  m.dim_mstar = j.at("dim_mstar").get<int>();
  if (!j.contains("N_dim")) throw SchemaError("N_dim", "N_dim missing");
  m.N_dim = j.at("N_dim").get<int>();
  m.Omega = j.contains("omega") ? matrix_from(j.at("omega"), "omega")
                                : MatrixXd(0, 0);
  if (j.contains("generators")) {
    m.rep = rep_from(j.at("generators"), m.N_dim, "generators");
  } else {
    m.rep.n = m.N_dim;
  }
  if (j.contains("generators_mstar"))
    m.rep_mstar = rep_from(j.at("generators_mstar"), m.dim_mstar, "generators_mstar");
  else
    m.rep_mstar.n = m.dim_mstar;
  if (j.contains("generators_g"))
    m.rep_g = rep_from(j.at("generators_g"), m.alg.dim(), "generators_g");
  else
    m.rep_g.n = m.alg.dim();

  if (!j.contains("hamiltonian")) throw SchemaError("hamiltonian", "hamiltonian missing");
  const auto& jh = j.at("hamiltonian");
  if (jh.contains("builtin")) {
    std::map<std::string, double> params;
    if (jh.contains("params"))
      for (auto it = jh.at("params").begin(); it != jh.at("params").end(); ++it)
        params[it.key()] = it.value().get<double>();
    LocalModel donor = make_builtin_model(jh.at("builtin").get<std::string>(), params);
    if (donor.dim_mstar != m.dim_mstar || donor.N_dim != m.N_dim)
      throw SchemaError("hamiltonian.builtin",
                        "built-in hamiltonian dimensions do not match the slice data");
    m.hbar = donor.hbar;
    m.params = params;
  } else if (jh.contains("poly")) {
    std::vector<PolynomialHamiltonian::Monomial> terms;
    for (const auto& t : jh.at("poly")) {
      PolynomialHamiltonian::Monomial mo;
      mo.coeff = t.at("coeff").get<double>();
      for (const auto& p : t.at("powers")) mo.powers.push_back(p.get<int>());
      terms.push_back(mo);
    }
    m.hbar = std::make_shared<PolynomialHamiltonian>(m.dim_mstar, m.N_dim, terms);
  } else {
    throw SchemaError("hamiltonian", "hamiltonian needs either 'builtin' or 'poly'");
  }
  if (j.contains("name")) m.name = j.at("name").get<std::string>();
  try {
    m.finalize();
  } catch (const DimensionError& e) {
    throw SchemaError("(model)", e.what());
  }
  return m;
}

LocalModel load_model(const std::string& name_or_path,
                      const std::map<std::string, double>& params) {
  if (is_builtin_model(name_or_path)) return make_builtin_model(name_or_path, params);
  std::ifstream in(name_or_path);
  if (!in)
    throw SchemaError("model", "model is neither a built-in name nor a readable file: " +
                                   name_or_path);
  std::stringstream ss;
  ss << in.rdbuf();
  LocalModel m = parse_model_json(ss.str());
  if (!params.empty()) {
    // parameter overrides only make sense for built-in models
    for (auto& [k, v] : m.params) {
      auto it = params.find(k);
      if (it != params.end()) v = it->second;
    }
    if (is_builtin_model(m.name)) {
      std::map<std::string, double> merged = m.params;
      for (const auto& [k, v] : params) merged[k] = v;
      return make_builtin_model(m.name, merged);
    }
  }
  return m;
}

std::string serialize_model(const LocalModel& m, int indent) {
  ordered_json j;
  if (is_builtin_model(m.name)) {
    j["builtin"] = m.name;
    ordered_json params;
    for (const auto& [k, v] : m.params) params[k] = v;
    j["params"] = params;
    return j.dump(indent);
  }
  j["name"] = m.name;
  j["algebra"] = algebra_to(m.alg);
  ordered_json split;
  split["gz"] = matrix_to(m.split.basis_gz());
  split["m"] = matrix_to(m.split.basis_m());
  split["q"] = matrix_to(m.split.basis_q());
  MatrixXd Bgmu(m.alg.dim(), m.split.dim_gz() + m.split.dim_m());
  Bgmu << m.split.basis_gz(), m.split.basis_m();
  split["gmu"] = matrix_to(Bgmu);
  j["splitting"] = split;
  j["mu"] = vector_to(m.mu);
  j["dim_mstar"] = m.dim_mstar;
  j["N_dim"] = m.N_dim;
  j["omega"] = matrix_to(m.Omega);
  j["generators"] = rep_to(m.rep);
  j["generators_mstar"] = rep_to(m.rep_mstar);
  j["generators_g"] = rep_to(m.rep_g);
  ordered_json jh;
  const auto* poly = dynamic_cast<const PolynomialHamiltonian*>(m.hbar.get());
  if (poly) {
    ordered_json terms = ordered_json::array();
    for (const auto& t : poly->terms()) {
      ordered_json jt;
      jt["coeff"] = t.coeff;
      jt["powers"] = t.powers;
      terms.push_back(jt);
    }
    jh["poly"] = terms;
  } else {
    jh["builtin"] = m.hbar->describe();
    ordered_json params;
    for (const auto& [k, v] : m.params) params[k] = v;
    jh["params"] = params;
  }
  j["hamiltonian"] = jh;
  return j.dump(indent);
}

}  // namespace retool

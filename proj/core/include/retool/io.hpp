#ifndef RETOOL_IO_HPP
#define RETOOL_IO_HPP

#include <map>
#include <string>

#include "retool/model.hpp"

namespace retool {

/// Thrown on malformed model files; `field` names the offending entry.
struct SchemaError : std::runtime_error {
  std::string field;
  SchemaError(std::string f, const std::string& what)
      : std::runtime_error(what), field(std::move(f)) {}
};

/// Builds one of the named built-in models ("lagrange_top", "two_vortices",
/// "toy_so3_s1") with parameter overrides.
LocalModel make_builtin_model(const std::string& name,
                              const std::map<std::string, double>& params);

bool is_builtin_model(const std::string& name);

/// Parses a model from JSON text: either {"builtin": name, "params": {...}}
/// or a fully explicit slice model (algebra, splitting, omega, generators,
/// hamiltonian).  Algebra accepts "so3", "t2", "abelian:<n>" or an explicit
/// {"dim", "c", "inner_product", "labels"} object.
LocalModel parse_model_json(const std::string& text);

/// Loads a model by built-in name or from a JSON file path; params override.
LocalModel load_model(const std::string& name_or_path,
                      const std::map<std::string, double>& params);

/// Serializes a model (explicit data plus the builtin descriptor when one
/// applies); parse_model_json inverts it.
std::string serialize_model(const LocalModel& m, int indent = 2);

}  // namespace retool

#endif

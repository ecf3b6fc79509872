#pragma once

#include <cstdint>
#include <map>
#include <string>

#include <json.hpp>

#include "lps/catalog.hpp"

namespace lps {

/// Named tolerances with spec defaults, overridable from the command line.
struct ToleranceMap {
  std::map<std::string, double> values;
  static ToleranceMap defaults();
  double get(const std::string& name) const;
  void set(const std::string& name, double value);
};

/// 17 significant digits; round-trips doubles exactly.
std::string format_double17(double v);

/// One self-describing input document (UTF-8, JSON syntax) holding algebras,
/// subgroups, charts, gauge charts, loops, functions and the run block.
/// References of the form "builtin:NAME" resolve against the catalog.
class Document {
 public:
  static Document load(const std::string& path);
  static Document from_json(nlohmann::json j);

  const nlohmann::json& raw() const { return raw_; }
  const nlohmann::json& run() const;

  AlgebraPtr algebra(const std::string& ref) const;
  SubgroupSpec subgroup(const std::string& ref) const;
  ConnectionChart chart(const std::string& ref) const;
  GaugeChart gauge_chart(const std::string& ref) const;
  LoopPath loop(const std::string& ref) const;
  Poly poly_spec(const nlohmann::json& spec, int nvars) const;

 private:
  nlohmann::json raw_;
};

nlohmann::json algebra_to_json(const LieAlgebraSpec& a);
AlgebraPtr algebra_from_json(const nlohmann::json& j);

struct RunConfig {
  std::string command;
  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed = 2026;
  ToleranceMap tolerances = ToleranceMap::defaults();
  bool quiet = false;
};

/// Executes one CLI command: writes <out>/<command>.json (deterministic for
/// a fixed config and seed), <out>/<command>.meta.json (timestamps) and any
/// flat tables. Returns the process exit code: 0 on success, 2 when an
/// assertion misses its tolerance; input errors throw InputError and are
/// mapped to exit 1 by the caller.
int run_command(const RunConfig& rc);

const std::vector<std::string>& command_names();

}  // namespace lps

#include "lps/io.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "lps/linalg.hpp"

namespace lps {

namespace fs = std::filesystem;
using nlohmann::json;

ToleranceMap ToleranceMap::defaults() {
  ToleranceMap t;
  t.values = {
      {"jacobi_structure", 1e-12},  {"rep_consistency", 1e-10},
      {"pairing", 1e-12},           {"exp_inverse", 1e-10},
      {"zero_stratum", 1e-8},       {"invariance_inf", 1e-6},
      {"invariance_disc", 1e-8},    {"bracket_antisym", 1e-12},
      {"flow_annihilator", 1e-7},   {"casimir_drift", 1e-6},
      {"curvature_match", 1e-5},    {"bianchi", 1e-4},
      {"hol_membership", 1e-7},     {"as_span", 1e-6},
      {"stokes", 1e-6},             {"lift_refine", 1e-7},
      {"gauge_pp", 1e-10},          {"gauge_jacobi", 1e-8},
      {"free_regression", 1e-8},    {"leaf_consistency", 1e-6},
      {"energy_drift", 1e-8},       {"fiber_casimir_drift", 1e-8},
  };
  return t;
}

double ToleranceMap::get(const std::string& name) const {
  auto it = values.find(name);
  if (it == values.end()) throw InputError("unknown tolerance: " + name);
  return it->second;
}

void ToleranceMap::set(const std::string& name, double value) {
  if (value <= 0.0) throw InputError("tolerances must be positive");
  values[name] = value;
}

std::string format_double17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Document

namespace {

Eigen::MatrixXd matrix_from_json(const json& j, int rows, int cols) {
  if (!j.is_array()) throw InputError("expected an array for a matrix");
  Eigen::MatrixXd m(rows, cols);
  if (static_cast<int>(j.size()) == rows && j.at(0).is_array()) {
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) m(r, c) = j.at(r).at(c).get<double>();
    return m;
  }
  if (static_cast<int>(j.size()) != rows * cols)
    throw InputError("matrix payload has wrong element count");
  for (int r = 0; r < rows; ++r)   // row-major flat layout
    for (int c = 0; c < cols; ++c) m(r, c) = j.at(r * cols + c).get<double>();
  return m;
}

Eigen::VectorXd vector_from_json(const json& j) {
  Eigen::VectorXd v(j.size());
  for (size_t i = 0; i < j.size(); ++i)
    v(static_cast<int>(i)) = j.at(i).get<double>();
  return v;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (int i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (int r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(row);
  }
  return out;
}

bool is_builtin_ref(const std::string& ref, std::string* name) {
  if (ref.rfind("builtin:", 0) == 0) {
    *name = ref.substr(8);
    return true;
  }
  return false;
}

}  // namespace

Document Document::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config document: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed config document: ") + e.what());
  }
  return from_json(std::move(j));
}

Document Document::from_json(json j) {
  Document d;
  d.raw_ = std::move(j);
  return d;
}

const json& Document::run() const {
  static const json empty = json::object();
  if (!raw_.contains("run")) return empty;
  return raw_.at("run");
}

json algebra_to_json(const LieAlgebraSpec& a) {
  json j;
  j["dim"] = a.dim();
  j["labels"] = a.labels();
  json c = json::array();
  for (const auto& ck : a.structure()) c.push_back(matrix_to_json(ck));
  j["c"] = c;
  if (a.has_rep()) {
    json rep;
    rep["dim"] = a.rep_dim();
    json mats = json::array();
    for (const auto& m : a.rep()) mats.push_back(matrix_to_json(m));
    rep["matrices"] = mats;
    j["rep"] = rep;
  }
  if (a.has_metric()) j["metric"] = matrix_to_json(a.metric());
  j["orthogonal"] = a.orthogonal_group();
  j["name"] = a.name();
  return j;
}

AlgebraPtr algebra_from_json(const json& j) {
  const int dim = j.at("dim").get<int>();
  std::vector<Eigen::MatrixXd> c;
  for (const auto& ck : j.at("c")) c.push_back(matrix_from_json(ck, dim, dim));
  std::vector<std::string> labels;
  if (j.contains("labels")) labels = j.at("labels").get<std::vector<std::string>>();
  std::vector<Eigen::MatrixXd> rep;
  if (j.contains("rep")) {
    const int d = j.at("rep").at("dim").get<int>();
    for (const auto& m : j.at("rep").at("matrices"))
      rep.push_back(matrix_from_json(m, d, d));
  }
  Eigen::MatrixXd metric;
  if (j.contains("metric"))
    metric = matrix_from_json(j.at("metric"), dim, dim);
  const bool orth = j.value("orthogonal", true);
  return std::make_shared<LieAlgebraSpec>(std::move(c), std::move(labels),
                                          std::move(rep), std::move(metric),
                                          orth, j.value("name", ""));
}

AlgebraPtr Document::algebra(const std::string& ref) const {
  std::string name;
  if (is_builtin_ref(ref, &name)) {
    for (const auto& a : algebra_catalog())
      if (a->name() == name) return a;
    if (catalog_has(name)) return catalog_entry(name).algebra;
    throw InputError("unknown builtin algebra: " + name);
  }
  if (!raw_.contains("algebras") || !raw_.at("algebras").contains(ref))
    throw InputError("config defines no algebra named " + ref);
  return algebra_from_json(raw_.at("algebras").at(ref));
}

SubgroupSpec Document::subgroup(const std::string& ref) const {
  std::string name;
  if (is_builtin_ref(ref, &name)) {
    if (catalog_has(name) && catalog_entry(name).subgroup)
      return *catalog_entry(name).subgroup;
    throw InputError("unknown builtin subgroup: " + name);
  }
  if (!raw_.contains("subgroups") || !raw_.at("subgroups").contains(ref))
    throw InputError("config defines no subgroup named " + ref);
  const json& j = raw_.at("subgroups").at(ref);
  AlgebraPtr alg = algebra(j.at("algebra").get<std::string>());
  const int k = alg->dim();
  Eigen::MatrixXd basis(k, 0);
  if (j.contains("basis_indices")) {
    const auto idx = j.at("basis_indices").get<std::vector<int>>();
    basis.resize(k, static_cast<int>(idx.size()));
    basis.setZero();
    for (size_t c = 0; c < idx.size(); ++c) {
      if (idx[c] < 0 || idx[c] >= k)
        throw InputError("subgroup basis index out of range");
      basis(idx[c], static_cast<int>(c)) = 1.0;
    }
  } else if (j.contains("basis")) {
    const auto& rows = j.at("basis");
    basis.resize(k, static_cast<int>(rows.size()));
    for (size_t c = 0; c < rows.size(); ++c)
      basis.col(static_cast<int>(c)) = vector_from_json(rows.at(c));
  }
  std::vector<GroupElement> gens;
  if (j.contains("generators")) {
    const int d = alg->rep_dim();
    for (const auto& gj : j.at("generators")) {
      if (gj.is_object() && gj.contains("exp")) {
        gens.push_back(alg->exponential(vector_from_json(gj.at("exp"))));
      } else {
        gens.push_back({matrix_from_json(gj, d, d), 1e-8});
      }
    }
  }
  return SubgroupSpec(alg, basis, gens, ref);
}

Poly Document::poly_spec(const json& spec, int nvars) const {
  Poly p(nvars);
  const json& terms = spec.is_array() ? spec : spec.at("terms");
  for (const auto& t : terms) {
    const auto powers = t.at("powers").get<std::vector<int>>();
    if (static_cast<int>(powers.size()) != nvars)
      throw InputError("polynomial term has wrong power count");
    p.add_term(powers, t.at("coeff").get<double>());
  }
  return p;
}

ConnectionChart Document::chart(const std::string& ref) const {
  std::string name;
  if (is_builtin_ref(ref, &name)) {
    if (name == "flat2") return chart_flat2();
    if (name == "abelian_b1") return chart_abelian_b1();
    if (name == "hopf") return chart_hopf();
    if (name == "so3_poly") return chart_so3_poly();
    if (name == "flat3_u1") return chart_flat3_u1();
    if (catalog_has(name) && catalog_entry(name).chart)
      return *catalog_entry(name).chart;
    throw InputError("unknown builtin chart: " + name);
  }
  if (!raw_.contains("charts") || !raw_.at("charts").contains(ref))
    throw InputError("config defines no chart named " + ref);
  const json& j = raw_.at("charts").at(ref);
  if (j.contains("builtin")) return chart(std::string("builtin:") +
                                          j.at("builtin").get<std::string>());
  const int n = j.at("base_dim").get<int>();
  AlgebraPtr alg = algebra(j.at("algebra").get<std::string>());
  Box box;
  box.lo = vector_from_json(j.at("box").at("lo"));
  box.hi = vector_from_json(j.at("box").at("hi"));
  std::vector<std::vector<Poly>> coeffs;
  for (const auto& row : j.at("coefficients")) {
    std::vector<Poly> prow;
    for (const auto& entry : row) prow.push_back(poly_spec(entry, n));
    coeffs.push_back(std::move(prow));
  }
  return chart_from_polys(n, alg, coeffs, box, ref);
}

GaugeChart Document::gauge_chart(const std::string& ref) const {
  std::string name;
  if (is_builtin_ref(ref, &name)) {
    if (catalog_has(name) && catalog_entry(name).gauge)
      return *catalog_entry(name).gauge;
    throw InputError("unknown builtin gauge chart: " + name);
  }
  if (!raw_.contains("gauge_charts") || !raw_.at("gauge_charts").contains(ref))
    throw InputError("config defines no gauge chart named " + ref);
  const json& j = raw_.at("gauge_charts").at(ref);
  if (j.contains("builtin"))
    return gauge_chart(std::string("builtin:") +
                       j.at("builtin").get<std::string>());
  AlgebraPtr alg = algebra(j.at("algebra").get<std::string>());
  SubgroupSpec sub = subgroup(j.at("subgroup").get<std::string>());
  std::optional<ConnectionChart> base;
  std::optional<CurvatureTable> curv;
  std::vector<int> coupling;
  if (j.contains("base")) {
    base = chart(j.at("base").get<std::string>());
    curv = curvature_structure(*base);
    coupling = j.at("coupling").get<std::vector<int>>();
  }
  IsotropyClass cls;
  cls.stabilizer_dim = j.at("declared_class").at("stabilizer_dim").get<int>();
  cls.component_order =
      j.at("declared_class").at("component_order").get<int>();
  return GaugeChart(alg, sub, base, curv, coupling, cls, ref);
}

LoopPath Document::loop(const std::string& ref) const {
  if (!raw_.contains("loops") || !raw_.at("loops").contains(ref))
    throw InputError("config defines no loop named " + ref);
  const json& j = raw_.at("loops").at(ref);
  const std::string kind = j.at("kind").get<std::string>();
  const int refinement = j.value("refinement", 64);
  if (kind == "square")
    return loop_square(vector_from_json(j.at("center")),
                       j.at("side").get<double>(), j.value("i", 0),
                       j.value("j", 1), refinement);
  if (kind == "circle")
    return loop_circle(vector_from_json(j.at("center")),
                       j.at("radius").get<double>(), j.value("i", 0),
                       j.value("j", 1), refinement);
  if (kind == "spherical_triangle") {
    const auto& v = j.at("vertices");
    auto vec3 = [&](int i) {
      Eigen::VectorXd w = vector_from_json(v.at(i));
      return Eigen::Vector3d(w(0), w(1), w(2));
    };
    return loop_spherical_triangle(vec3(0), vec3(1), vec3(2), refinement);
  }
  if (kind == "points") {
    const auto& rows = j.at("samples");
    const int n = static_cast<int>(vector_from_json(rows.at(0)).size());
    Eigen::MatrixXd pts(n, rows.size());
    for (size_t c = 0; c < rows.size(); ++c)
      pts.col(static_cast<int>(c)) = vector_from_json(rows.at(c));
    return loop_from_samples(pts);
  }
  throw InputError("unknown loop kind: " + kind);
}

// ---------------------------------------------------------------------------
// Command engine

namespace {

struct Assertion {
  std::string name;
  double value = 0.0;
  double tol = 0.0;
  bool pass = false;
};

json assertion_json(const Assertion& a) {
  json j;
  j["name"] = a.name;
  j["value"] = a.value;
  j["tolerance"] = a.tol;
  j["pass"] = a.pass;
  return j;
}

struct CommandContext {
  const RunConfig& rc;
  Document doc;
  json record;
  std::vector<Assertion> assertions;

  void check(const std::string& name, double value,
             const std::string& tol_name) {
    Assertion a{name, value, rc.tolerances.get(tol_name), false};
    a.pass = value <= a.tol;
    assertions.push_back(a);
  }
  void check_flag(const std::string& name, bool ok) {
    assertions.push_back({name, ok ? 0.0 : 1.0, 0.5, ok});
  }
};

std::string run_string(const CommandContext& ctx, const std::string& key,
                       const std::string& fallback) {
  return ctx.doc.run().value(key, fallback);
}

GaugeState state_from_run(const CommandContext& ctx, const GaugeChart& chart) {
  if (ctx.doc.run().contains("state")) {
    const json& js = ctx.doc.run().at("state");
    GaugeState s;
    s.x = vector_from_json(js.at("x"));
    s.p = vector_from_json(js.at("p"));
    s.mu = vector_from_json(js.at("mu"));
    return s;
  }
  return default_state(chart);
}

// Default Hamiltonian on a gauge chart: harmonic base part plus a fixed
// combination of the invariant fiber generators.
GaugeField default_gauge_hamiltonian(const GaugeChart& chart) {
  const int n = chart.n(), N = chart.state_dim();
  Poly p(N);
  for (int i = 0; i < n; ++i) {
    p += Poly::variable(N, n + i) * Poly::variable(N, n + i) * 0.5;
    p += Poly::variable(N, i) * Poly::variable(N, i) * 0.5;
  }
  auto gens = fiber_generators_packed(chart);
  for (size_t jg = 0; jg < gens.size(); ++jg)
    p += gens[jg] * (0.3 / (1.0 + static_cast<double>(jg)));
  return GaugeField(p, true);
}

void cmd_catalog(CommandContext& ctx) {
  json entries = json::array();
  for (const auto& e : catalog()) {
    json je;
    je["name"] = e.name;
    je["summary"] = e.summary;
    je["has_subgroup"] = static_cast<bool>(e.subgroup);
    je["has_chart"] = static_cast<bool>(e.chart);
    je["has_gauge_chart"] = static_cast<bool>(e.gauge);
    json exp = json::array();
    for (const auto& ev : e.expected) {
      json jv;
      jv["name"] = ev.name;
      jv["value"] = ev.value;
      jv["basis"] = ev.basis;
      if (!ev.oracle.empty()) jv["oracle"] = ev.oracle;
      exp.push_back(jv);
    }
    je["expected"] = exp;
    entries.push_back(je);
  }
  ctx.record["entries"] = entries;
  ctx.check_flag("catalog_has_at_least_five_entries", catalog().size() >= 5);
}

void cmd_algebra_check(CommandContext& ctx) {
  std::vector<std::string> refs;
  if (ctx.doc.run().contains("algebras"))
    refs = ctx.doc.run().at("algebras").get<std::vector<std::string>>();
  else
    for (const auto& a : algebra_catalog())
      refs.push_back("builtin:" + a->name());
  json out = json::array();
  for (const auto& ref : refs) {
    AlgebraPtr a = ctx.doc.algebra(ref);
    json ja;
    ja["name"] = a->name().empty() ? ref : a->name();
    ja["dim"] = a->dim();
    ja["jacobi_residual"] = a->jacobi_residual();
    ja["rep_residual"] = a->rep_residual();
    ja["antisymmetry_exact"] = a->antisymmetry_exact();
    out.push_back(ja);
    ctx.check("jacobi[" + ref + "]", a->jacobi_residual(), "jacobi_structure");
    ctx.check("rep[" + ref + "]", a->rep_residual(), "rep_consistency");
    ctx.check_flag("antisymmetry[" + ref + "]", a->antisymmetry_exact());
  }
  ctx.record["algebras"] = out;
}

json strata_to_json(const StrataReport& rep) {
  json out;
  json classes = json::array();
  for (const auto& sc : rep.classes) {
    json jc;
    jc["label"] = sc.cls.label;
    jc["stabilizer_dim"] = sc.cls.stabilizer_dim;
    jc["component_order"] = sc.cls.component_order;
    jc["order_capped"] = sc.cls.order_capped;
    jc["is_origin"] = sc.is_origin;
    jc["stratum_dim"] = sc.stratum_dim;
    jc["orbit_dim"] = sc.orbit_dim;
    jc["quotient_dim"] = sc.quotient_dim;
    jc["sample_count"] = sc.sample_count;
    jc["deterministic_probe"] = sc.deterministic_probe;
    jc["low_confidence"] = sc.low_confidence;
    jc["representative"] = vector_to_json(sc.representative);
    classes.push_back(jc);
  }
  out["classes"] = classes;
  json order = json::array();
  for (const auto& [a, b] : rep.partial_order)
    order.push_back(json::array({a, b}));
  out["partial_order"] = order;
  out["samples"] = rep.samples;
  out["seed"] = rep.seed;
  return out;
}

void write_strata_table(const StrataReport& rep, const fs::path& path) {
  std::ofstream out(path);
  out << "label\tstabilizer_dim\tcomponent_order\tstratum_dim\torbit_dim\t"
         "quotient_dim\tsample_count\tconfidence\trepresentative\n";
  for (const auto& sc : rep.classes) {
    out << sc.cls.label << '\t' << sc.cls.stabilizer_dim << '\t'
        << sc.cls.component_order << '\t' << sc.stratum_dim << '\t'
        << sc.orbit_dim << '\t' << sc.quotient_dim << '\t' << sc.sample_count
        << '\t' << (sc.low_confidence ? "low" : "ok") << '\t';
    for (int i = 0; i < sc.representative.size(); ++i)
      out << (i ? "," : "") << format_double17(sc.representative(i));
    out << '\n';
  }
}

void cmd_strata(CommandContext& ctx, const fs::path& outdir) {
  SubgroupSpec h =
      ctx.doc.subgroup(run_string(ctx, "subgroup", "builtin:so3_so2"));
  const int samples = ctx.doc.run().value("samples", 200);
  StrataReport rep = enumerate_strata(h, samples, ctx.rc.seed);
  ctx.record["subgroup"] = h.name();
  ctx.record["strata"] = strata_to_json(rep);
  write_strata_table(rep, outdir / "strata_table.tsv");
  // The origin class is maximal in the emitted order.
  bool origin_maximal = true;
  int origin_idx = -1;
  for (size_t i = 0; i < rep.classes.size(); ++i)
    if (rep.classes[i].is_origin ||
        (h.trivial() && rep.classes[i].representative.norm() < 1e-14))
      origin_idx = static_cast<int>(i);
  for (const auto& [a, b] : rep.partial_order)
    if (a == origin_idx && b != origin_idx) origin_maximal = false;
  ctx.check_flag("origin_class_maximal", origin_maximal);
}

void cmd_lp_bracket(CommandContext& ctx) {
  SubgroupSpec h =
      ctx.doc.subgroup(run_string(ctx, "subgroup", "builtin:so3_so2"));
  const int k = h.algebra().dim();
  CertifiedDualFunction f =
      certify(dual_from_poly(ctx.doc.poly_spec(ctx.doc.run().at("f"), k)), h,
              32, ctx.rc.seed);
  CertifiedDualFunction g =
      certify(dual_from_poly(ctx.doc.poly_spec(ctx.doc.run().at("g"), k)), h,
              32, ctx.rc.seed + 1);
  json points = json::array();
  for (const auto& jp : ctx.doc.run().at("points")) {
    CovectorPoint mu{vector_from_json(jp)};
    const double fg = lp_bracket(f, g, mu, h);
    const double gf = lp_bracket(g, f, mu, h);
    json rec;
    rec["mu"] = vector_to_json(mu.coords);
    rec["bracket"] = fg;
    rec["antisymmetry_defect"] = std::abs(fg + gf);
    points.push_back(rec);
    ctx.check("antisymmetry@" + std::to_string(points.size() - 1),
              std::abs(fg + gf), "bracket_antisym");
  }
  ctx.record["points"] = points;
  ctx.record["subgroup"] = h.name();
}

void write_flow_table(const FlowResult& res, const fs::path& path) {
  std::ofstream out(path);
  out << "step\tt\tmu\tannihilator_distance\tcasimirs\tstabilizer_dim\t"
         "component_order\n";
  for (size_t i = 0; i < res.steps.size(); ++i) {
    const auto& st = res.steps[i];
    out << i << '\t' << format_double17(st.t) << '\t';
    for (int c = 0; c < st.mu.size(); ++c)
      out << (c ? "," : "") << format_double17(st.mu(c));
    out << '\t' << format_double17(st.annihilator_distance) << '\t';
    for (int c = 0; c < st.casimirs.size(); ++c)
      out << (c ? "," : "") << format_double17(st.casimirs(c));
    out << '\t' << st.cls.stabilizer_dim << '\t' << st.cls.component_order
        << '\n';
  }
}

void cmd_lp_flow(CommandContext& ctx, const fs::path& outdir) {
  SubgroupSpec h =
      ctx.doc.subgroup(run_string(ctx, "subgroup", "builtin:so3_so2"));
  const int k = h.algebra().dim();
  CertifiedDualFunction f =
      certify(dual_from_poly(ctx.doc.poly_spec(ctx.doc.run().at("f"), k)), h,
              32, ctx.rc.seed);
  CovectorPoint mu0{vector_from_json(ctx.doc.run().at("mu0"))};
  const double T = ctx.doc.run().value("T", 10.0);
  const int steps = ctx.doc.run().value("steps", 4000);
  FlowOptions opts;
  opts.diagnostics_stride = ctx.doc.run().value("stride", 50);
  FlowResult res = lp_flow(f, mu0, h, T, steps, opts);
  write_flow_table(res, outdir / "lp_flow_table.tsv");
  ctx.record["subgroup"] = h.name();
  ctx.record["T"] = T;
  ctx.record["steps"] = steps;
  ctx.record["ok"] = res.ok;
  ctx.record["max_annihilator_distance"] = res.max_annihilator_distance;
  ctx.record["max_casimir_drift"] = res.max_casimir_drift;
  ctx.record["class_constant"] = res.class_constant;
  ctx.check_flag("finite_trajectory", res.ok);
  ctx.check("annihilator_distance", res.max_annihilator_distance,
            "flow_annihilator");
  ctx.check("casimir_drift", res.max_casimir_drift, "casimir_drift");
  ctx.check_flag("isotropy_class_constant", res.class_constant);
}

std::vector<Eigen::VectorXd> chart_grid(const ConnectionChart& chart,
                                        int per_axis) {
  std::vector<Eigen::VectorXd> pts;
  const int n = chart.base_dim();
  const double margin = 0.05 * chart.box().scale();
  Eigen::VectorXd lo = chart.box().lo.array() + margin;
  Eigen::VectorXd hi = chart.box().hi.array() - margin;
  std::vector<int> idx(n, 0);
  while (true) {
    Eigen::VectorXd x(n);
    for (int i = 0; i < n; ++i)
      x(i) = lo(i) + (hi(i) - lo(i)) * idx[i] / std::max(1, per_axis - 1);
    pts.push_back(x);
    int carry = 0;
    while (carry < n && ++idx[carry] >= per_axis) idx[carry++] = 0;
    if (carry >= n) break;
  }
  return pts;
}

void cmd_curvature(CommandContext& ctx) {
  ConnectionChart chart =
      ctx.doc.chart(run_string(ctx, "chart", "builtin:abelian_b1"));
  CurvatureTable table = curvature_structure(chart);
  const int per_axis = ctx.doc.run().value("grid", 5);
  auto grid = chart_grid(chart, per_axis);
  double worst_match = 0.0, worst_off = 0.0, worst_bianchi = 0.0;
  for (const auto& x : grid) {
    for (int i = 0; i < chart.base_dim(); ++i)
      for (int j = i + 1; j < chart.base_dim(); ++j) {
        double off = 0.0;
        Eigen::VectorXd probe = curvature_commutator(chart, x, i, j, 0.0, &off);
        worst_match = std::max(
            worst_match,
            (probe - table.value(x, i, j)).cwiseAbs().maxCoeff());
        worst_off = std::max(worst_off, off);
      }
    worst_bianchi = std::max(worst_bianchi, bianchi_residual(chart, table, x));
  }
  ctx.record["chart"] = chart.name();
  ctx.record["grid_points"] = static_cast<int>(grid.size());
  ctx.record["max_structure_vs_commutator"] = worst_match;
  ctx.record["max_off_algebra_residual"] = worst_off;
  ctx.record["max_bianchi_residual"] = worst_bianchi;
  ctx.check("structure_vs_commutator", worst_match, "curvature_match");
  ctx.check("bianchi", worst_bianchi, "bianchi");
}

std::vector<LoopPath> loops_from_run(const CommandContext& ctx,
                                     const ConnectionChart& chart) {
  std::vector<LoopPath> loops;
  if (ctx.doc.run().contains("loops")) {
    for (const auto& name : ctx.doc.run().at("loops"))
      loops.push_back(ctx.doc.loop(name.get<std::string>()));
  } else {
    Eigen::VectorXd c = 0.5 * (chart.box().lo + chart.box().hi);
    loops.push_back(loop_square(c, 0.4 * chart.box().scale()));
    loops.push_back(loop_circle(c, 0.2 * chart.box().scale()));
  }
  return loops;
}

void cmd_holonomy(CommandContext& ctx) {
  ConnectionChart chart =
      ctx.doc.chart(run_string(ctx, "chart", "builtin:abelian_b1"));
  auto loops = loops_from_run(ctx, chart);
  json out = json::array();
  int idx = 0;
  for (const auto& loop : loops) {
    HolonomyResult h = holonomy(chart, loop);
    json jh;
    jh["element"] = matrix_to_json(h.element.matrix);
    jh["log"] = vector_to_json(h.logarithm);
    jh["log_reliable"] = h.log_reliable;
    jh["membership_residual"] = h.membership_residual;
    jh["off_algebra_residual"] = h.off_algebra_residual;
    jh["refinement_error"] = h.refinement_error;
    out.push_back(jh);
    ctx.check("membership@" + std::to_string(idx), h.membership_residual,
              "hol_membership");
    ctx.check("refinement@" + std::to_string(idx), h.refinement_error,
              "lift_refine");
    ++idx;
  }
  ctx.record["chart"] = chart.name();
  ctx.record["holonomies"] = out;
}

void cmd_ambrose_singer(CommandContext& ctx) {
  ConnectionChart chart =
      ctx.doc.chart(run_string(ctx, "chart", "builtin:abelian_b1"));
  CurvatureTable table = curvature_structure(chart);
  auto loops = loops_from_run(ctx, chart);
  auto grid = chart_grid(chart, ctx.doc.run().value("grid", 3));
  AmbroseSingerReport rep = ambrose_singer_check(
      chart, table, loops, grid, ctx.rc.tolerances.get("hol_membership"),
      ctx.rc.tolerances.get("as_span"));
  json out = json::array();
  for (size_t i = 0; i < rep.loops.size(); ++i) {
    const auto& chk = rep.loops[i];
    json jc;
    jc["membership_residual"] = chk.membership_residual;
    jc["span_residual"] = chk.span_residual;
    jc["log_norm"] = chk.log_norm;
    jc["log_reliable"] = chk.log_reliable;
    jc["pass"] = chk.pass;
    out.push_back(jc);
    ctx.check("membership@" + std::to_string(i), chk.membership_residual,
              "hol_membership");
    ctx.check("span@" + std::to_string(i), chk.span_residual, "as_span");
  }
  ctx.record["chart"] = chart.name();
  ctx.record["curvature_span_dim"] = rep.curvature_span_dim;
  ctx.record["loops"] = out;
}

void cmd_gauge_bracket(CommandContext& ctx) {
  GaugeChart chart =
      ctx.doc.gauge_chart(run_string(ctx, "gauge", "builtin:abelian_b1"));
  GaugeState s = state_from_run(ctx, chart);
  const int n = chart.n();
  json out;
  if (n >= 1) {
    const double xp = gauge_bracket(chart, coordinate_field_x(chart, 0),
                                    coordinate_field_p(chart, 0), s);
    out["x1_p1"] = xp;
    ctx.check_flag("x1_p1_equals_one", xp == 1.0);
  }
  if (n >= 2) {
    const double pp = gauge_bracket(chart, coordinate_field_p(chart, 0),
                                    coordinate_field_p(chart, 1), s);
    // Independent contraction of the curvature against the fiber point.
    Eigen::VectorXd b = chart.curvature()->value(s.x, 0, 1);
    double expect = 0.0;
    for (size_t a = 0; a < chart.coupling().size(); ++a)
      expect += s.mu(chart.coupling()[a] - chart.r()) * b(static_cast<int>(a));
    out["p1_p2"] = pp;
    out["p1_p2_expected"] = expect;
    ctx.check("p1_p2_vs_contraction", std::abs(pp - expect), "gauge_pp");
  }
  // Zero blocks of the tensor.
  Eigen::MatrixXd pi = poisson_tensor(chart, s);
  double zero_blocks = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j)
      zero_blocks = std::max(zero_blocks, std::abs(pi(i, j)));  // (x,x)
    for (int a = 0; a < chart.fiber_dim(); ++a) {
      zero_blocks = std::max(zero_blocks, std::abs(pi(i, 2 * n + a)));
      zero_blocks = std::max(zero_blocks, std::abs(pi(n + i, 2 * n + a)));
    }
  }
  out["zero_block_max"] = zero_blocks;
  ctx.check_flag("zero_blocks_exactly_zero", zero_blocks == 0.0);
  if (ctx.doc.run().contains("pairs")) {
    json vals = json::array();
    const int N = chart.state_dim();
    for (const auto& pr : ctx.doc.run().at("pairs")) {
      GaugeField f(ctx.doc.poly_spec(pr.at("f"), N));
      GaugeField g(ctx.doc.poly_spec(pr.at("g"), N));
      certify_gauge_field(chart, f, ctx.rc.seed);
      certify_gauge_field(chart, g, ctx.rc.seed + 1);
      vals.push_back(gauge_bracket(chart, f, g, s));
    }
    out["pairs"] = vals;
  }
  ctx.record["gauge"] = chart.name();
  ctx.record["results"] = out;
}

void cmd_jacobi(CommandContext& ctx) {
  GaugeChart chart =
      ctx.doc.gauge_chart(run_string(ctx, "gauge", "builtin:abelian_b1"));
  GaugeState s = state_from_run(ctx, chart);
  const int trials = ctx.doc.run().value("trials", 25);
  JacobiReport rep = jacobi_residual(chart, s, trials, ctx.rc.seed);
  ctx.record["gauge"] = chart.name();
  ctx.record["trials"] = rep.trials;
  ctx.record["max_residual"] = rep.max_residual;
  ctx.check("jacobi", rep.max_residual, "gauge_jacobi");
}

void write_gauge_flow_table(const GaugeFlowResult& res, const fs::path& path) {
  std::ofstream out(path);
  out << "step\tt\tz\tenergy\tcasimirs\tstabilizer_dim\tcomponent_order\n";
  for (size_t i = 0; i < res.steps.size(); ++i) {
    const auto& st = res.steps[i];
    out << i << '\t' << format_double17(st.t) << '\t';
    for (int c = 0; c < st.z.size(); ++c)
      out << (c ? "," : "") << format_double17(st.z(c));
    out << '\t' << format_double17(st.energy) << '\t';
    for (int c = 0; c < st.casimirs.size(); ++c)
      out << (c ? "," : "") << format_double17(st.casimirs(c));
    out << '\t' << st.cls.stabilizer_dim << '\t' << st.cls.component_order
        << '\n';
  }
}

void cmd_gauge_flow(CommandContext& ctx, const fs::path& outdir) {
  GaugeChart chart =
      ctx.doc.gauge_chart(run_string(ctx, "gauge", "builtin:abelian_b1"));
  GaugeState s0 = state_from_run(ctx, chart);
  GaugeField f = ctx.doc.run().contains("f")
                     ? GaugeField(ctx.doc.poly_spec(ctx.doc.run().at("f"),
                                                    chart.state_dim()))
                     : default_gauge_hamiltonian(chart);
  certify_gauge_field(chart, f, ctx.rc.seed);
  const double T = ctx.doc.run().value("T", 10.0);
  const int steps = ctx.doc.run().value("steps", 10000);
  GaugeFlowResult res = gauge_flow(chart, f, s0, T, steps,
                                   ctx.doc.run().value("stride", 100));
  write_gauge_flow_table(res, outdir / "gauge_flow_table.tsv");
  ctx.record["gauge"] = chart.name();
  ctx.record["ok"] = res.ok;
  ctx.record["max_energy_drift"] = res.max_energy_drift;
  ctx.record["max_casimir_drift"] = res.max_casimir_drift;
  ctx.record["class_constant"] = res.class_constant;
  ctx.check_flag("trajectory_in_box", res.ok);
  ctx.check("energy_drift", res.max_energy_drift, "energy_drift");
  ctx.check("fiber_casimir_drift", res.max_casimir_drift,
            "fiber_casimir_drift");
  ctx.check_flag("isotropy_class_constant", res.class_constant);
}

void cmd_leaf_check(CommandContext& ctx) {
  GaugeChart chart =
      ctx.doc.gauge_chart(run_string(ctx, "gauge", "builtin:abelian_b1"));
  GaugeState s = state_from_run(ctx, chart);
  const int pairs = ctx.doc.run().value("pairs", 10);
  std::mt19937_64 rng(ctx.rc.seed);
  double worst = 0.0;
  for (int t = 0; t < pairs; ++t) {
    GaugeField f = random_gauge_field(chart, rng);
    GaugeField g = random_gauge_field(chart, rng);
    const double lhs = gauge_bracket(chart, f, g, s);
    const double res = leaf_consistency(chart, s, f, g);
    worst = std::max(worst, res / (1.0 + std::abs(lhs)));
  }
  LeafProbe probe =
      leaf_report({chart.embed_fiber(s.mu)}, chart.subgroup());
  ctx.record["gauge"] = chart.name();
  ctx.record["pairs"] = pairs;
  ctx.record["max_relative_residual"] = worst;
  json jp;
  jp["leaf_dim"] = probe.leaf_dim;
  jp["ham_rank"] = probe.ham_rank;
  jp["orbit_in_span"] = probe.orbit_in_span;
  jp["casimirs"] = vector_to_json(probe.casimir_values);
  ctx.record["leaf"] = jp;
  ctx.check("leaf_consistency", worst, "leaf_consistency");
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {
      "algebra-check", "strata",         "lp-bracket", "lp-flow",
      "curvature",     "holonomy",       "ambrose-singer",
      "gauge-bracket", "jacobi",         "gauge-flow", "leaf-check",
      "catalog"};
  return names;
}

int run_command(const RunConfig& rc) {
  CommandContext ctx{rc,
                     rc.config_path.empty() ? Document::from_json(json::object())
                                            : Document::load(rc.config_path),
                     json::object(),
                     {}};
  fs::path outdir(rc.out_dir);
  std::error_code ec;
  fs::create_directories(outdir, ec);
  if (ec) throw InputError("cannot create output directory " + rc.out_dir);

  ctx.record["command"] = rc.command;
  ctx.record["seed"] = rc.seed;
  json tols;
  for (const auto& [k, v] : rc.tolerances.values) tols[k] = v;
  ctx.record["tolerances"] = tols;

  if (rc.command == "catalog")
    cmd_catalog(ctx);
  else if (rc.command == "algebra-check")
    cmd_algebra_check(ctx);
  else if (rc.command == "strata")
    cmd_strata(ctx, outdir);
  else if (rc.command == "lp-bracket")
    cmd_lp_bracket(ctx);
  else if (rc.command == "lp-flow")
    cmd_lp_flow(ctx, outdir);
  else if (rc.command == "curvature")
    cmd_curvature(ctx);
  else if (rc.command == "holonomy")
    cmd_holonomy(ctx);
  else if (rc.command == "ambrose-singer")
    cmd_ambrose_singer(ctx);
  else if (rc.command == "gauge-bracket")
    cmd_gauge_bracket(ctx);
  else if (rc.command == "jacobi")
    cmd_jacobi(ctx);
  else if (rc.command == "gauge-flow")
    cmd_gauge_flow(ctx, outdir);
  else if (rc.command == "leaf-check")
    cmd_leaf_check(ctx);
  else
    throw InputError("unknown command: " + rc.command);

  json asserts = json::array();
  bool all_pass = true;
  for (const auto& a : ctx.assertions) {
    asserts.push_back(assertion_json(a));
    all_pass = all_pass && a.pass;
  }
  ctx.record["assertions"] = asserts;
  ctx.record["pass"] = all_pass;

  const fs::path record_path = outdir / (rc.command + ".json");
  {
    std::ofstream out(record_path);
    out << ctx.record.dump(2) << '\n';
  }
  {
    json meta;
    const auto now = std::chrono::system_clock::now();
    meta["written_unix_ms"] =
        std::chrono::duration_cast<std::chrono::milliseconds>(
            now.time_since_epoch())
            .count();
    meta["record"] = record_path.string();
    std::ofstream out(outdir / (rc.command + ".meta.json"));
    out << meta.dump(2) << '\n';
  }
  if (!rc.quiet) {
    for (const auto& a : ctx.assertions)
      std::cout << (a.pass ? "[PASS] " : "[FAIL] ") << a.name << " = "
                << format_double17(a.value) << " (tol "
                << format_double17(a.tol) << ")\n";
    std::cout << (all_pass ? "OK: " : "ASSERTION FAILURE: ") << rc.command
              << " -> " << record_path.string() << '\n';
  }
  return all_pass ? 0 : 2;
}

}  // namespace lps

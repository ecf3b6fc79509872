#pragma once

#include "lps/gauge.hpp"

namespace lps {

/// Stored regression value with its provenance: "exact" values follow from
/// the defining data, "oracle" values were computed by the named
/// independent route.
struct ExpectedValue {
  std::string name;
  double value = 0.0;
  std::string basis;   // "exact" | "oracle"
  std::string oracle;  // oracle description when basis == "oracle"
};

struct CatalogEntry {
  std::string name;
  std::string summary;
  AlgebraPtr algebra;
  std::optional<SubgroupSpec> subgroup;
  std::optional<ConnectionChart> chart;
  std::optional<CurvatureTable> curvature;
  std::optional<GaugeChart> gauge;
  std::vector<ExpectedValue> expected;
};

const std::vector<CatalogEntry>& catalog();
const CatalogEntry& catalog_entry(const std::string& name);
bool catalog_has(const std::string& name);

// Named connection charts (also reachable through catalog entries).
ConnectionChart chart_flat2();
ConnectionChart chart_abelian_b1();
ConnectionChart chart_hopf();
ConnectionChart chart_so3_poly();
/// Explicit non-closed curvature table paired with chart_flat3_u1; its
/// Jacobi defect is the negative control for the bracket tests.
ConnectionChart chart_flat3_u1();
CurvatureTable curvature_nonclosed();

/// Default state used by bracket examples on a gauge chart (x = p = small
/// generic values, mu on the declared stratum).
GaugeState default_state(const GaugeChart& chart, double mu_scale = 0.7);

}  // namespace lps

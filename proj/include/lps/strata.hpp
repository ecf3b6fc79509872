#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "lps/subgroup.hpp"

namespace lps {

struct IsotropyClass {
  int stabilizer_dim = 0;    // dimension of the stabilizer subalgebra in h
  int component_order = 1;   // order of the sampled discrete stabilizer
  bool order_capped = false; // true when enumeration hit the cap
  std::string label;

  bool same_type(const IsotropyClass& o) const {
    return stabilizer_dim == o.stabilizer_dim &&
           component_order == o.component_order;
  }
};

/// Maximum order enumerated for the component group; larger groups are
/// reported as capped.
constexpr int kComponentOrderCap = 64;

/// Isotropy class of a covector in the annihilator. Throws InputError when
/// mu is outside the annihilator beyond tolerance.
IsotropyClass isotropy_at(const CovectorPoint& mu, const SubgroupSpec& h,
                          double membership_tol = 1e-10);

/// Stabilizer data used by stratum-dimension estimates: the stabilizer
/// subalgebra basis and the discrete stabilizer elements of mu.
struct StabilizerData {
  Eigen::MatrixXd subalgebra;            // k x s
  std::vector<GroupElement> discrete;    // elements fixing mu
  bool order_capped = false;
};
StabilizerData stabilizer_at(const Eigen::VectorXd& mu, const SubgroupSpec& h);

struct StratumClass {
  IsotropyClass cls;
  Eigen::VectorXd representative;
  bool is_origin = false;
  int stratum_dim = 0;   // dimension inside the annihilator
  int orbit_dim = 0;     // dimension of the H-orbit through the representative
  int quotient_dim = 0;  // stratum_dim - orbit_dim
  int sample_count = 0;
  bool deterministic_probe = false;
  bool low_confidence = false;
};

struct StrataReport {
  std::vector<StratumClass> classes;
  /// Pairs (a, b) meaning class a precedes class b (points of class a occur
  /// arbitrarily close to points of class b). Determined by sampling.
  std::vector<std::pair<int, int>> partial_order;
  int samples = 0;
  std::uint64_t seed = 0;
};

/// Monte-Carlo classification of the annihilator: uniform unit-sphere samples
/// plus deterministic probes of the origin and of every fixed subspace.
/// For a nontrivial subgroup the origin is reported as its own class (the
/// apex of the stratification); for the trivial subgroup there is one class.
StrataReport enumerate_strata(const SubgroupSpec& h, int samples,
                              std::uint64_t seed);

/// Enumerate the finite group generated by the discrete generators, up to
/// kComponentOrderCap elements.
std::vector<GroupElement> enumerate_component_group(const SubgroupSpec& h,
                                                    bool* capped = nullptr);

}  // namespace lps

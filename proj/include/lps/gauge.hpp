#pragma once

#include <optional>

#include "lps/connection.hpp"
#include "lps/poisson.hpp"

namespace lps {

/// Local chart of a reduced phase-space stratum: base coordinates (x, p) of
/// the quotient cotangent bundle plus fiber coordinates mu on the annihilator
/// of the stabilizer subalgebra, tied together by a connection chart whose
/// fiber algebra embeds into designated slots of the adapted algebra basis.
///
/// The algebra basis is adapted: vectors 1..r span the stabilizer subalgebra,
/// vectors r+1..k complete it, and mu carries the dual coordinates r+1..k.
class GaugeChart {
 public:
  GaugeChart(AlgebraPtr algebra, SubgroupSpec subgroup,
             std::optional<ConnectionChart> base,
             std::optional<CurvatureTable> curvature,
             std::vector<int> coupling,  // adapted slot per fiber generator
             IsotropyClass declared_class, std::string name = "");

  const AlgebraPtr& algebra() const { return algebra_; }
  const SubgroupSpec& subgroup() const { return subgroup_; }
  const std::optional<ConnectionChart>& base() const { return base_; }
  const std::optional<CurvatureTable>& curvature() const { return curvature_; }
  const std::vector<int>& coupling() const { return coupling_; }
  const IsotropyClass& declared_class() const { return declared_class_; }
  const std::string& name() const { return name_; }

  int n() const { return base_ ? base_->base_dim() : 0; }
  int k() const { return algebra_->dim(); }
  int r() const { return subgroup_.r(); }
  int fiber_dim() const { return k() - r(); }
  int state_dim() const { return 2 * n() + fiber_dim(); }

  /// mu in slot coordinates -> covector on the full dual (zero stabilizer
  /// block).
  Eigen::VectorXd embed_fiber(const Eigen::VectorXd& mu) const;

 private:
  AlgebraPtr algebra_;
  SubgroupSpec subgroup_;
  std::optional<ConnectionChart> base_;
  std::optional<CurvatureTable> curvature_;
  std::vector<int> coupling_;
  IsotropyClass declared_class_;
  std::string name_;
};

struct GaugeState {
  Eigen::VectorXd x, p, mu;
  Eigen::VectorXd packed() const;
  static GaugeState unpack(const GaugeChart& chart, const Eigen::VectorXd& z);
};

/// Throws InputError unless x lies in the chart box and the isotropy class
/// of mu matches the chart's declared class.
void validate_state(const GaugeChart& chart, const GaugeState& s);

/// Polynomial observable on a gauge chart, in the packed variables
/// (x_1..x_n, p_1..p_n, mu_1..mu_m). The fiber dependence must be invariant
/// under the induced subgroup action; fields assembled from the chart's
/// invariant fiber generators carry the certificate by construction.
class GaugeField {
 public:
  GaugeField(Poly poly, bool fiber_invariant_by_construction = false);
  const Poly& poly() const { return poly_; }
  bool certified() const { return certified_; }
  void mark_certified() { certified_ = true; }

  double value(const Eigen::VectorXd& z) const { return poly_.eval(z); }
  Eigen::VectorXd gradient(const Eigen::VectorXd& z) const {
    return poly_.gradient(z);
  }
  Eigen::MatrixXd hessian(const Eigen::VectorXd& z) const {
    return poly_.hessian(z);
  }

 private:
  Poly poly_;
  bool certified_ = false;
};

/// Samples the fiber invariance of the field and throws on failure.
void certify_gauge_field(const GaugeChart& chart, GaugeField& field,
                         std::uint64_t seed = 2026);

/// Invariant fiber generators of the chart, as polynomials in the packed
/// variables (constant in x and p).
std::vector<Poly> fiber_generators_packed(const GaugeChart& chart);
/// Same, as polynomials in the fiber slot variables only.
InvariantFamily fiber_invariants(const GaugeChart& chart);

GaugeField random_gauge_field(const GaugeChart& chart, std::mt19937_64& rng,
                              int terms = 5, int max_factors = 2);
/// Convenience coordinate fields.
GaugeField coordinate_field_x(const GaugeChart& chart, int i);
GaugeField coordinate_field_p(const GaugeChart& chart, int i);

/// Antisymmetric bracket matrix on the packed coordinates:
///   {x^i, p_j} = delta^i_j,
///   {p_i, p_j} = mu_alpha B^alpha_ij(x),
///   {mu_a, mu_b} = -c^m_ab mu_m   (zero-extended over the stabilizer block),
///   all (x,x), (x,mu), (p,mu) blocks zero.
Eigen::MatrixXd poisson_tensor(const GaugeChart& chart, const GaugeState& s);

/// d/dz_l of the tensor (analytic fiber part; curvature derivatives from the
/// table).
Eigen::MatrixXd poisson_tensor_derivative(const GaugeChart& chart,
                                          const GaugeState& s, int l);

double gauge_bracket(const GaugeChart& chart, const GaugeField& f,
                     const GaugeField& g, const GaugeState& s);

struct JacobiReport {
  double max_residual = 0.0;  // relative to 1 + nested bracket magnitudes
  int trials = 0;
};
/// Max Jacobi residual over random polynomial field triples (the first trial
/// always uses momentum coordinate fields, which detect a non-closed
/// curvature table directly).
JacobiReport jacobi_residual(const GaugeChart& chart, const GaugeState& s,
                             int trials, std::uint64_t seed);

struct GaugeFlowStep {
  double t = 0.0;
  Eigen::VectorXd z;
  double energy = 0.0;
  Eigen::VectorXd casimirs;
  IsotropyClass cls;
};
struct GaugeFlowResult {
  std::vector<GaugeFlowStep> steps;
  bool ok = true;
  int failure_index = -1;
  double max_energy_drift = 0.0;
  double max_casimir_drift = 0.0;
  bool class_constant = true;
};
GaugeFlowResult gauge_flow(const GaugeChart& chart, const GaugeField& f,
                           const GaugeState& s0, double T, int steps,
                           int diagnostics_stride = 1);

/// Tangent data of the symplectic leaf through a state: the 2n base
/// directions plus fiber directions generated by invariant Hamiltonian
/// motions, reduced modulo the subgroup orbit directions.
struct GaugeLeafBasis {
  std::vector<Eigen::VectorXd> fiber_dirs;  // slot coordinates, unit length
  std::vector<Eigen::VectorXd> fiber_gens;  // algebra generators behind them
  int dim() const { return static_cast<int>(fiber_dirs.size()); }
};
GaugeLeafBasis leaf_tangent_basis(const GaugeChart& chart,
                                  const GaugeState& s);

/// Matrix of the leaf two-form on (dx, dp, fiber directions):
///   (x,x) block  -mu_alpha B^alpha_ij,
///   (x,p) block  identity,
///   fiber block  -<mu, [xi_a, xi_b]>,
/// other blocks zero.
Eigen::MatrixXd minimal_coupling_form(const GaugeChart& chart,
                                      const GaugeState& s,
                                      const GaugeLeafBasis& basis);

/// |{f, g}(s) - omega_min(X_f, X_g)(s)| with the Hamiltonian fields solved
/// on the leaf tangent space. Throws when a differential cannot be realized
/// on the leaf (degenerate pairing on the supplied directions).
double leaf_consistency(const GaugeChart& chart, const GaugeState& s,
                        const GaugeField& f, const GaugeField& g);

/// mu embedded into the full dual of the adapted algebra.
CovectorPoint momentum_of_state(const GaugeChart& chart, const GaugeState& s);

/// Free-action three-term assembly (canonical + curvature coupling +
/// fiber bracket), computed through the canonical sharp map rather than the
/// packed tensor. Valid for a trivial subgroup.
struct ThreeTermBracket {
  double canonical = 0.0, coupling = 0.0, fiber = 0.0;
  double total() const { return canonical + coupling + fiber; }
};
ThreeTermBracket three_term_bracket(const GaugeChart& chart,
                                    const GaugeField& f, const GaugeField& g,
                                    const GaugeState& s);
/// The same three pieces read off the packed tensor blocks, for term-by-term
/// comparison.
ThreeTermBracket bracket_terms_from_tensor(const GaugeChart& chart,
                                           const GaugeField& f,
                                           const GaugeField& g,
                                           const GaugeState& s);

}  // namespace lps

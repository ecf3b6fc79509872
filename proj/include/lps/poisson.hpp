#pragma once

#include "lps/invariants.hpp"
#include "lps/strata.hpp"

namespace lps {

/// Homogeneous Lie-Poisson bracket on the annihilator quotient, evaluated
/// through invariant representatives on the full dual:
///   {f, g}([mu]) = -<mu, [dF/dmu, dG/dmu]>.
double lp_bracket(const CertifiedDualFunction& f,
                  const CertifiedDualFunction& g, const CovectorPoint& mu,
                  const SubgroupSpec& h);

/// Same bracket computed directly by structure-constant contraction of the
/// gradients; used as the free-case cross-check.
double lp_bracket_contraction(const Eigen::VectorXd& grad_f,
                              const Eigen::VectorXd& grad_g,
                              const Eigen::VectorXd& mu,
                              const LieAlgebraSpec& g);

/// Hamiltonian vector field of an invariant function at mu:
///   X_f(mu) = ad*_{dF/dmu} mu.
/// It satisfies {f, g}(mu) = <X_g(mu), dF/dmu> = -<X_f(mu), dG/dmu>.
CovectorPoint ham_field(const CertifiedDualFunction& f, const CovectorPoint& mu,
                        const SubgroupSpec& h);

struct FlowStep {
  double t = 0.0;
  Eigen::VectorXd mu;
  double annihilator_distance = 0.0;
  Eigen::VectorXd casimirs;
  IsotropyClass cls;
};

struct FlowResult {
  std::vector<FlowStep> steps;
  bool ok = true;
  int failure_index = -1;
  double max_annihilator_distance = 0.0;
  double max_casimir_drift = 0.0;  // relative to 1 + |initial value|
  bool class_constant = true;
};

struct FlowOptions {
  int diagnostics_stride = 1;   // record every n-th step
  bool classify = true;         // track the isotropy class per recorded step
};

/// Fixed-step fourth-order Runge-Kutta integration of mu' = X_f(mu) with
/// per-step diagnostics: distance to the annihilator, Casimir drift and
/// isotropy class.
FlowResult lp_flow(const CertifiedDualFunction& f, const CovectorPoint& mu0,
                   const SubgroupSpec& h, double T, int steps,
                   const FlowOptions& opts = {});

struct LeafProbe {
  Eigen::VectorXd origin;
  Eigen::VectorXd casimir_values;
  IsotropyClass cls;
  int leaf_dim = 0;
  int ham_rank = 0;       // rank of invariant Hamiltonian directions
  int orbit_in_span = 0;  // H-orbit directions inside that span
};

/// Dimension of the symplectic leaf through [mu0], estimated as the rank of
/// the invariant Hamiltonian directions minus the H-orbit directions they
/// contain, together with the Casimir values identifying the ambient
/// coadjoint orbit.
LeafProbe leaf_report(const CovectorPoint& mu0, const SubgroupSpec& h);

/// Orbit symplectic pairing on generator tangents:
///   omega(ad*_xi mu, ad*_eta mu) = -<mu, [xi, eta]>.
/// Both generators must be tangent to the stratum of mu inside the
/// annihilator; non-tangency is an input error carrying the residual.
double stratified_kks_pair(const CovectorPoint& mu, const AlgebraVector& xi,
                           const AlgebraVector& eta, const SubgroupSpec& h,
                           double tangency_tol = 1e-8);

/// Basis data for the tangent space of the stratum through mu inside the
/// annihilator: the fixed space of the stabilizer plus orbit directions.
Eigen::MatrixXd stratum_tangent(const Eigen::VectorXd& mu,
                                const SubgroupSpec& h);

}  // namespace lps

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>

#include "lps/poly.hpp"
#include "lps/subgroup.hpp"

namespace lps {

/// Scalar function on dual coordinates with gradient access. The gradient is
/// the fiber derivative dF/dmu expressed in algebra coordinates; when no
/// analytic gradient is supplied, central finite differences with relative
/// step fd_step are used.
struct DualFunction {
  std::function<double(const Eigen::VectorXd&)> value;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> analytic_gradient;
  double fd_step = 1e-6;

  bool analytic() const { return static_cast<bool>(analytic_gradient); }
  Eigen::VectorXd gradient(const Eigen::VectorXd& mu) const;
};

DualFunction dual_from_poly(const Poly& p);
DualFunction dual_from_callable(
    std::function<double(const Eigen::VectorXd&)> f, double fd_step = 1e-6);

struct CertificateReport {
  bool ok = true;
  double worst_infinitesimal = 0.0;
  double worst_discrete = 0.0;
  Eigen::VectorXd failing_sample;
  std::string detail;
};

/// H-invariance certificate for the fiber part of a function: infinitesimal
/// invariance <ad*_eta mu, dF/dmu> = 0 on sampled points of the annihilator
/// for every subalgebra basis vector, plus F(Ad*_g mu) = F(mu) for every
/// discrete generator. Residuals are relative to 1 + |F| + |dF||mu|.
CertificateReport invariance_certificate(const DualFunction& f,
                                         const SubgroupSpec& h, int nsamples,
                                         std::uint64_t seed,
                                         double tol_infinitesimal = 1e-6,
                                         double tol_discrete = 1e-8);

/// A function together with its verified certificate.
struct CertifiedDualFunction {
  DualFunction fn;
  CertificateReport certificate;
};

/// Runs the certificate and throws InputError (including the failing sample)
/// when it does not hold.
CertifiedDualFunction certify(const DualFunction& f, const SubgroupSpec& h,
                              int nsamples = 32, std::uint64_t seed = 2026);

/// Polynomial generators of H-invariant functions on the annihilator,
/// expressed in annihilator coordinates (the basis from annihilator_action).
/// Degree-one and degree-two generators, found by solving the linear
/// invariance conditions for the restricted action.
struct InvariantFamily {
  RestrictedAction action;
  std::vector<Poly> generators;   // polys in m = dim annihilator variables
  int linear_count = 0;
};
InvariantFamily invariant_generators(const SubgroupSpec& h);

/// Same solver for an arbitrary restricted linear action.
InvariantFamily invariant_family_for(RestrictedAction action);

/// Restricted coadjoint action on the literal coordinate slots r..k-1 of the
/// dual. Requires the subgroup to be in adapted position (its subalgebra
/// spanned by the first r basis vectors), so that those slots span the
/// annihilator.
RestrictedAction slot_annihilator_action(const SubgroupSpec& h);

/// Zero-extension of an annihilator-coordinate polynomial to a function on
/// the full dual (composition with the annihilator-coordinate map).
DualFunction extend_to_dual(const Poly& p, const InvariantFamily& fam);
Poly extend_poly_to_dual(const Poly& p, const InvariantFamily& fam);

/// Random polynomial in the invariant generators (exactly H-invariant).
Poly random_invariant_poly(const InvariantFamily& fam, std::mt19937_64& rng,
                           int terms = 4, int max_factors = 2);

/// Degree-one and degree-two H-invariant polynomials on the full dual
/// (solutions of the linear invariance conditions for the whole coadjoint
/// H-action, not only its restriction to the annihilator).
std::vector<Poly> invariant_dual_polys(const SubgroupSpec& h);

/// Random polynomial combination of a generator list.
Poly random_poly_in(const std::vector<Poly>& gens, int nvars,
                    std::mt19937_64& rng, int terms = 4, int max_factors = 2);

/// Invariant polynomials for the full coadjoint action: Casimir candidates
/// of degree one and two. Expressed in full dual coordinates.
std::vector<Poly> casimir_generators(const LieAlgebraSpec& g);

}  // namespace lps

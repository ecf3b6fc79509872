#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "lps/poisson.hpp"

using namespace lps;

namespace {

Eigen::VectorXd e(int k, int i) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(k);
  v(i) = 1.0;
  return v;
}

Eigen::VectorXd random_vec(int k, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::VectorXd v(k);
  for (int i = 0; i < k; ++i) v(i) = n(rng);
  return v;
}

CertifiedDualFunction coord(const SubgroupSpec& h, int i) {
  return certify(dual_from_poly(linear_poly(e(h.algebra().dim(), i))), h);
}

}  // namespace

TEST_CASE("invariant generator families") {
  // Circle pair: no full-dual linear invariant other than mu3, plus the two
  // rotation-invariant quadratics.
  auto gens = invariant_dual_polys(pair_so3_so2());
  REQUIRE(gens.size() == 3);  // mu3, and a 2-dim quadratic space
  // Trivial subgroup: everything degree <= 2.
  CHECK(invariant_dual_polys(pair_trivial(algebra_so3())).size() == 3 + 6);
  // Half-turn: mu3 linear, four even quadratics.
  CHECK(invariant_dual_polys(pair_so3_z2()).size() == 5);
}

TEST_CASE("invariance certificates") {
  SubgroupSpec so2 = pair_so3_so2();
  // mu3 is invariant under rotations about e3.
  CHECK(invariance_certificate(dual_from_poly(linear_poly(e(3, 2))), so2, 32,
                               1)
            .ok);
  // mu1 is not.
  CertificateReport bad =
      invariance_certificate(dual_from_poly(linear_poly(e(3, 0))), so2, 32, 1);
  CHECK_FALSE(bad.ok);
  CHECK(bad.failing_sample.size() == 3);
  CHECK_THROWS_AS(certify(dual_from_poly(linear_poly(e(3, 0))), so2),
                  InputError);
  // Discrete part: mu1 is not invariant under the half-turn, mu1^2 is.
  SubgroupSpec z2 = pair_so3_z2();
  CHECK_FALSE(
      invariance_certificate(dual_from_poly(linear_poly(e(3, 0))), z2, 32, 1)
          .ok);
  Eigen::MatrixXd s11 = Eigen::MatrixXd::Zero(3, 3);
  s11(0, 0) = 1.0;
  CHECK(invariance_certificate(dual_from_poly(quadratic_form_poly(s11)), z2,
                               32, 1)
            .ok);
}

TEST_CASE("bracket values in the free case") {
  SubgroupSpec free = pair_trivial(algebra_so3());
  auto f = coord(free, 0);
  auto g = coord(free, 1);
  std::mt19937_64 rng(3);
  for (int t = 0; t < 20; ++t) {
    CovectorPoint mu{random_vec(3, rng)};
    const double val = lp_bracket(f, g, mu, free);
    CHECK(std::abs(val - (-mu.coords(2))) < 1e-14);  // {mu1, mu2} = -mu3
    // Free-case collapse: match the direct structure-constant contraction.
    const double direct = lp_bracket_contraction(
        e(3, 0), e(3, 1), mu.coords, free.algebra());
    CHECK(std::abs(val - direct) < 1e-12);
    CHECK(lp_bracket(f, f, mu, free) == 0.0);
  }
}

TEST_CASE("functions of a Casimir commute") {
  SubgroupSpec free = pair_trivial(algebra_so3());
  auto cas = casimir_generators(free.algebra());
  REQUIRE(cas.size() == 1);  // |mu|^2
  std::mt19937_64 rng(5);
  for (int t = 0; t < 100; ++t) {
    Poly p1 = random_poly_in(cas, 3, rng, 3, 2);
    Poly p2 = random_poly_in(cas, 3, rng, 3, 2);
    auto f = certify(dual_from_poly(p1), free);
    auto g = certify(dual_from_poly(p2), free);
    CovectorPoint mu{random_vec(3, rng)};
    CHECK(std::abs(lp_bracket(f, g, mu, free)) < 1e-12);
  }
}

TEST_CASE("hamiltonian field") {
  SubgroupSpec free = pair_trivial(algebra_so3());
  auto constant = certify(dual_from_poly(Poly::constant(3, 4.2)), free);
  std::mt19937_64 rng(7);
  CovectorPoint mu{random_vec(3, rng)};
  CHECK(ham_field(constant, mu, free).coords.norm() == 0.0);

  // Casimir field vanishes.
  auto cas = certify(
      dual_from_poly(quadratic_form_poly(Eigen::MatrixXd::Identity(3, 3))),
      free);
  CHECK(ham_field(cas, mu, free).coords.norm() < 1e-13);

  // f = mu1 at mu = e2 points along -mu3; oracle pairs against every basis
  // vector.
  auto f = coord(free, 0);
  CovectorPoint mu2{e(3, 1)};
  Eigen::VectorXd x = ham_field(f, mu2, free).coords;
  Eigen::VectorXd expect(3);
  expect << 0, 0, -1;
  CHECK((x - expect).norm() < 1e-14);
  const auto& alg = free.algebra();
  for (int j = 0; j < 3; ++j)
    CHECK(std::abs(x(j) - mu2.coords.dot(alg.bracket(e(3, 0), e(3, j)))) <
          1e-14);

  // Bracket-field compatibility: {f,g} = <X_g, dF> = -<X_f, dG>.
  for (int t = 0; t < 20; ++t) {
    Poly pf = random_poly_in(invariant_dual_polys(free), 3, rng);
    Poly pg = random_poly_in(invariant_dual_polys(free), 3, rng);
    auto cf = certify(dual_from_poly(pf), free);
    auto cg = certify(dual_from_poly(pg), free);
    CovectorPoint m{random_vec(3, rng)};
    const double br = lp_bracket(cf, cg, m, free);
    const double via_g =
        ham_field(cg, m, free).coords.dot(cf.fn.gradient(m.coords));
    const double via_f =
        ham_field(cf, m, free).coords.dot(cg.fn.gradient(m.coords));
    CHECK(std::abs(br - via_g) < 1e-8 * (1 + std::abs(br)));
    CHECK(std::abs(br + via_f) < 1e-8 * (1 + std::abs(br)));
  }
}

TEST_CASE("bracket jacobi identity on invariant polynomials") {
  std::mt19937_64 rng(11);
  for (auto h : {pair_so3_so2(), pair_so3_z2(), pair_trivial(algebra_so3())}) {
    CAPTURE(h.name());
    auto gens = invariant_dual_polys(h);
    AnnihilatorBasis ann = annihilator_basis(h);
    for (int t = 0; t < 10; ++t) {
      auto f = certify(dual_from_poly(random_poly_in(gens, 3, rng)), h);
      auto g = certify(dual_from_poly(random_poly_in(gens, 3, rng)), h);
      auto k = certify(dual_from_poly(random_poly_in(gens, 3, rng)), h);
      Eigen::VectorXd z = random_vec(3, rng);
      CovectorPoint mu{ann.projector * z};
      // Nested brackets through the Hamiltonian-field identity
      // {f, {g, k}}(mu) = d/dt ... realized with analytic gradients via
      // finite differences along the Hamiltonian fields.
      auto nested = [&](const CertifiedDualFunction& a,
                        const CertifiedDualFunction& b,
                        const CertifiedDualFunction& c) {
        // {a, {b, c}} = <X_{bc}, dA> where {b,c} is evaluated as a function.
        const double eps = 1e-5;
        Eigen::VectorXd xa = ham_field(a, mu, h).coords;
        // directional derivative of {b,c} along -X_a gives {a,{b,c}} with
        // our sign convention: {a, u} = -<X_a, dU>.
        auto bc = [&](const Eigen::VectorXd& m) {
          return lp_bracket(b, c, {m}, h);
        };
        return -(bc(mu.coords + eps * xa) - bc(mu.coords - eps * xa)) /
               (2 * eps);
      };
      const double j1 = nested(f, g, k);
      const double j2 = nested(g, k, f);
      const double j3 = nested(k, f, g);
      const double scale = 1 + std::abs(j1) + std::abs(j2) + std::abs(j3);
      CHECK(std::abs(j1 + j2 + j3) / scale < 1e-6);
    }
  }
}

TEST_CASE("flow keeps the annihilator and the isotropy class") {
  SubgroupSpec so2 = pair_so3_so2();
  std::mt19937_64 rng(13);
  auto gens = invariant_dual_polys(so2);
  auto f = certify(dual_from_poly(random_poly_in(gens, 3, rng)), so2);
  Eigen::VectorXd mu0(3);
  mu0 << 0.8, -0.4, 0.0;
  FlowOptions opts;
  opts.diagnostics_stride = 100;
  FlowResult res = lp_flow(f, {mu0}, so2, 10.0, 10000, opts);
  CHECK(res.ok);
  CHECK(res.max_annihilator_distance < 1e-8);
  CHECK(res.class_constant);
  CHECK(res.max_casimir_drift < 1e-6);

  // Halved-step oracle: endpoints agree.
  FlowResult res2 = lp_flow(f, {mu0}, so2, 10.0, 20000, opts);
  CHECK((res.steps.back().mu - res2.steps.back().mu).norm() < 1e-8);

  // Constant Hamiltonian freezes the trajectory.
  auto c = certify(dual_from_poly(Poly::constant(3, 1.0)), so2);
  FlowResult frozen = lp_flow(c, {mu0}, so2, 10.0, 100, opts);
  CHECK((frozen.steps.back().mu - mu0).norm() == 0.0);
}

TEST_CASE("flow on the half-turn pair moves and stays classified") {
  SubgroupSpec z2 = pair_so3_z2();
  std::mt19937_64 rng(17);
  auto gens = invariant_dual_polys(z2);
  auto f = certify(dual_from_poly(random_poly_in(gens, 3, rng)), z2);
  Eigen::VectorXd mu0(3);
  mu0 << 0.6, 0.2, 0.5;
  FlowOptions opts;
  opts.diagnostics_stride = 50;
  FlowResult res = lp_flow(f, {mu0}, z2, 10.0, 8000, opts);
  CHECK(res.ok);
  CHECK(res.class_constant);
  CHECK(res.max_casimir_drift < 1e-6);
  // The trajectory actually moves (nontrivial dynamics on this pair).
  CHECK((res.steps.back().mu - mu0).norm() > 1e-3);
}

TEST_CASE("leaf probes") {
  SubgroupSpec so2 = pair_so3_so2();
  LeafProbe lp = leaf_report({e(3, 0)}, so2);
  CHECK(lp.leaf_dim == 0);
  CHECK(lp.ham_rank == 1);
  CHECK(lp.orbit_in_span == 1);

  LeafProbe origin = leaf_report({Eigen::VectorXd::Zero(3)}, so2);
  CHECK(origin.leaf_dim == 0);

  SubgroupSpec free = pair_trivial(algebra_so3());
  LeafProbe sphere = leaf_report({e(3, 0)}, free);
  CHECK(sphere.leaf_dim == 2);
  CHECK(sphere.casimir_values.size() == 1);
  CHECK(sphere.casimir_values(0) == doctest::Approx(1.0));
}

TEST_CASE("stratified orbit pairing") {
  SubgroupSpec free = pair_trivial(algebra_so3());
  CovectorPoint mu{e(3, 2)};
  CHECK(stratified_kks_pair(mu, {e(3, 0)}, {e(3, 1)}, free) ==
        doctest::Approx(-1.0));
  CHECK(stratified_kks_pair(mu, {e(3, 0)}, {e(3, 0)}, free) == 0.0);

  // Circle pair, generic point: the only admissible directions are the
  // orbit directions, and they pair to zero.
  SubgroupSpec so2 = pair_so3_so2();
  CovectorPoint mu2{e(3, 0)};
  CHECK(std::abs(stratified_kks_pair(mu2, {e(3, 2)}, {e(3, 2)}, so2)) <
        1e-14);
  // e2 generates a direction leaving the annihilator: rejected.
  CHECK_THROWS_AS(stratified_kks_pair(mu2, {e(3, 1)}, {e(3, 2)}, so2),
                  InputError);

  // Half-turn pair at an axis point: the plane directions leave the axis
  // stratum, so they are rejected as well.
  SubgroupSpec z2 = pair_so3_z2();
  CovectorPoint axis{e(3, 2)};
  CHECK_THROWS_AS(stratified_kks_pair(axis, {e(3, 0)}, {e(3, 1)}, z2),
                  InputError);
}

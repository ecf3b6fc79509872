#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "lps/catalog.hpp"

using namespace lps;

namespace {

GaugeState axis_state(const GaugeChart& chart, double m3) {
  GaugeState s = default_state(chart);
  s.mu.setZero();
  s.mu(chart.fiber_dim() - 1) = m3;
  return s;
}

}  // namespace

TEST_CASE("poisson tensor blocks") {
  SUBCASE("flat chart at zero fiber: canonical block padded with zeros") {
    GaugeChart chart = *catalog_entry("flat2").gauge;
    GaugeState s = default_state(chart);
    s.mu.setZero();
    Eigen::MatrixXd pi = poisson_tensor(chart, s);
    Eigen::MatrixXd expect = Eigen::MatrixXd::Zero(5, 5);
    expect(0, 2) = expect(1, 3) = 1.0;
    expect(2, 0) = expect(3, 1) = -1.0;
    CHECK((pi - expect).norm() == 0.0);
  }
  SUBCASE("the (x,p) block is always the identity pairing") {
    for (const char* name : {"flat2", "abelian_b1", "free_hopf", "so3_free"}) {
      GaugeChart chart = *catalog_entry(name).gauge;
      GaugeState s = default_state(chart);
      Eigen::MatrixXd pi = poisson_tensor(chart, s);
      const int n = chart.n();
      CHECK((pi.block(0, n, n, n) - Eigen::MatrixXd::Identity(n, n)).norm() ==
            0.0);
    }
  }
  SUBCASE("rotation fiber block by structure-constant contraction") {
    GaugeChart chart = *catalog_entry("so3_free").gauge;
    GaugeState s = default_state(chart);
    s.mu << 0, 0, 1;
    Eigen::MatrixXd pi = poisson_tensor(chart, s);
    const int off = 2 * chart.n();
    // Oracle: pi_ab = -c^m_ab mu_m.
    const auto& c = chart.algebra()->structure();
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        double expect = 0.0;
        for (int m = 0; m < 3; ++m) expect -= c[m](a, b) * s.mu(m);
        CHECK(pi(off + a, off + b) == doctest::Approx(expect).epsilon(1e-15));
      }
    CHECK(pi(off + 0, off + 1) == doctest::Approx(-1.0));
  }
  SUBCASE("zero blocks are exactly zero") {
    GaugeChart chart = *catalog_entry("so3_free").gauge;
    GaugeState s = default_state(chart);
    Eigen::MatrixXd pi = poisson_tensor(chart, s);
    const int n = chart.n();
    CHECK(pi.block(0, 0, n, n).cwiseAbs().maxCoeff() == 0.0);       // (x,x)
    CHECK(pi.block(0, 2 * n, n, 3).cwiseAbs().maxCoeff() == 0.0);   // (x,mu)
    CHECK(pi.block(n, 2 * n, n, 3).cwiseAbs().maxCoeff() == 0.0);   // (p,mu)
  }
}

TEST_CASE("bracket spot values") {
  GaugeChart chart = *catalog_entry("abelian_b1").gauge;
  GaugeState s = default_state(chart);  // mu_e = 0.7
  REQUIRE(s.mu(0) == doctest::Approx(0.7));
  const double xp = gauge_bracket(chart, coordinate_field_x(chart, 0),
                                  coordinate_field_p(chart, 0), s);
  CHECK(xp == 1.0);
  const double pp = gauge_bracket(chart, coordinate_field_p(chart, 0),
                                  coordinate_field_p(chart, 1), s);
  CHECK(pp == doctest::Approx(0.7).epsilon(1e-12));

  GaugeChart flat = *catalog_entry("flat2").gauge;
  GaugeState sf = default_state(flat);
  CHECK(gauge_bracket(flat, coordinate_field_p(flat, 0),
                      coordinate_field_p(flat, 1), sf) == 0.0);
}

TEST_CASE("bracket antisymmetry and product rule on random fields") {
  GaugeChart chart = *catalog_entry("free_hopf").gauge;
  GaugeState s = default_state(chart);
  std::mt19937_64 rng(5);
  for (int t = 0; t < 15; ++t) {
    GaugeField f = random_gauge_field(chart, rng);
    GaugeField g = random_gauge_field(chart, rng);
    GaugeField h = random_gauge_field(chart, rng);
    const double fg = gauge_bracket(chart, f, g, s);
    CHECK(std::abs(fg + gauge_bracket(chart, g, f, s)) <
          1e-10 * (1 + std::abs(fg)));
    // Leibniz: {f, g h} = {f, g} h + g {f, h}.
    GaugeField gh(g.poly() * h.poly(), true);
    Eigen::VectorXd z = s.packed();
    const double lhs = gauge_bracket(chart, f, gh, s);
    const double rhs = fg * h.value(z) + g.value(z) *
                       gauge_bracket(chart, f, h, s);
    CHECK(std::abs(lhs - rhs) < 1e-10 * (1 + std::abs(lhs)));
  }
}

TEST_CASE("field certificates reject non-invariant fiber parts") {
  GaugeChart chart = *catalog_entry("so3_z2").gauge;
  // mu1 alone flips sign under the half-turn.
  GaugeField bad(Poly::variable(chart.state_dim(), 2 * chart.n()));
  CHECK_THROWS_AS(certify_gauge_field(chart, bad), InputError);
  // mu1^2 is invariant.
  Poly sq = Poly::variable(chart.state_dim(), 2 * chart.n()) *
            Poly::variable(chart.state_dim(), 2 * chart.n());
  GaugeField good(sq);
  certify_gauge_field(chart, good);
  CHECK(good.certified());
}

TEST_CASE("state validation") {
  GaugeChart chart = *catalog_entry("so3_z2").gauge;
  GaugeState s = axis_state(chart, 0.7);
  validate_state(chart, s);  // on the declared stratum
  GaugeState off = s;
  off.mu(0) = 0.4;  // leaves the axis stratum
  CHECK_THROWS_AS(validate_state(chart, off), InputError);
  GaugeState outside = s;
  outside.x(0) = 100.0;
  CHECK_THROWS_AS(validate_state(chart, outside), InputError);
}

TEST_CASE("jacobi residuals across the catalog") {
  SUBCASE("flat chart: constant tensor") {
    GaugeChart chart = *catalog_entry("flat2").gauge;
    CHECK(jacobi_residual(chart, default_state(chart), 20, 2).max_residual <
          1e-12);
  }
  SUBCASE("unit-curvature chart") {
    GaugeChart chart = *catalog_entry("abelian_b1").gauge;
    CHECK(jacobi_residual(chart, default_state(chart), 20, 2).max_residual <
          1e-10);
  }
  SUBCASE("monopole chart") {
    GaugeChart chart = *catalog_entry("free_hopf").gauge;
    CHECK(jacobi_residual(chart, default_state(chart), 20, 2).max_residual <
          1e-8);
  }
  SUBCASE("half-turn chart on its axis stratum") {
    GaugeChart chart = *catalog_entry("so3_z2").gauge;
    CHECK(jacobi_residual(chart, axis_state(chart, 0.7), 20, 2).max_residual <
          1e-8);
  }
  SUBCASE("negative control fails as constructed") {
    GaugeChart chart = *catalog_entry("negative_control").gauge;
    CHECK(jacobi_residual(chart, default_state(chart), 10, 2).max_residual >
          1e-3);
  }
}

TEST_CASE("gauge flow conservation") {
  SUBCASE("free motion on the flat chart is a straight line") {
    GaugeChart chart = *catalog_entry("flat2").gauge;
    GaugeState s0 = default_state(chart);
    s0.x << -0.5, -0.4;
    s0.p << 0.08, 0.05;
    const int N = chart.state_dim();
    Poly kinetic(N);
    for (int i = 0; i < 2; ++i)
      kinetic += Poly::variable(N, 2 + i) * Poly::variable(N, 2 + i) * 0.5;
    GaugeField f(kinetic, true);
    GaugeFlowResult res = gauge_flow(chart, f, s0, 10.0, 2000, 200);
    REQUIRE(res.ok);
    const auto& last = res.steps.back();
    CHECK((last.z.segment(2, 2) - s0.p).norm() < 1e-12);   // p constant
    CHECK((last.z.tail(1) - s0.mu).norm() < 1e-12);        // mu constant
    CHECK((last.z.head(2) - (s0.x + 10.0 * s0.p)).norm() < 1e-9);
  }
  SUBCASE("energy and fiber invariants on the rotation fiber") {
    GaugeChart chart = *catalog_entry("so3_free").gauge;
    GaugeState s0 = default_state(chart);
    s0.x << 0.1, -0.1, 0.2;
    s0.p << 0.1, 0.12, -0.08;
    s0.mu << 0.4, -0.3, 0.5;
    const int N = chart.state_dim();
    // Rigid-body style fiber weights: the fiber point tumbles while its
    // quadratic invariant must stay put.
    Poly ham(N);
    const double w[3] = {0.5, 0.3, 0.2};
    for (int i = 0; i < 3; ++i) {
      ham += Poly::variable(N, 3 + i) * Poly::variable(N, 3 + i) * 0.5;
      ham += Poly::variable(N, i) * Poly::variable(N, i) * 0.5;
      ham += Poly::variable(N, 6 + i) * Poly::variable(N, 6 + i) * w[i];
    }
    GaugeField f(ham, true);
    GaugeFlowResult res = gauge_flow(chart, f, s0, 10.0, 10000, 500);
    REQUIRE(res.ok);
    CHECK(res.max_energy_drift < 1e-8);
    CHECK(res.max_casimir_drift < 1e-8);
    CHECK(res.class_constant);
    // The fiber actually moved.
    CHECK((res.steps.back().z.tail(3) - s0.mu).norm() > 1e-2);
    // Halved-step oracle.
    GaugeFlowResult res2 = gauge_flow(chart, f, s0, 10.0, 20000, 1000);
    CHECK((res.steps.back().z - res2.steps.back().z).norm() < 1e-8);
  }
}

TEST_CASE("minimal coupling form") {
  SUBCASE("flat chart: canonical block only") {
    GaugeChart chart = *catalog_entry("flat2").gauge;
    GaugeState s = default_state(chart);
    GaugeLeafBasis basis = leaf_tangent_basis(chart, s);
    Eigen::MatrixXd w = minimal_coupling_form(chart, s, basis);
    CHECK(w.rows() == 4 + basis.dim());
    CHECK(w.topLeftCorner(2, 2).cwiseAbs().maxCoeff() == 0.0);
    CHECK((w.block(0, 2, 2, 2) - Eigen::MatrixXd::Identity(2, 2)).norm() ==
          0.0);
  }
  SUBCASE("unit-curvature chart: base two-form picks up -mu") {
    GaugeChart chart = *catalog_entry("abelian_b1").gauge;
    GaugeState s = default_state(chart);  // mu_e = 0.7
    GaugeLeafBasis basis = leaf_tangent_basis(chart, s);
    Eigen::MatrixXd w = minimal_coupling_form(chart, s, basis);
    CHECK(w(0, 1) == doctest::Approx(-0.7));
  }
  SUBCASE("transitive chart over the circle pair has no fiber directions") {
    GaugeChart chart = *catalog_entry("homogeneous_t_star_s2").gauge;
    GaugeState s = default_state(chart);
    GaugeLeafBasis basis = leaf_tangent_basis(chart, s);
    CHECK(basis.dim() == 0);
  }
}

TEST_CASE("leaf consistency") {
  SUBCASE("coordinate pairs") {
    GaugeChart chart = *catalog_entry("abelian_b1").gauge;
    GaugeState s = default_state(chart);
    CHECK(leaf_consistency(chart, s, coordinate_field_x(chart, 0),
                           coordinate_field_p(chart, 0)) < 1e-10);
    CHECK(leaf_consistency(chart, s, coordinate_field_p(chart, 0),
                           coordinate_field_p(chart, 1)) < 1e-8);
  }
  SUBCASE("random fields across charts") {
    std::mt19937_64 rng(9);
    for (const char* name :
         {"flat2", "abelian_b1", "free_hopf", "so3_free"}) {
      CAPTURE(name);
      GaugeChart chart = *catalog_entry(name).gauge;
      GaugeState s = default_state(chart);
      for (int t = 0; t < 8; ++t) {
        GaugeField f = random_gauge_field(chart, rng);
        GaugeField g = random_gauge_field(chart, rng);
        const double lhs = gauge_bracket(chart, f, g, s);
        CHECK(leaf_consistency(chart, s, f, g) < 1e-6 * (1 + std::abs(lhs)));
      }
    }
  }
  SUBCASE("fiber-only fields on a point leaf vanish on both sides") {
    GaugeChart chart = *catalog_entry("homogeneous_t_star_s2").gauge;
    GaugeState s = default_state(chart);
    std::mt19937_64 rng(11);
    GaugeField f = random_gauge_field(chart, rng);
    GaugeField g = random_gauge_field(chart, rng);
    CHECK(std::abs(gauge_bracket(chart, f, g, s)) < 1e-14);
    CHECK(leaf_consistency(chart, s, f, g) < 1e-14);
  }
  SUBCASE("half-turn chart on the axis stratum") {
    GaugeChart chart = *catalog_entry("so3_z2").gauge;
    GaugeState s = axis_state(chart, 0.7);
    std::mt19937_64 rng(13);
    for (int t = 0; t < 8; ++t) {
      GaugeField f = random_gauge_field(chart, rng);
      GaugeField g = random_gauge_field(chart, rng);
      const double lhs = gauge_bracket(chart, f, g, s);
      CHECK(leaf_consistency(chart, s, f, g) < 1e-6 * (1 + std::abs(lhs)));
    }
  }
}

TEST_CASE("momentum embedding round trip") {
  GaugeChart chart = *catalog_entry("so3_z2").gauge;
  GaugeState s = axis_state(chart, 0.7);
  CovectorPoint mu = momentum_of_state(chart, s);
  CHECK(mu.coords.size() == 3);
  CHECK(mu.coords(2) == 0.7);
  IsotropyClass cls = isotropy_at(mu, chart.subgroup());
  CHECK(cls.same_type(chart.declared_class()));

  GaugeState zero = axis_state(chart, 0.0);
  // The origin has full stabilizer, different from the declared class, but
  // the embedding itself is still the zero covector.
  CHECK(momentum_of_state(chart, zero).coords.norm() == 0.0);
}

TEST_CASE("free-case three-term assembly matches the tensor") {
  GaugeChart chart = *catalog_entry("free_hopf").gauge;
  GaugeState s = default_state(chart);
  std::mt19937_64 rng(17);
  for (int t = 0; t < 50; ++t) {
    GaugeField f = random_gauge_field(chart, rng);
    GaugeField g = random_gauge_field(chart, rng);
    ThreeTermBracket ind = three_term_bracket(chart, f, g, s);
    ThreeTermBracket ten = bracket_terms_from_tensor(chart, f, g, s);
    const double scale = 1 + std::abs(ten.total());
    CHECK(std::abs(ind.canonical - ten.canonical) < 1e-8 * scale);
    CHECK(std::abs(ind.coupling - ten.coupling) < 1e-8 * scale);
    CHECK(std::abs(ind.fiber - ten.fiber) < 1e-8 * scale);
    CHECK(std::abs(ind.total() - gauge_bracket(chart, f, g, s)) <
          1e-8 * scale);
  }
}

TEST_CASE("transitive chart collapses to the fiber bracket") {
  GaugeChart chart = *catalog_entry("homogeneous_t_star_s2").gauge;
  GaugeState s = default_state(chart);
  Eigen::MatrixXd pi = poisson_tensor(chart, s);
  REQUIRE(pi.rows() == 2);
  // Oracle: the direct structure-constant contraction on the fiber slots.
  const auto& c = chart.algebra()->structure();
  const int r = chart.r();
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      double expect = 0.0;
      for (int m = r; m < chart.k(); ++m)
        expect -= c[m](r + a, r + b) * s.mu(m - r);
      CHECK(pi(a, b) == expect);
    }
  // For the circle pair the annihilator bracket is identically zero.
  CHECK(pi.cwiseAbs().maxCoeff() == 0.0);
}

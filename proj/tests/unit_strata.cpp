#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "lps/linalg.hpp"
#include "lps/strata.hpp"

using namespace lps;

namespace {
Eigen::VectorXd e(int k, int i) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(k);
  v(i) = 1.0;
  return v;
}
}  // namespace

TEST_CASE("annihilator of the circle subgroup") {
  SubgroupSpec h = pair_so3_so2();
  AnnihilatorBasis ann = annihilator_basis(h);
  CHECK(ann.vectors.cols() == 2);
  // Oracle: null space of the 1x3 pairing matrix is the mu1-mu2 plane.
  Eigen::MatrixXd plane(3, 2);
  plane << 1, 0, 0, 1, 0, 0;
  CHECK(subspace_distance(ann.vectors, plane) < 1e-12);
  CHECK((ann.projector * ann.projector - ann.projector).norm() < 1e-12);
  CHECK((ann.projector * e(3, 2)).norm() < 1e-14);
}

TEST_CASE("annihilator edge cases") {
  SubgroupSpec free = pair_trivial(algebra_so3());
  CHECK(annihilator_basis(free).vectors.cols() == 3);
  SubgroupSpec full = pair_full(algebra_so3());
  CHECK(annihilator_basis(full).vectors.cols() == 0);
}

TEST_CASE("subgroup validation") {
  // span{e1, e2} is not closed in so3 and must be rejected.
  Eigen::MatrixXd bad(3, 2);
  bad << 1, 0, 0, 1, 0, 0;
  CHECK_THROWS_AS(SubgroupSpec(algebra_so3(), bad), InputError);
  Eigen::MatrixXd rank_def(3, 2);
  rank_def << 1, 1, 0, 0, 0, 0;
  CHECK_THROWS_AS(SubgroupSpec(algebra_so3(), rank_def), InputError);
}

TEST_CASE("normalizer algebra of the catalog pairs") {
  // Circle about e3: n = h, so the complement is empty.
  SubgroupSpec so2 = pair_so3_so2();
  Eigen::MatrixXd n = normalizer_algebra(so2);
  CHECK(n.cols() == 1);
  CHECK(subspace_distance(n, e(3, 2)) < 1e-12);
  CHECK(normalizer_complement(so2).cols() == 0);

  SubgroupSpec free = pair_trivial(algebra_so3());
  CHECK(normalizer_algebra(free).cols() == 3);

  // Half-turn: the fixed axis survives, n/h is one-dimensional.
  SubgroupSpec z2 = pair_so3_z2();
  Eigen::MatrixXd nc = normalizer_complement(z2);
  CHECK(nc.cols() == 1);
  CHECK(subspace_distance(nc, e(3, 2)) < 1e-10);
}

TEST_CASE("fixed sets") {
  SubgroupSpec so2 = pair_so3_so2();
  // On g/h the induced circle action is a plane rotation: only 0 is fixed.
  CHECK(fixed_set(so2, ActionSpace::QuotientGh).cols() == 0);
  CHECK(fixed_set(so2, ActionSpace::Annihilator).cols() == 0);

  SubgroupSpec z2 = pair_so3_z2();
  Eigen::MatrixXd fx = fixed_set(z2, ActionSpace::Annihilator);
  CHECK(fx.cols() == 1);
  CHECK(subspace_distance(fx, e(3, 2)) < 1e-10);

  SubgroupSpec free = pair_trivial(algebra_so3());
  CHECK(fixed_set(free, ActionSpace::Annihilator).cols() == 3);
  CHECK(fixed_set(free, ActionSpace::QuotientGh).cols() == 3);
}

TEST_CASE("fixed set of the quotient equals the normalizer complement") {
  for (auto h : {pair_so3_so2(), pair_su2_u1(), pair_so3_z2()}) {
    CAPTURE(h.name());
    Eigen::MatrixXd lhs = fixed_set(h, ActionSpace::QuotientGh);
    Eigen::MatrixXd rhs = normalizer_complement(h);
    CHECK(subspace_distance(lhs, rhs) < 1e-8);
  }
}

TEST_CASE("quotient structure constants") {
  // n/h for the half-turn pair is one-dimensional, hence abelian.
  auto cs = quotient_structure(pair_so3_z2());
  REQUIRE(cs.size() == 1);
  CHECK(cs[0].cwiseAbs().maxCoeff() == 0.0);
  auto cs3 = quotient_structure(pair_trivial(algebra_so3()));
  CHECK(cs3.size() == 3);
}

TEST_CASE("isotropy classification") {
  SubgroupSpec so2 = pair_so3_so2();
  IsotropyClass origin = isotropy_at({Eigen::VectorXd::Zero(3)}, so2);
  CHECK(origin.stabilizer_dim == 1);
  CHECK(origin.component_order == 1);

  IsotropyClass generic = isotropy_at({e(3, 0)}, so2);
  CHECK(generic.stabilizer_dim == 0);
  CHECK(generic.component_order == 1);

  // Same computation in the su2 catalog basis.
  SubgroupSpec u1 = pair_su2_u1();
  IsotropyClass su2_generic = isotropy_at({e(3, 0)}, u1);
  CHECK(su2_generic.stabilizer_dim == 0);
  CHECK(su2_generic.component_order == 1);

  // Not in the annihilator -> input error.
  CHECK_THROWS_AS(isotropy_at({e(3, 2)}, so2), InputError);

  // Half-turn pair: axis keeps both elements, generic points only one.
  SubgroupSpec z2 = pair_so3_z2();
  CHECK(isotropy_at({e(3, 2)}, z2).component_order == 2);
  Eigen::VectorXd off(3);
  off << 0.3, -0.8, 0.4;
  CHECK(isotropy_at({off}, z2).component_order == 1);
}

TEST_CASE("isotropy class is conjugation invariant") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> angle(-3.0, 3.0);
  SubgroupSpec so2 = pair_so3_so2();
  const auto& g = so2.algebra();
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int t = 0; t < 20; ++t) {
    Eigen::VectorXd mu(3);
    mu << normal(rng), normal(rng), 0.0;
    GroupElement h = g.exponential((angle(rng) * e(3, 2)).eval());
    IsotropyClass a = isotropy_at({mu}, so2);
    IsotropyClass b = isotropy_at({g.group_coadjoint(h, mu)}, so2);
    CHECK(a.stabilizer_dim == b.stabilizer_dim);
    CHECK(a.component_order == b.component_order);
  }
}

TEST_CASE("strata enumeration for the catalog pairs") {
  SUBCASE("circle pair: origin plus generic") {
    StrataReport rep = enumerate_strata(pair_so3_so2(), 120, 42);
    REQUIRE(rep.classes.size() == 2);
    CHECK(rep.classes[0].is_origin);
    CHECK(rep.classes[0].cls.stabilizer_dim == 1);
    CHECK(rep.classes[0].stratum_dim == 0);
    CHECK(rep.classes[0].quotient_dim == 0);
    CHECK(rep.classes[1].cls.stabilizer_dim == 0);
    CHECK(rep.classes[1].stratum_dim == 2);
    CHECK(rep.classes[1].orbit_dim == 1);
    CHECK(rep.classes[1].quotient_dim == 1);
    CHECK_FALSE(rep.classes[1].low_confidence);
  }
  SUBCASE("unitary circle pair matches") {
    StrataReport rep = enumerate_strata(pair_su2_u1(), 120, 42);
    CHECK(rep.classes.size() == 2);
  }
  SUBCASE("half-turn pair: origin, fixed axis, generic") {
    StrataReport rep = enumerate_strata(pair_so3_z2(), 200, 42);
    REQUIRE(rep.classes.size() == 3);
    CHECK(rep.classes[0].is_origin);
    CHECK(rep.classes[0].cls.component_order == 2);
    CHECK(rep.classes[1].cls.component_order == 2);
    CHECK(rep.classes[1].stratum_dim == 1);
    CHECK(rep.classes[1].quotient_dim == 1);
    CHECK(rep.classes[1].deterministic_probe);
    CHECK(rep.classes[2].cls.component_order == 1);
    CHECK(rep.classes[2].stratum_dim == 3);
  }
  SUBCASE("trivial subgroup: a single class") {
    StrataReport rep = enumerate_strata(pair_trivial(algebra_so3()), 60, 42);
    CHECK(rep.classes.size() == 1);
    CHECK(rep.classes[0].stratum_dim == 3);
  }
}

TEST_CASE("origin class is maximal in the sampled order") {
  for (auto h : {pair_so3_so2(), pair_so3_z2()}) {
    CAPTURE(h.name());
    StrataReport rep = enumerate_strata(h, 150, 7);
    int origin = -1;
    for (size_t i = 0; i < rep.classes.size(); ++i)
      if (rep.classes[i].is_origin) origin = static_cast<int>(i);
    REQUIRE(origin >= 0);
    for (const auto& [a, b] : rep.partial_order) CHECK(a != origin);
    bool has_pred = false;
    for (const auto& [a, b] : rep.partial_order)
      if (b == origin) has_pred = true;
    CHECK(has_pred);
  }
}

TEST_CASE("component group enumeration") {
  SubgroupSpec z2 = pair_so3_z2();
  bool capped = true;
  auto elems = enumerate_component_group(z2, &capped);
  CHECK(elems.size() == 2);
  CHECK_FALSE(capped);
}

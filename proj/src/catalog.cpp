#include "lps/catalog.hpp"

#include <cmath>

namespace lps {

namespace {

Box square_box(int n, double half) {
  Box b;
  b.lo = Eigen::VectorXd::Constant(n, -half);
  b.hi = Eigen::VectorXd::Constant(n, half);
  return b;
}

Poly zero2() { return Poly(2); }

}  // namespace

ConnectionChart chart_flat2() {
  std::vector<std::vector<Poly>> coeffs{{zero2(), zero2()}};
  return chart_from_polys(2, algebra_u1(), coeffs, square_box(2, 1.2),
                          "flat2");
}

ConnectionChart chart_abelian_b1() {
  // A = (-x2 dx1 + x1 dx2) / 2, so the curvature coefficient is 1.
  std::vector<std::vector<Poly>> coeffs{
      {Poly::variable(2, 1) * (-0.5), Poly::variable(2, 0) * 0.5}};
  return chart_from_polys(2, algebra_u1(), coeffs, square_box(2, 1.2),
                          "abelian_b1");
}

ConnectionChart chart_hopf() {
  // Monopole potential in stereographic coordinates: A = (-x2 dx1 + x1 dx2)
  // / (1 + r^2); its curvature is half the round area form, 2 / (1+r^2)^2.
  auto value = [](const Eigen::VectorXd& x) {
    const double w = 1.0 + x.squaredNorm();
    Eigen::MatrixXd a(1, 2);
    a << -x(1) / w, x(0) / w;
    return a;
  };
  auto deriv = [](const Eigen::VectorXd& x, int l) {
    const double w = 1.0 + x.squaredNorm();
    Eigen::MatrixXd d(1, 2);
    // d/dx_l of (-x2/w, x1/w) with dw/dx_l = 2 x_l.
    d(0, 0) = (l == 1 ? -1.0 / w : 0.0) + x(1) * 2.0 * x(l) / (w * w);
    d(0, 1) = (l == 0 ? 1.0 / w : 0.0) - x(0) * 2.0 * x(l) / (w * w);
    return d;
  };
  return ConnectionChart(2, algebra_u1(), value, square_box(2, 1.2), "hopf",
                         deriv);
}

ConnectionChart chart_so3_poly() {
  // Nonabelian coefficients with nonvanishing quadratic curvature term.
  std::vector<std::vector<Poly>> coeffs(3,
                                        std::vector<Poly>(3, Poly(3)));
  coeffs[0][0] = Poly::variable(3, 1);                     // A_1 = x2 e1 + ...
  coeffs[2][0] = Poly::variable(3, 2) * 0.3;               //       + 0.3 x3 e3
  coeffs[1][1] = Poly::variable(3, 0);                     // A_2 = x1 e2
  coeffs[0][2] = Poly::variable(3, 0) * Poly::variable(3, 1) * 0.5;
  return chart_from_polys(3, algebra_so3(), coeffs, square_box(3, 1.0),
                          "so3_poly");
}

ConnectionChart chart_flat3_u1() {
  std::vector<std::vector<Poly>> coeffs{{Poly(3), Poly(3), Poly(3)}};
  return chart_from_polys(3, algebra_u1(), coeffs, square_box(3, 1.0),
                          "flat3_u1");
}

CurvatureTable curvature_nonclosed() {
  // B = x3 dx1 ^ dx2: not closed, so the bracket built from it must fail
  // the Jacobi identity.
  std::map<std::pair<int, int>, std::vector<Poly>> upper;
  upper[{0, 1}] = {Poly::variable(3, 2)};
  return curvature_from_polys(3, 1, upper);
}

namespace {

IsotropyClass class_of(int stab, int order) {
  IsotropyClass c;
  c.stabilizer_dim = stab;
  c.component_order = order;
  return c;
}

GaugeChart make_free_gauge(const ConnectionChart& chart, AlgebraPtr algebra,
                           std::vector<int> coupling, std::string name) {
  return GaugeChart(algebra, pair_trivial(algebra), chart,
                    curvature_structure(chart), std::move(coupling),
                    class_of(0, 1), std::move(name));
}

GaugeChart make_so3_z2_gauge() {
  // Coupling through the one-dimensional fixed block (the e3 slot); states
  // live on the axis stratum fixed by the half-turn.
  auto g = algebra_so3();
  ConnectionChart base = chart_abelian_b1();
  return GaugeChart(g, pair_so3_z2(), base, curvature_structure(base), {2},
                    class_of(0, 2), "so3_z2_gauge");
}

GaugeChart make_t_star_s2_gauge() {
  // Transitive case: no base directions, fiber = annihilator of the
  // stabilizer in the adapted basis (e3, e1, e2).
  Eigen::MatrixXd basis(3, 3);
  basis << 0, 1, 0, 0, 0, 1, 1, 0, 0;  // columns: e3, e1, e2
  auto adapted = std::make_shared<LieAlgebraSpec>(
      algebra_so3()->rebased(basis, {"e3", "e1", "e2"}, "so3_adapted"));
  Eigen::MatrixXd sub(3, 1);
  sub << 1, 0, 0;
  SubgroupSpec h(adapted, sub, {}, "so2_adapted");
  return GaugeChart(adapted, std::move(h), std::nullopt, std::nullopt, {},
                    class_of(0, 1), "t_star_s2");
}

GaugeChart make_negative_control() {
  auto g = algebra_u1();
  return GaugeChart(g, pair_trivial(g), chart_flat3_u1(),
                    curvature_nonclosed(), {0}, class_of(0, 1),
                    "negative_control");
}

std::vector<CatalogEntry> build_catalog() {
  std::vector<CatalogEntry> entries;

  {
    CatalogEntry e;
    e.name = "so3_so2";
    e.summary = "rotation algebra with the circle subgroup about e3";
    e.algebra = algebra_so3();
    e.subgroup = pair_so3_so2();
    e.expected = {
        {"annihilator_dim", 2, "exact", ""},
        {"strata_classes", 2, "oracle", "grid classification"},
        {"normalizer_complement_dim", 0, "oracle", "normalizer linear solve"},
        {"fixed_quotient_dim", 0, "oracle", "induced-action kernel"},
        {"leaf_dim_generic", 0, "oracle", "hamiltonian direction rank"},
    };
    entries.push_back(std::move(e));
  }
  {
    CatalogEntry e;
    e.name = "su2_u1";
    e.summary = "special unitary algebra with its circle subgroup";
    e.algebra = algebra_su2();
    e.subgroup = pair_su2_u1();
    e.expected = {
        {"annihilator_dim", 2, "exact", ""},
        {"strata_classes", 2, "oracle", "grid classification"},
        {"normalizer_complement_dim", 0, "oracle", "normalizer linear solve"},
        {"fixed_quotient_dim", 0, "oracle", "induced-action kernel"},
        {"leaf_dim_generic", 0, "oracle", "hamiltonian direction rank"},
    };
    entries.push_back(std::move(e));
  }
  {
    CatalogEntry e;
    e.name = "so3_z2";
    e.summary = "rotation algebra with the half-turn two-element subgroup";
    e.algebra = algebra_so3();
    e.subgroup = pair_so3_z2();
    e.gauge = make_so3_z2_gauge();
    e.expected = {
        {"annihilator_dim", 3, "exact", ""},
        {"strata_classes", 3, "oracle", "grid classification"},
        {"normalizer_complement_dim", 1, "oracle", "normalizer linear solve"},
        {"fixed_quotient_dim", 1, "oracle", "induced-action kernel"},
        {"fixed_annihilator_dim", 1, "oracle", "eigenspace of the half-turn"},
    };
    entries.push_back(std::move(e));
  }
  {
    CatalogEntry e;
    e.name = "free_hopf";
    e.summary = "free circle fiber over the monopole chart";
    e.algebra = algebra_u1();
    e.subgroup = pair_trivial(algebra_u1());
    e.chart = chart_hopf();
    e.curvature = curvature_structure(*e.chart);
    e.gauge = make_free_gauge(*e.chart, algebra_u1(), {0}, "free_hopf");
    e.expected = {
        {"curvature_at_origin", 2.0, "oracle", "closed-form potential"},
        {"annihilator_dim", 1, "exact", ""},
    };
    entries.push_back(std::move(e));
  }
  {
    CatalogEntry e;
    e.name = "homogeneous_t_star_s2";
    e.summary = "transitive chart: fiber bracket of the sphere quotient";
    e.gauge = make_t_star_s2_gauge();
    e.algebra = e.gauge->algebra();
    e.subgroup = e.gauge->subgroup();
    e.expected = {
        {"fiber_tensor_norm_on_annihilator", 0.0, "oracle",
         "structure-constant contraction"},
        {"leaf_dim_generic", 0, "oracle", "hamiltonian direction rank"},
    };
    entries.push_back(std::move(e));
  }
  {
    CatalogEntry e;
    e.name = "so3_free";
    e.summary = "free rotation fiber over a polynomial nonabelian chart";
    e.algebra = algebra_so3();
    e.subgroup = pair_trivial(algebra_so3());
    e.chart = chart_so3_poly();
    e.curvature = curvature_structure(*e.chart);
    e.gauge = make_free_gauge(*e.chart, algebra_so3(), {0, 1, 2}, "so3_free");
    e.expected = {
        {"leaf_dim_generic", 2, "oracle", "hamiltonian direction rank"},
        {"annihilator_dim", 3, "exact", ""},
    };
    entries.push_back(std::move(e));
  }
  {
    CatalogEntry e;
    e.name = "abelian_b1";
    e.summary = "unit constant curvature over the plane";
    e.algebra = algebra_u1();
    e.subgroup = pair_trivial(algebra_u1());
    e.chart = chart_abelian_b1();
    e.curvature = curvature_structure(*e.chart);
    e.gauge = make_free_gauge(*e.chart, algebra_u1(), {0}, "abelian_b1");
    e.expected = {
        {"curvature_constant", 1.0, "oracle", "hand differentiation"},
        {"unit_square_holonomy_angle", -1.0, "oracle",
         "surface integral of the curvature"},
    };
    entries.push_back(std::move(e));
  }
  {
    CatalogEntry e;
    e.name = "flat2";
    e.summary = "flat chart over the plane";
    e.algebra = algebra_u1();
    e.subgroup = pair_trivial(algebra_u1());
    e.chart = chart_flat2();
    e.curvature = curvature_structure(*e.chart);
    e.gauge = make_free_gauge(*e.chart, algebra_u1(), {0}, "flat2");
    e.expected = {
        {"curvature_constant", 0.0, "exact", ""},
    };
    entries.push_back(std::move(e));
  }
  {
    CatalogEntry e;
    e.name = "negative_control";
    e.summary = "deliberately non-closed curvature table; the bracket built "
                "from it must fail the Jacobi identity";
    e.algebra = algebra_u1();
    e.subgroup = pair_trivial(algebra_u1());
    e.chart = chart_flat3_u1();
    e.curvature = curvature_nonclosed();
    e.gauge = make_negative_control();
    e.expected = {
        {"jacobi_failure_floor", 1e-3, "oracle", "taken from the defect of "
                                                 "the constructed table"},
    };
    entries.push_back(std::move(e));
  }
  return entries;
}

}  // namespace

const std::vector<CatalogEntry>& catalog() {
  static const std::vector<CatalogEntry> entries = build_catalog();
  return entries;
}

const CatalogEntry& catalog_entry(const std::string& name) {
  for (const auto& e : catalog())
    if (e.name == name) return e;
  throw InputError("unknown catalog entry: " + name);
}

bool catalog_has(const std::string& name) {
  for (const auto& e : catalog())
    if (e.name == name) return true;
  return false;
}

GaugeState default_state(const GaugeChart& chart, double mu_scale) {
  GaugeState s;
  const int n = chart.n(), m = chart.fiber_dim();
  s.x = Eigen::VectorXd::Zero(n);
  s.p = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) {
    s.x(i) = 0.1 + 0.05 * i;
    s.p(i) = 0.2 - 0.03 * i;
  }
  s.mu = Eigen::VectorXd::Zero(m);
  if (m > 0) {
    if (chart.name() == "so3_z2_gauge") {
      s.mu(m - 1) = mu_scale;  // axis stratum
    } else {
      for (int i = 0; i < m; ++i) s.mu(i) = mu_scale * (1.0 - 0.2 * i);
    }
  }
  return s;
}

}  // namespace lps

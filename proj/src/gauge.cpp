#include "lps/gauge.hpp"

#include <cmath>

#include "lps/linalg.hpp"

namespace lps {

GaugeChart::GaugeChart(AlgebraPtr algebra, SubgroupSpec subgroup,
                       std::optional<ConnectionChart> base,
                       std::optional<CurvatureTable> curvature,
                       std::vector<int> coupling,
                       IsotropyClass declared_class, std::string name)
    : algebra_(std::move(algebra)),
      subgroup_(std::move(subgroup)),
      base_(std::move(base)),
      curvature_(std::move(curvature)),
      coupling_(std::move(coupling)),
      declared_class_(declared_class),
      name_(std::move(name)) {
  if (!algebra_) throw InputError("gauge chart needs an algebra");
  if (subgroup_.parent().get() != algebra_.get())
    throw InputError("gauge chart subgroup must live on the chart algebra");
  const int rr = r();
  if (rr > 0) {
    Eigen::MatrixXd first =
        Eigen::MatrixXd::Identity(k(), k()).leftCols(rr);
    if (subspace_distance(subgroup_.subalgebra(), first) > 1e-10)
      throw InputError(
          "gauge chart basis is not adapted (stabilizer subalgebra must span "
          "the leading basis vectors)");
  }
  if (base_) {
    if (!curvature_)
      throw InputError("gauge chart with a base needs a curvature table");
    if (static_cast<int>(coupling_.size()) != base_->fiber_dim())
      throw InputError("coupling must assign a slot per connection generator");
    for (int c : coupling_)
      if (c < rr || c >= k())
        throw InputError("coupling slot outside the fiber block");
  } else if (!coupling_.empty()) {
    throw InputError("coupling without a base chart");
  }
}

Eigen::VectorXd GaugeChart::embed_fiber(const Eigen::VectorXd& mu) const {
  if (mu.size() != fiber_dim())
    throw InputError("fiber coordinates have wrong length");
  Eigen::VectorXd full = Eigen::VectorXd::Zero(k());
  full.tail(fiber_dim()) = mu;
  return full;
}

Eigen::VectorXd GaugeState::packed() const {
  Eigen::VectorXd z(x.size() + p.size() + mu.size());
  z << x, p, mu;
  return z;
}

GaugeState GaugeState::unpack(const GaugeChart& chart,
                              const Eigen::VectorXd& z) {
  const int n = chart.n(), m = chart.fiber_dim();
  if (z.size() != 2 * n + m)
    throw InputError("packed state has wrong length");
  GaugeState s;
  s.x = z.head(n);
  s.p = z.segment(n, n);
  s.mu = z.tail(m);
  return s;
}

void validate_state(const GaugeChart& chart, const GaugeState& s) {
  const int n = chart.n();
  if (s.x.size() != n || s.p.size() != n || s.mu.size() != chart.fiber_dim())
    throw InputError("gauge state has wrong block sizes");
  if (n > 0) chart.base()->require_inside(s.x);
  IsotropyClass cls =
      isotropy_at({chart.embed_fiber(s.mu)}, chart.subgroup(), 1e-8);
  if (!cls.same_type(chart.declared_class()))
    throw InputError("state fiber class (" +
                     std::to_string(cls.stabilizer_dim) + "," +
                     std::to_string(cls.component_order) +
                     ") does not match the chart stratum");
}

GaugeField::GaugeField(Poly poly, bool fiber_invariant_by_construction)
    : poly_(std::move(poly)), certified_(fiber_invariant_by_construction) {}

InvariantFamily fiber_invariants(const GaugeChart& chart) {
  return invariant_family_for(slot_annihilator_action(chart.subgroup()));
}

std::vector<Poly> fiber_generators_packed(const GaugeChart& chart) {
  InvariantFamily fam = fiber_invariants(chart);
  std::vector<Poly> out;
  out.reserve(fam.generators.size());
  for (const auto& g : fam.generators)
    out.push_back(g.shifted(chart.state_dim(), 2 * chart.n()));
  return out;
}

void certify_gauge_field(const GaugeChart& chart, GaugeField& field,
                         std::uint64_t seed) {
  const int n = chart.n(), m = chart.fiber_dim(), N = chart.state_dim();
  RestrictedAction act = slot_annihilator_action(chart.subgroup());
  std::vector<GroupElement> comps =
      enumerate_component_group(chart.subgroup());
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(-0.5, 0.5);
  for (int trial = 0; trial < 24; ++trial) {
    Eigen::VectorXd z(N);
    for (int i = 0; i < 2 * n; ++i) z(i) = unif(rng);
    Eigen::VectorXd mu(m);
    for (int i = 0; i < m; ++i) mu(i) = normal(rng);
    z.tail(m) = mu;
    const double fv = field.value(z);
    Eigen::VectorXd grad = field.gradient(z).tail(m);
    const double scale = 1.0 + std::abs(fv) + grad.norm() * mu.norm();
    for (const auto& d : act.infinitesimal) {
      const double res = std::abs(grad.dot(d * mu)) / scale;
      if (res > 1e-6)
        throw InputError("gauge field fiber part is not invariant "
                         "(infinitesimal residual " +
                         std::to_string(res) + ")");
    }
    const Eigen::MatrixXd slots = act.basis;
    for (const auto& e : comps) {
      Eigen::VectorXd mu_full = chart.embed_fiber(mu);
      Eigen::VectorXd moved =
          slots.transpose() *
          chart.algebra()->group_coadjoint(e, mu_full);
      Eigen::VectorXd z2 = z;
      z2.tail(m) = moved;
      const double res = std::abs(field.value(z2) - fv) / scale;
      if (res > 1e-8)
        throw InputError(
            "gauge field fiber part is not invariant (discrete residual " +
            std::to_string(res) + ")");
    }
  }
  field.mark_certified();
}

GaugeField random_gauge_field(const GaugeChart& chart, std::mt19937_64& rng,
                              int terms, int max_factors) {
  const int n = chart.n(), N = chart.state_dim();
  std::vector<Poly> factors;
  for (int i = 0; i < 2 * n; ++i) factors.push_back(Poly::variable(N, i));
  for (auto& g : fiber_generators_packed(chart)) factors.push_back(g);
  std::uniform_real_distribution<double> coeff(-1.0, 1.0);
  std::uniform_int_distribution<int> nfac(1, max_factors);
  Poly p(N);
  if (factors.empty()) {
    p = Poly::constant(N, coeff(rng));
    return GaugeField(p, true);
  }
  std::uniform_int_distribution<int> pick(0,
                                          static_cast<int>(factors.size()) - 1);
  for (int t = 0; t < terms; ++t) {
    Poly term = Poly::constant(N, coeff(rng));
    const int f = nfac(rng);
    for (int i = 0; i < f; ++i) term = term * factors[pick(rng)];
    p += term;
  }
  return GaugeField(p, true);
}

GaugeField coordinate_field_x(const GaugeChart& chart, int i) {
  return GaugeField(Poly::variable(chart.state_dim(), i), true);
}

GaugeField coordinate_field_p(const GaugeChart& chart, int i) {
  return GaugeField(Poly::variable(chart.state_dim(), chart.n() + i), true);
}

Eigen::MatrixXd poisson_tensor(const GaugeChart& chart, const GaugeState& s) {
  const int n = chart.n(), m = chart.fiber_dim(), r = chart.r();
  const int N = 2 * n + m;
  Eigen::MatrixXd pi = Eigen::MatrixXd::Zero(N, N);
  for (int i = 0; i < n; ++i) {
    pi(i, n + i) = 1.0;
    pi(n + i, i) = -1.0;
  }
  if (n > 0) {
    const auto& curv = *chart.curvature();
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        Eigen::VectorXd b = curv.value(s.x, i, j);
        double v = 0.0;
        for (size_t a = 0; a < chart.coupling().size(); ++a)
          v += s.mu(chart.coupling()[a] - r) * b(static_cast<int>(a));
        pi(n + i, n + j) = v;
        pi(n + j, n + i) = -v;
      }
  }
  const auto& c = chart.algebra()->structure();
  for (int a = 0; a < m; ++a)
    for (int b = a + 1; b < m; ++b) {
      double v = 0.0;
      for (int mm = r; mm < chart.k(); ++mm)
        v -= c[mm](r + a, r + b) * s.mu(mm - r);
      pi(2 * n + a, 2 * n + b) = v;
      pi(2 * n + b, 2 * n + a) = -v;
    }
  return pi;
}

Eigen::MatrixXd poisson_tensor_derivative(const GaugeChart& chart,
                                          const GaugeState& s, int l) {
  const int n = chart.n(), m = chart.fiber_dim(), r = chart.r();
  const int N = 2 * n + m;
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(N, N);
  if (l < n) {
    // Base derivative: only the momentum-momentum block moves.
    const auto& curv = *chart.curvature();
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        Eigen::VectorXd db = curv.derivative(s.x, i, j, l);
        double v = 0.0;
        for (size_t a = 0; a < chart.coupling().size(); ++a)
          v += s.mu(chart.coupling()[a] - r) * db(static_cast<int>(a));
        d(n + i, n + j) = v;
        d(n + j, n + i) = -v;
      }
    return d;
  }
  if (l < 2 * n) return d;  // momentum coordinates do not enter the tensor
  const int slot = l - 2 * n;  // fiber coordinate index
  if (n > 0) {
    const auto& curv = *chart.curvature();
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        Eigen::VectorXd b = curv.value(s.x, i, j);
        double v = 0.0;
        for (size_t a = 0; a < chart.coupling().size(); ++a)
          if (chart.coupling()[a] - r == slot) v += b(static_cast<int>(a));
        d(n + i, n + j) = v;
        d(n + j, n + i) = -v;
      }
  }
  const auto& c = chart.algebra()->structure();
  for (int a = 0; a < m; ++a)
    for (int b = a + 1; b < m; ++b) {
      const double v = -c[r + slot](r + a, r + b);
      d(2 * n + a, 2 * n + b) += v;
      d(2 * n + b, 2 * n + a) -= v;
    }
  return d;
}

double gauge_bracket(const GaugeChart& chart, const GaugeField& f,
                     const GaugeField& g, const GaugeState& s) {
  validate_state(chart, s);
  for (const GaugeField* fld : {&f, &g})
    if (!fld->certified()) {
      GaugeField copy = *fld;
      certify_gauge_field(chart, copy);  // throws with diagnostics on failure
    }
  Eigen::VectorXd z = s.packed();
  return f.gradient(z).dot(poisson_tensor(chart, s) * g.gradient(z));
}

namespace {

double nested_bracket(const GaugeChart& chart, const GaugeState& s,
                      const Eigen::VectorXd& z, const Eigen::MatrixXd& pi,
                      const GaugeField& f, const GaugeField& g,
                      const GaugeField& h) {
  // {f, {g, h}} at z, via the analytic derivative of {g, h}.
  const int N = static_cast<int>(z.size());
  Eigen::VectorXd gg = g.gradient(z), gh = h.gradient(z);
  Eigen::MatrixXd hg = g.hessian(z), hh = h.hessian(z);
  Eigen::VectorXd grad_inner = hg * (pi * gh) - hh * (pi * gg);
  for (int l = 0; l < N; ++l)
    grad_inner(l) += gg.dot(poisson_tensor_derivative(chart, s, l) * gh);
  return f.gradient(z).dot(pi * grad_inner);
}

}  // namespace

JacobiReport jacobi_residual(const GaugeChart& chart, const GaugeState& s,
                             int trials, std::uint64_t seed) {
  validate_state(chart, s);
  if (chart.n() > 0)
    chart.base()->require_inside(s.x, 1e-4 * chart.base()->box().scale());
  Eigen::VectorXd z = s.packed();
  Eigen::MatrixXd pi = poisson_tensor(chart, s);
  std::mt19937_64 rng(seed);
  JacobiReport report;
  for (int t = 0; t < trials; ++t) {
    GaugeField f = random_gauge_field(chart, rng);
    GaugeField g = random_gauge_field(chart, rng);
    GaugeField h = random_gauge_field(chart, rng);
    if (t == 0 && chart.n() >= 3) {
      f = coordinate_field_p(chart, 0);
      g = coordinate_field_p(chart, 1);
      h = coordinate_field_p(chart, 2);
    }
    const double a = nested_bracket(chart, s, z, pi, f, g, h);
    const double b = nested_bracket(chart, s, z, pi, g, h, f);
    const double c = nested_bracket(chart, s, z, pi, h, f, g);
    const double scale = 1.0 + std::abs(a) + std::abs(b) + std::abs(c);
    report.max_residual =
        std::max(report.max_residual, std::abs(a + b + c) / scale);
    ++report.trials;
  }
  return report;
}

GaugeFlowResult gauge_flow(const GaugeChart& chart, const GaugeField& f,
                           const GaugeState& s0, double T, int steps,
                           int diagnostics_stride) {
  validate_state(chart, s0);
  if (steps < 1) throw InputError("gauge_flow: steps must be >= 1");
  const int n = chart.n();
  auto rhs = [&](const Eigen::VectorXd& z) -> Eigen::VectorXd {
    GaugeState st = GaugeState::unpack(chart, z);
    return poisson_tensor(chart, st) * f.gradient(z);
  };
  std::vector<Poly> casimirs = casimir_generators(*chart.algebra());
  Eigen::VectorXd z = s0.packed();
  const double e0 = f.value(z);
  Eigen::VectorXd cas0(casimirs.size());
  for (size_t i = 0; i < casimirs.size(); ++i)
    cas0(static_cast<int>(i)) =
        casimirs[i].eval(chart.embed_fiber(s0.mu));
  IsotropyClass cls0 = isotropy_at({chart.embed_fiber(s0.mu)},
                                   chart.subgroup(), 1e-6);

  GaugeFlowResult res;
  const double dt = T / steps;
  auto record = [&](double t) {
    GaugeFlowStep gs;
    gs.t = t;
    gs.z = z;
    gs.energy = f.value(z);
    GaugeState st = GaugeState::unpack(chart, z);
    Eigen::VectorXd mu_full = chart.embed_fiber(st.mu);
    gs.casimirs.resize(cas0.size());
    for (size_t i = 0; i < casimirs.size(); ++i) {
      gs.casimirs(static_cast<int>(i)) = casimirs[i].eval(mu_full);
      res.max_casimir_drift =
          std::max(res.max_casimir_drift,
                   std::abs(gs.casimirs(static_cast<int>(i)) -
                            cas0(static_cast<int>(i))) /
                       (1.0 + std::abs(cas0(static_cast<int>(i)))));
    }
    res.max_energy_drift = std::max(
        res.max_energy_drift, std::abs(gs.energy - e0) / (1.0 + std::abs(e0)));
    gs.cls = isotropy_at({mu_full}, chart.subgroup(), 1e-6);
    if (!gs.cls.same_type(cls0)) res.class_constant = false;
    res.steps.push_back(std::move(gs));
  };

  record(0.0);
  for (int s = 1; s <= steps; ++s) {
    Eigen::VectorXd k1 = rhs(z);
    Eigen::VectorXd k2 = rhs(z + 0.5 * dt * k1);
    Eigen::VectorXd k3 = rhs(z + 0.5 * dt * k2);
    Eigen::VectorXd k4 = rhs(z + dt * k3);
    z += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!z.allFinite() ||
        (n > 0 && !chart.base()->box().contains(z.head(n)))) {
      res.ok = false;
      res.failure_index = s;
      break;
    }
    if (s % diagnostics_stride == 0 || s == steps) record(s * dt);
  }
  return res;
}

GaugeLeafBasis leaf_tangent_basis(const GaugeChart& chart,
                                  const GaugeState& s) {
  const auto& alg = *chart.algebra();
  const int k = chart.k(), r = chart.r(), m = chart.fiber_dim();
  Eigen::VectorXd mu_full = chart.embed_fiber(s.mu);
  InvariantFamily fam = fiber_invariants(chart);

  GaugeLeafBasis basis;
  // Orbit directions seed the span so selected directions are independent
  // of them (they lie in the kernel of the reduced pairing).
  std::vector<Eigen::VectorXd> ortho;
  auto residual_dir = [&](const Eigen::VectorXd& v) {
    Eigen::VectorXd w = v;
    for (const auto& q : ortho) w -= q.dot(w) * q;
    return w;
  };
  for (int a = 0; a < r; ++a) {
    Eigen::VectorXd u =
        alg.coadjoint_ad(chart.subgroup().subalgebra().col(a), mu_full)
            .tail(m);
    Eigen::VectorXd w = residual_dir(u);
    if (w.norm() > 1e-10 * (1.0 + u.norm())) ortho.push_back(w / w.norm());
  }
  for (const auto& gen : fam.generators) {
    Eigen::VectorXd grad_slots = gen.gradient(s.mu);
    Eigen::VectorXd xi = Eigen::VectorXd::Zero(k);
    xi.tail(m) = grad_slots;
    Eigen::VectorXd v_full = alg.coadjoint_ad(xi, mu_full);
    Eigen::VectorXd v = v_full.tail(m);
    if (v.norm() < 1e-12) continue;
    Eigen::VectorXd w = residual_dir(v);
    if (w.norm() > 1e-9 * (1.0 + v.norm())) {
      ortho.push_back(w / w.norm());
      basis.fiber_dirs.push_back(v);
      basis.fiber_gens.push_back(xi);
    }
  }
  return basis;
}

Eigen::MatrixXd minimal_coupling_form(const GaugeChart& chart,
                                      const GaugeState& s,
                                      const GaugeLeafBasis& basis) {
  const int n = chart.n(), r = chart.r();
  const int d = 2 * n + basis.dim();
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(d, d);
  if (n > 0) {
    const auto& curv = *chart.curvature();
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        Eigen::VectorXd b = curv.value(s.x, i, j);
        double v = 0.0;
        for (size_t a = 0; a < chart.coupling().size(); ++a)
          v += s.mu(chart.coupling()[a] - r) * b(static_cast<int>(a));
        w(i, j) = -v;
        w(j, i) = v;
      }
    for (int i = 0; i < n; ++i) {
      w(i, n + i) = 1.0;
      w(n + i, i) = -1.0;
    }
  }
  const auto& alg = *chart.algebra();
  Eigen::VectorXd mu_full = chart.embed_fiber(s.mu);
  for (int a = 0; a < basis.dim(); ++a)
    for (int b = a + 1; b < basis.dim(); ++b) {
      const double v = -alg.pairing(
          mu_full, alg.bracket(basis.fiber_gens[a], basis.fiber_gens[b]));
      w(2 * n + a, 2 * n + b) = v;
      w(2 * n + b, 2 * n + a) = -v;
    }
  return w;
}

double leaf_consistency(const GaugeChart& chart, const GaugeState& s,
                        const GaugeField& f, const GaugeField& g) {
  const double lhs = gauge_bracket(chart, f, g, s);
  GaugeLeafBasis basis = leaf_tangent_basis(chart, s);
  if (2 * chart.n() + basis.dim() == 0) return std::abs(lhs);
  Eigen::MatrixXd w = minimal_coupling_form(chart, s, basis);
  const int n = chart.n(), m = chart.fiber_dim();
  Eigen::VectorXd z = s.packed();
  auto differential = [&](const GaugeField& fld) {
    Eigen::VectorXd grad = fld.gradient(z);
    Eigen::VectorXd d(2 * n + basis.dim());
    d.head(2 * n) = grad.head(2 * n);
    Eigen::VectorXd mu_grad = grad.tail(m);
    for (int a = 0; a < basis.dim(); ++a)
      d(2 * n + a) = mu_grad.dot(basis.fiber_dirs[a]);
    return d;
  };
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(
      w.transpose());
  auto ham = [&](const Eigen::VectorXd& d) {
    Eigen::VectorXd xv = cod.solve(d);
    const double res = (w.transpose() * xv - d).norm();
    if (res > 1e-8 * (1.0 + d.norm()))
      throw InputError(
          "leaf form is degenerate on the supplied directions (residual " +
          std::to_string(res) + ")");
    return xv;
  };
  Eigen::VectorXd xf = ham(differential(f));
  Eigen::VectorXd xg = ham(differential(g));
  const double rhs = xf.dot(w * xg);
  return std::abs(lhs - rhs);
}

CovectorPoint momentum_of_state(const GaugeChart& chart, const GaugeState& s) {
  return {chart.embed_fiber(s.mu)};
}

ThreeTermBracket three_term_bracket(const GaugeChart& chart,
                                    const GaugeField& f, const GaugeField& g,
                                    const GaugeState& s) {
  const int n = chart.n(), m = chart.fiber_dim(), r = chart.r();
  Eigen::VectorXd z = s.packed();
  Eigen::VectorXd gf = f.gradient(z), gg = g.gradient(z);
  ThreeTermBracket out;
  if (n > 0) {
    // Sharp of the base differential with respect to the canonical form.
    Eigen::MatrixXd omega_can = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    for (int i = 0; i < n; ++i) {
      omega_can(i, n + i) = 1.0;
      omega_can(n + i, i) = -1.0;
    }
    auto sharp = [&](const Eigen::VectorXd& grad_base) {
      // omega(X, .) = df  <=>  omega^T X = df.
      return omega_can.transpose().partialPivLu().solve(grad_base).eval();
    };
    Eigen::VectorXd xf = sharp(gf.head(2 * n));
    Eigen::VectorXd xg = sharp(gg.head(2 * n));
    out.canonical = xf.dot(omega_can * xg);
    const auto& curv = *chart.curvature();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        Eigen::VectorXd b = curv.value(s.x, i, j);
        double bmu = 0.0;
        for (size_t a = 0; a < chart.coupling().size(); ++a)
          bmu += s.mu(chart.coupling()[a] - r) * b(static_cast<int>(a));
        out.coupling += bmu * xf(i) * xg(j);
      }
  }
  const auto& alg = *chart.algebra();
  Eigen::VectorXd xif = Eigen::VectorXd::Zero(chart.k());
  Eigen::VectorXd xig = Eigen::VectorXd::Zero(chart.k());
  xif.tail(m) = gf.tail(m);
  xig.tail(m) = gg.tail(m);
  out.fiber =
      -alg.pairing(chart.embed_fiber(s.mu), alg.bracket(xif, xig));
  return out;
}

ThreeTermBracket bracket_terms_from_tensor(const GaugeChart& chart,
                                           const GaugeField& f,
                                           const GaugeField& g,
                                           const GaugeState& s) {
  const int n = chart.n(), m = chart.fiber_dim();
  const int N = chart.state_dim();
  Eigen::VectorXd z = s.packed();
  Eigen::VectorXd gf = f.gradient(z), gg = g.gradient(z);
  Eigen::MatrixXd pi = poisson_tensor(chart, s);
  ThreeTermBracket out;
  Eigen::MatrixXd canonical = Eigen::MatrixXd::Zero(N, N);
  for (int i = 0; i < n; ++i) {
    canonical(i, n + i) = 1.0;
    canonical(n + i, i) = -1.0;
  }
  Eigen::MatrixXd coupling = Eigen::MatrixXd::Zero(N, N);
  coupling.block(n, n, n, n) = pi.block(n, n, n, n);
  Eigen::MatrixXd fiber = Eigen::MatrixXd::Zero(N, N);
  fiber.block(2 * n, 2 * n, m, m) = pi.block(2 * n, 2 * n, m, m);
  out.canonical = gf.dot(canonical * gg);
  out.coupling = gf.dot(coupling * gg);
  out.fiber = gf.dot(fiber * gg);
  return out;
}

}  // namespace lps

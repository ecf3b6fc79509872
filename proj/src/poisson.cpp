#include "lps/poisson.hpp"

#include <cmath>

#include "lps/linalg.hpp"

namespace lps {

namespace {

void require_annihilator(const Eigen::VectorXd& mu, const SubgroupSpec& h,
                         const char* who) {
  if (mu.size() != h.algebra().dim())
    throw InputError(std::string(who) + ": covector has wrong length");
  if (h.r() == 0) return;
  const double d = (h.subalgebra().transpose() * mu).cwiseAbs().maxCoeff();
  if (d > 1e-10 * (1.0 + mu.norm()))
    throw InputError(std::string(who) +
                     ": covector is not in the annihilator (residual " +
                     std::to_string(d) + ")");
}

}  // namespace

double lp_bracket(const CertifiedDualFunction& f,
                  const CertifiedDualFunction& g, const CovectorPoint& mu,
                  const SubgroupSpec& h) {
  require_annihilator(mu.coords, h, "lp_bracket");
  const auto& alg = h.algebra();
  Eigen::VectorXd gf = f.fn.gradient(mu.coords);
  Eigen::VectorXd gg = g.fn.gradient(mu.coords);
  return -alg.pairing(mu.coords, alg.bracket(gf, gg));
}

double lp_bracket_contraction(const Eigen::VectorXd& grad_f,
                              const Eigen::VectorXd& grad_g,
                              const Eigen::VectorXd& mu,
                              const LieAlgebraSpec& g) {
  const auto& c = g.structure();
  double out = 0.0;
  for (int m = 0; m < g.dim(); ++m)
    out -= mu(m) * grad_f.dot(c[m] * grad_g);
  return out;
}

CovectorPoint ham_field(const CertifiedDualFunction& f,
                        const CovectorPoint& mu, const SubgroupSpec& h) {
  require_annihilator(mu.coords, h, "ham_field");
  const auto& alg = h.algebra();
  return {alg.coadjoint_ad(f.fn.gradient(mu.coords), mu.coords)};
}

FlowResult lp_flow(const CertifiedDualFunction& f, const CovectorPoint& mu0,
                   const SubgroupSpec& h, double T, int steps,
                   const FlowOptions& opts) {
  require_annihilator(mu0.coords, h, "lp_flow");
  if (steps < 1) throw InputError("lp_flow: steps must be >= 1");
  const auto& alg = h.algebra();
  auto rhs = [&](const Eigen::VectorXd& mu) {
    return alg.coadjoint_ad(f.fn.gradient(mu), mu);
  };

  AnnihilatorBasis ann = annihilator_basis(h);
  std::vector<Poly> casimirs = casimir_generators(alg);
  Eigen::VectorXd cas0(casimirs.size());
  for (size_t i = 0; i < casimirs.size(); ++i)
    cas0(static_cast<int>(i)) = casimirs[i].eval(mu0.coords);

  FlowResult res;
  IsotropyClass cls0;
  if (opts.classify) cls0 = isotropy_at(mu0, h, 1e-6);

  const double dt = T / steps;
  Eigen::VectorXd mu = mu0.coords;
  auto record = [&](int step, double t) {
    FlowStep fs;
    fs.t = t;
    fs.mu = mu;
    fs.annihilator_distance = (mu - ann.projector * mu).norm();
    fs.casimirs.resize(cas0.size());
    double drift = 0.0;
    for (size_t i = 0; i < casimirs.size(); ++i) {
      fs.casimirs(static_cast<int>(i)) = casimirs[i].eval(mu);
      drift = std::max(drift,
                       std::abs(fs.casimirs(static_cast<int>(i)) -
                                cas0(static_cast<int>(i))) /
                           (1.0 + std::abs(cas0(static_cast<int>(i)))));
    }
    res.max_casimir_drift = std::max(res.max_casimir_drift, drift);
    res.max_annihilator_distance =
        std::max(res.max_annihilator_distance, fs.annihilator_distance);
    if (opts.classify) {
      fs.cls = isotropy_at({mu}, h, 1e-6);
      if (!fs.cls.same_type(cls0)) res.class_constant = false;
    }
    res.steps.push_back(std::move(fs));
    (void)step;
  };

  record(0, 0.0);
  for (int s = 1; s <= steps; ++s) {
    Eigen::VectorXd k1 = rhs(mu);
    Eigen::VectorXd k2 = rhs(mu + 0.5 * dt * k1);
    Eigen::VectorXd k3 = rhs(mu + 0.5 * dt * k2);
    Eigen::VectorXd k4 = rhs(mu + dt * k3);
    mu += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!mu.allFinite()) {
      res.ok = false;
      res.failure_index = s;
      break;
    }
    if (s % opts.diagnostics_stride == 0 || s == steps)
      record(s, s * dt);
  }
  return res;
}

Eigen::MatrixXd stratum_tangent(const Eigen::VectorXd& mu,
                                const SubgroupSpec& h) {
  const auto& g = h.algebra();
  const int k = g.dim();
  StabilizerData st = stabilizer_at(mu, h);
  std::vector<Eigen::MatrixXd> conds;
  for (int a = 0; a < st.subalgebra.cols(); ++a)
    conds.push_back(g.coad_matrix(st.subalgebra.col(a)));
  for (const auto& e : st.discrete)
    conds.push_back(g.adjoint_matrix(e).transpose() -
                    Eigen::MatrixXd::Identity(k, k));
  if (h.r() > 0) conds.push_back(h.subalgebra().transpose());
  Eigen::MatrixXd fix;
  if (conds.empty()) {
    fix = Eigen::MatrixXd::Identity(k, k);
  } else {
    int rows = 0;
    for (const auto& c : conds) rows += static_cast<int>(c.rows());
    Eigen::MatrixXd sys(rows, k);
    int at = 0;
    for (const auto& c : conds) {
      sys.middleRows(at, c.rows()) = c;
      at += static_cast<int>(c.rows());
    }
    fix = null_space(sys, 1e-9);
  }
  Eigen::MatrixXd orb(k, h.r());
  for (int a = 0; a < h.r(); ++a)
    orb.col(a) = g.coadjoint_ad(h.subalgebra().col(a), mu);
  Eigen::MatrixXd joined(k, fix.cols() + orb.cols());
  joined << fix, orb;
  return orthonormal_span(joined, 1e-9);
}

LeafProbe leaf_report(const CovectorPoint& mu0, const SubgroupSpec& h) {
  require_annihilator(mu0.coords, h, "leaf_report");
  const auto& alg = h.algebra();
  const int k = alg.dim();
  LeafProbe probe;
  probe.origin = mu0.coords;
  probe.cls = isotropy_at(mu0, h, 1e-8);

  std::vector<Poly> casimirs = casimir_generators(alg);
  probe.casimir_values.resize(casimirs.size());
  for (size_t i = 0; i < casimirs.size(); ++i)
    probe.casimir_values(static_cast<int>(i)) = casimirs[i].eval(mu0.coords);

  // Hamiltonian directions of the invariant generator family.
  std::vector<Poly> gens = invariant_dual_polys(h);
  Eigen::MatrixXd dirs(k, gens.size());
  for (size_t i = 0; i < gens.size(); ++i)
    dirs.col(static_cast<int>(i)) =
        alg.coadjoint_ad(gens[i].gradient(mu0.coords), mu0.coords);
  Eigen::MatrixXd span = orthonormal_span(dirs, 1e-9);
  probe.ham_rank = static_cast<int>(span.cols());

  Eigen::MatrixXd orb(k, h.r());
  for (int a = 0; a < h.r(); ++a)
    orb.col(a) = alg.coadjoint_ad(h.subalgebra().col(a), mu0.coords);
  Eigen::MatrixXd orb_span = orthonormal_span(orb, 1e-9);
  probe.orbit_in_span =
      static_cast<int>(subspace_intersection(span, orb_span, 1e-9).cols());
  probe.leaf_dim = probe.ham_rank - probe.orbit_in_span;
  return probe;
}

double stratified_kks_pair(const CovectorPoint& mu, const AlgebraVector& xi,
                           const AlgebraVector& eta, const SubgroupSpec& h,
                           double tangency_tol) {
  require_annihilator(mu.coords, h, "stratified_kks_pair");
  const auto& alg = h.algebra();
  Eigen::MatrixXd tangent = stratum_tangent(mu.coords, h);
  for (const auto* v : {&xi, &eta}) {
    Eigen::VectorXd gen = alg.coadjoint_ad(v->coords, mu.coords);
    const double res = off_span_residual(tangent, gen) / (1.0 + gen.norm());
    if (res > tangency_tol)
      throw InputError(
          "stratified_kks_pair: generator is not tangent to the stratum "
          "(residual " +
          std::to_string(res) + ")");
  }
  return -alg.pairing(mu.coords, alg.bracket(xi.coords, eta.coords));
}

}  // namespace lps

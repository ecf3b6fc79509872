#include "lps/invariants.hpp"

#include <cmath>
#include <sstream>

#include "lps/linalg.hpp"
#include "lps/strata.hpp"

namespace lps {

namespace {
// Null-space solutions come back SVD-normalized; rescale so the largest
// coefficient is one with a deterministic sign (first term positive).
Poly tidy_generator(const Poly& p) {
  double top = 0.0;
  for (const auto& [m, c] : p.terms())
    if (std::abs(c) > std::abs(top)) top = c;
  if (top == 0.0) return p;
  double lead = p.terms().begin()->second;
  const double scale = (lead < 0 ? -1.0 : 1.0) / std::abs(top);
  return p * scale;
}
}  // namespace

Eigen::VectorXd DualFunction::gradient(const Eigen::VectorXd& mu) const {
  if (analytic_gradient) return analytic_gradient(mu);
  const int k = static_cast<int>(mu.size());
  Eigen::VectorXd g(k);
  for (int i = 0; i < k; ++i) {
    const double h = fd_step * (1.0 + std::abs(mu(i)));
    Eigen::VectorXd up = mu, dn = mu;
    up(i) += h;
    dn(i) -= h;
    g(i) = (value(up) - value(dn)) / (2.0 * h);
  }
  return g;
}

DualFunction dual_from_poly(const Poly& p) {
  DualFunction f;
  f.value = [p](const Eigen::VectorXd& mu) { return p.eval(mu); };
  f.analytic_gradient = [p](const Eigen::VectorXd& mu) {
    return p.gradient(mu);
  };
  return f;
}

DualFunction dual_from_callable(
    std::function<double(const Eigen::VectorXd&)> f, double fd_step) {
  DualFunction out;
  out.value = std::move(f);
  out.fd_step = fd_step;
  return out;
}

CertificateReport invariance_certificate(const DualFunction& f,
                                         const SubgroupSpec& h, int nsamples,
                                         std::uint64_t seed,
                                         double tol_infinitesimal,
                                         double tol_discrete) {
  const auto& g = h.algebra();
  AnnihilatorBasis ann = annihilator_basis(h);
  const int m = static_cast<int>(ann.vectors.cols());
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double radii[3] = {0.5, 1.0, 2.0};

  bool caps_enumerated = false;
  std::vector<GroupElement> comps;
  CertificateReport rep;
  for (int s = 0; s < nsamples; ++s) {
    Eigen::VectorXd mu = Eigen::VectorXd::Zero(g.dim());
    if (m > 0 && s > 0) {
      Eigen::VectorXd z(m);
      for (int i = 0; i < m; ++i) z(i) = normal(rng);
      if (z.norm() > 1e-12)
        mu = radii[s % 3] * (ann.vectors * (z / z.norm()));
    }
    const double fv = f.value(mu);
    Eigen::VectorXd grad = f.gradient(mu);
    const double scale = 1.0 + std::abs(fv) + grad.norm() * mu.norm();
    for (int a = 0; a < h.r(); ++a) {
      const double res =
          std::abs(g.coadjoint_ad(h.subalgebra().col(a), mu).dot(grad)) /
          scale;
      if (res > rep.worst_infinitesimal) {
        rep.worst_infinitesimal = res;
        if (res > tol_infinitesimal) rep.failing_sample = mu;
      }
    }
    if (!h.generators().empty()) {
      if (!caps_enumerated) {
        comps = enumerate_component_group(h);
        caps_enumerated = true;
      }
      for (const auto& e : comps) {
        const double res =
            std::abs(f.value(g.group_coadjoint(e, mu)) - fv) / scale;
        if (res > rep.worst_discrete) {
          rep.worst_discrete = res;
          if (res > tol_discrete) rep.failing_sample = mu;
        }
      }
    }
  }
  rep.ok = rep.worst_infinitesimal <= tol_infinitesimal &&
           rep.worst_discrete <= tol_discrete;
  if (!rep.ok) {
    std::ostringstream os;
    os << "invariance certificate failed: infinitesimal residual "
       << rep.worst_infinitesimal << ", discrete residual "
       << rep.worst_discrete << " at sample [";
    for (int i = 0; i < rep.failing_sample.size(); ++i)
      os << (i ? ", " : "") << rep.failing_sample(i);
    os << "]";
    rep.detail = os.str();
  }
  return rep;
}

CertifiedDualFunction certify(const DualFunction& f, const SubgroupSpec& h,
                              int nsamples, std::uint64_t seed) {
  CertificateReport rep = invariance_certificate(f, h, nsamples, seed);
  if (!rep.ok) throw InputError(rep.detail);
  return {f, rep};
}

InvariantFamily invariant_generators(const SubgroupSpec& h) {
  return invariant_family_for(annihilator_action(h));
}

RestrictedAction slot_annihilator_action(const SubgroupSpec& h) {
  const auto& g = h.algebra();
  const int k = g.dim();
  const int r = h.r();
  Eigen::MatrixXd slots = Eigen::MatrixXd::Zero(k, k - r);
  for (int i = r; i < k; ++i) slots(i, i - r) = 1.0;
  if (r > 0) {
    Eigen::MatrixXd span_first = Eigen::MatrixXd::Identity(k, k).leftCols(r);
    if (subspace_distance(h.subalgebra(), span_first) > 1e-10)
      throw InputError(
          "slot_annihilator_action: subgroup is not in adapted position");
  }
  RestrictedAction out;
  out.basis = slots;
  for (int a = 0; a < r; ++a)
    out.infinitesimal.push_back(slots.transpose() *
                                g.coad_matrix(h.subalgebra().col(a)) * slots);
  for (const auto& gen : h.generators())
    out.discrete.push_back(slots.transpose() *
                           g.adjoint_matrix(gen).transpose() * slots);
  return out;
}

InvariantFamily invariant_family_for(RestrictedAction action) {
  InvariantFamily fam;
  fam.action = std::move(action);
  const int m = static_cast<int>(fam.action.basis.cols());
  if (m == 0) return fam;

  // Degree one: v with v^T (action) = v^T for the whole component group and
  // v^T D = 0 infinitesimally.
  {
    std::vector<Eigen::MatrixXd> conds;
    for (const auto& d : fam.action.infinitesimal)
      conds.push_back(d.transpose());
    for (const auto& rbar : fam.action.discrete)
      conds.push_back(rbar.transpose() - Eigen::MatrixXd::Identity(m, m));
    Eigen::MatrixXd sol;
    if (conds.empty()) {
      sol = Eigen::MatrixXd::Identity(m, m);
    } else {
      int rows = 0;
      for (const auto& c : conds) rows += static_cast<int>(c.rows());
      Eigen::MatrixXd sys(rows, m);
      int at = 0;
      for (const auto& c : conds) {
        sys.middleRows(at, c.rows()) = c;
        at += static_cast<int>(c.rows());
      }
      sol = null_space(sys);
    }
    for (int c = 0; c < sol.cols(); ++c)
      fam.generators.push_back(tidy_generator(linear_poly(sol.col(c))));
    fam.linear_count = static_cast<int>(sol.cols());
  }

  // Degree two: symmetric s with d^T s + s d = 0 and r^T s r = s.
  {
    std::vector<std::pair<int, int>> sym_index;
    for (int i = 0; i < m; ++i)
      for (int j = i; j < m; ++j) sym_index.push_back({i, j});
    const int nsym = static_cast<int>(sym_index.size());
    auto unpack = [&](const Eigen::VectorXd& v) {
      Eigen::MatrixXd s = Eigen::MatrixXd::Zero(m, m);
      for (int t = 0; t < nsym; ++t) {
        auto [i, j] = sym_index[t];
        s(i, j) = v(t);
        s(j, i) = v(t);
      }
      return s;
    };
    std::vector<Eigen::MatrixXd> ops;
    for (const auto& d : fam.action.infinitesimal) {
      Eigen::MatrixXd op(m * m, nsym);
      for (int t = 0; t < nsym; ++t) {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(nsym);
        e(t) = 1.0;
        Eigen::MatrixXd s = unpack(e);
        Eigen::MatrixXd img = d.transpose() * s + s * d;
        op.col(t) = Eigen::Map<Eigen::VectorXd>(img.data(), m * m);
      }
      ops.push_back(op);
    }
    for (const auto& rbar : fam.action.discrete) {
      Eigen::MatrixXd op(m * m, nsym);
      for (int t = 0; t < nsym; ++t) {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(nsym);
        e(t) = 1.0;
        Eigen::MatrixXd s = unpack(e);
        Eigen::MatrixXd img = rbar.transpose() * s * rbar - s;
        op.col(t) = Eigen::Map<Eigen::VectorXd>(img.data(), m * m);
      }
      ops.push_back(op);
    }
    Eigen::MatrixXd sol;
    if (ops.empty()) {
      sol = Eigen::MatrixXd::Identity(nsym, nsym);
    } else {
      int rows = 0;
      for (const auto& c : ops) rows += static_cast<int>(c.rows());
      Eigen::MatrixXd sys(rows, nsym);
      int at = 0;
      for (const auto& c : ops) {
        sys.middleRows(at, c.rows()) = c;
        at += static_cast<int>(c.rows());
      }
      sol = null_space(sys);
    }
    for (int c = 0; c < sol.cols(); ++c)
      fam.generators.push_back(
          tidy_generator(quadratic_form_poly(unpack(sol.col(c)))));
  }
  return fam;
}

Poly extend_poly_to_dual(const Poly& p, const InvariantFamily& fam) {
  const Eigen::MatrixXd& q = fam.action.basis;  // k x m
  return p.linear_substitution(q.transpose(), static_cast<int>(q.rows()));
}

DualFunction extend_to_dual(const Poly& p, const InvariantFamily& fam) {
  return dual_from_poly(extend_poly_to_dual(p, fam));
}

Poly random_poly_in(const std::vector<Poly>& gens, int nvars,
                    std::mt19937_64& rng, int terms, int max_factors) {
  Poly out(nvars);
  if (gens.empty()) return out;
  std::uniform_real_distribution<double> coeff(-1.0, 1.0);
  std::uniform_int_distribution<int> pick(0,
                                          static_cast<int>(gens.size()) - 1);
  std::uniform_int_distribution<int> nfac(1, max_factors);
  for (int t = 0; t < terms; ++t) {
    Poly term = Poly::constant(nvars, coeff(rng));
    const int f = nfac(rng);
    for (int i = 0; i < f; ++i) term = term * gens[pick(rng)];
    out += term;
  }
  return out;
}

Poly random_invariant_poly(const InvariantFamily& fam, std::mt19937_64& rng,
                           int terms, int max_factors) {
  const int m = static_cast<int>(fam.action.basis.cols());
  return random_poly_in(fam.generators, m, rng, terms, max_factors);
}

std::vector<Poly> invariant_dual_polys(const SubgroupSpec& h) {
  const auto& g = h.algebra();
  const int k = g.dim();
  std::vector<Poly> out;
  std::vector<Eigen::MatrixXd> flows;  // infinitesimal coadjoint generators
  for (int a = 0; a < h.r(); ++a)
    flows.push_back(g.coad_matrix(h.subalgebra().col(a)));
  std::vector<Eigen::MatrixXd> moves;  // discrete coadjoint matrices
  for (const auto& gen : h.generators())
    moves.push_back(g.adjoint_matrix(gen).transpose());
  // Degree one.
  {
    std::vector<Eigen::MatrixXd> conds;
    for (const auto& d : flows) conds.push_back(d.transpose());
    for (const auto& mv : moves)
      conds.push_back(mv.transpose() - Eigen::MatrixXd::Identity(k, k));
    Eigen::MatrixXd sol;
    if (conds.empty()) {
      sol = Eigen::MatrixXd::Identity(k, k);
    } else {
      int rows = 0;
      for (const auto& c : conds) rows += static_cast<int>(c.rows());
      Eigen::MatrixXd sys(rows, k);
      int at = 0;
      for (const auto& c : conds) {
        sys.middleRows(at, c.rows()) = c;
        at += static_cast<int>(c.rows());
      }
      sol = null_space(sys);
    }
    for (int c = 0; c < sol.cols(); ++c)
      out.push_back(tidy_generator(linear_poly(sol.col(c))));
  }
  // Degree two.
  {
    std::vector<std::pair<int, int>> sym_index;
    for (int i = 0; i < k; ++i)
      for (int j = i; j < k; ++j) sym_index.push_back({i, j});
    const int nsym = static_cast<int>(sym_index.size());
    auto unpack = [&](int t) {
      Eigen::MatrixXd s = Eigen::MatrixXd::Zero(k, k);
      auto [i, j] = sym_index[t];
      s(i, j) = 1.0;
      s(j, i) = 1.0;
      return s;
    };
    std::vector<Eigen::VectorXd> rows;
    for (int t = 0; t < nsym; ++t) {
      for (const auto& d : flows) {
        Eigen::MatrixXd img = d.transpose() * unpack(t) + unpack(t) * d;
        rows.push_back(Eigen::Map<Eigen::VectorXd>(img.data(), k * k));
      }
      for (const auto& mv : moves) {
        Eigen::MatrixXd img =
            mv.transpose() * unpack(t) * mv - unpack(t);
        rows.push_back(Eigen::Map<Eigen::VectorXd>(img.data(), k * k));
      }
    }
    Eigen::MatrixXd sol;
    if (rows.empty()) {
      sol = Eigen::MatrixXd::Identity(nsym, nsym);
    } else {
      const int per = static_cast<int>(rows.size()) / nsym;
      Eigen::MatrixXd sys(per * k * k, nsym);
      for (int t = 0; t < nsym; ++t)
        for (int c = 0; c < per; ++c)
          sys.block(c * k * k, t, k * k, 1) = rows[t * per + c];
      sol = null_space(sys);
    }
    for (int c = 0; c < sol.cols(); ++c) {
      Eigen::MatrixXd s = Eigen::MatrixXd::Zero(k, k);
      for (int t = 0; t < nsym; ++t) {
        auto [i, j] = sym_index[t];
        s(i, j) = sol(t, c);
        s(j, i) = sol(t, c);
      }
      out.push_back(tidy_generator(quadratic_form_poly(s)));
    }
  }
  return out;
}

std::vector<Poly> casimir_generators(const LieAlgebraSpec& g) {
  const int k = g.dim();
  std::vector<Poly> out;
  // Degree one: kernel of all ad matrices (the center).
  {
    Eigen::MatrixXd sys(k * k, k);
    for (int a = 0; a < k; ++a) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(k);
      e(a) = 1.0;
      sys.middleRows(a * k, k) = g.ad_matrix(e);
    }
    Eigen::MatrixXd sol = null_space(sys);
    for (int c = 0; c < sol.cols(); ++c)
      out.push_back(tidy_generator(linear_poly(sol.col(c))));
  }
  // Degree two: coad(e_a)^T s + s coad(e_a) = 0 for every basis vector.
  {
    std::vector<std::pair<int, int>> sym_index;
    for (int i = 0; i < k; ++i)
      for (int j = i; j < k; ++j) sym_index.push_back({i, j});
    const int nsym = static_cast<int>(sym_index.size());
    Eigen::MatrixXd sys(k * k * k, nsym);
    for (int t = 0; t < nsym; ++t) {
      Eigen::MatrixXd s = Eigen::MatrixXd::Zero(k, k);
      auto [i, j] = sym_index[t];
      s(i, j) = 1.0;
      s(j, i) = 1.0;
      for (int a = 0; a < k; ++a) {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(k);
        e(a) = 1.0;
        Eigen::MatrixXd d = g.coad_matrix(e);
        Eigen::MatrixXd img = d.transpose() * s + s * d;
        sys.block(a * k * k, t, k * k, 1) =
            Eigen::Map<Eigen::VectorXd>(img.data(), k * k);
      }
    }
    Eigen::MatrixXd sol = null_space(sys);
    for (int c = 0; c < sol.cols(); ++c) {
      Eigen::MatrixXd s = Eigen::MatrixXd::Zero(k, k);
      for (int t = 0; t < nsym; ++t) {
        auto [i, j] = sym_index[t];
        s(i, j) = sol(t, c);
        s(j, i) = sol(t, c);
      }
      out.push_back(tidy_generator(quadratic_form_poly(s)));
    }
  }
  return out;
}

}  // namespace lps

#include "lps/strata.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "lps/linalg.hpp"

namespace lps {

namespace {

bool matrices_close(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).cwiseAbs().maxCoeff() < 1e-8;
}

double anni_distance(const Eigen::VectorXd& mu, const SubgroupSpec& h) {
  if (h.r() == 0) return 0.0;
  return (h.subalgebra().transpose() * mu).cwiseAbs().maxCoeff();
}

}  // namespace

std::vector<GroupElement> enumerate_component_group(const SubgroupSpec& h,
                                                    bool* capped) {
  std::vector<GroupElement> elems;
  if (capped) *capped = false;
  if (h.generators().empty()) {
    if (h.algebra().has_rep()) {
      const int d = h.algebra().rep_dim();
      elems.push_back({Eigen::MatrixXd::Identity(d, d), 1e-10});
    }
    return elems;
  }
  const int d = h.algebra().rep_dim();
  elems.push_back({Eigen::MatrixXd::Identity(d, d), 1e-10});
  // Breadth-first closure under multiplication by the generators.
  size_t frontier = 0;
  while (frontier < elems.size()) {
    const Eigen::MatrixXd cur = elems[frontier].matrix;
    ++frontier;
    for (const auto& gen : h.generators()) {
      Eigen::MatrixXd prod = gen.matrix * cur;
      bool known = false;
      for (const auto& e : elems)
        if (matrices_close(e.matrix, prod)) {
          known = true;
          break;
        }
      if (!known) {
        if (static_cast<int>(elems.size()) >= kComponentOrderCap) {
          if (capped) *capped = true;
          return elems;
        }
        elems.push_back({prod, 1e-10});
      }
    }
  }
  return elems;
}

StabilizerData stabilizer_at(const Eigen::VectorXd& mu,
                             const SubgroupSpec& h) {
  const auto& g = h.algebra();
  StabilizerData out;
  const int r = h.r();
  if (r > 0) {
    // Kernel of a -> ad*_{h a} mu over coefficient vectors a.
    Eigen::MatrixXd m(g.dim(), r);
    for (int a = 0; a < r; ++a)
      m.col(a) = g.coadjoint_ad(h.subalgebra().col(a), mu);
    Eigen::MatrixXd ker = null_space(m, 1e-9);
    out.subalgebra = h.subalgebra() * ker;
  } else {
    out.subalgebra = Eigen::MatrixXd(g.dim(), 0);
  }
  bool capped = false;
  auto elems = enumerate_component_group(h, &capped);
  out.order_capped = capped;
  const double scale = 1.0 + mu.norm();
  for (const auto& e : elems)
    if ((g.group_coadjoint(e, mu) - mu).norm() < 1e-8 * scale)
      out.discrete.push_back(e);
  if (out.discrete.empty() && !elems.empty())
    out.discrete.push_back(elems.front());  // identity always fixes
  return out;
}

IsotropyClass isotropy_at(const CovectorPoint& mu, const SubgroupSpec& h,
                          double membership_tol) {
  const auto& g = h.algebra();
  if (mu.coords.size() != g.dim())
    throw InputError("isotropy_at: covector has wrong length");
  if (anni_distance(mu.coords, h) > membership_tol * (1.0 + mu.coords.norm()))
    throw InputError("isotropy_at: covector is not in the annihilator");
  StabilizerData st = stabilizer_at(mu.coords, h);
  IsotropyClass cls;
  cls.stabilizer_dim = static_cast<int>(st.subalgebra.cols());
  cls.component_order = static_cast<int>(st.discrete.size());
  cls.order_capped = st.order_capped;
  return cls;
}

namespace {

int stratum_dimension(const Eigen::VectorXd& mu, const SubgroupSpec& h) {
  // The stratum through mu is locally H . (open subset of Fix(H_mu)):
  //   dim = dim Fix + dim orbit - dim(orbit tangent inside Fix).
  const auto& g = h.algebra();
  const int k = g.dim();
  StabilizerData st = stabilizer_at(mu, h);
  // Fix(H_mu) inside the annihilator.
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
  // Orbit tangent at mu.
  Eigen::MatrixXd orb(k, h.r());
  for (int a = 0; a < h.r(); ++a)
    orb.col(a) = g.coadjoint_ad(h.subalgebra().col(a), mu);
  Eigen::MatrixXd orb_span = orthonormal_span(orb, 1e-9);
  const int inter =
      static_cast<int>(subspace_intersection(orb_span, fix, 1e-9).cols());
  return static_cast<int>(fix.cols()) + static_cast<int>(orb_span.cols()) -
         inter;
}

struct Sample {
  Eigen::VectorXd mu;
  bool probe;
};

}  // namespace

StrataReport enumerate_strata(const SubgroupSpec& h, int samples,
                              std::uint64_t seed) {
  if (samples < 1) throw InputError("enumerate_strata: samples must be >= 1");
  const auto& g = h.algebra();
  const int k = g.dim();
  AnnihilatorBasis ann = annihilator_basis(h);
  const int m = static_cast<int>(ann.vectors.cols());

  std::vector<Sample> pts;
  pts.push_back({Eigen::VectorXd::Zero(k), true});  // origin probe
  Eigen::MatrixXd fixed = fixed_set(h, ActionSpace::Annihilator);
  for (int c = 0; c < fixed.cols(); ++c) {
    pts.push_back({fixed.col(c), true});
    pts.push_back({-0.7 * fixed.col(c), true});
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int s = 0; s < samples && m > 0; ++s) {
    Eigen::VectorXd z(m);
    for (int i = 0; i < m; ++i) z(i) = normal(rng);
    if (z.norm() < 1e-12) z.setOnes();
    z /= z.norm();
    pts.push_back({ann.vectors * z, false});
  }

  const bool trivial = h.trivial();
  StrataReport report;
  report.samples = samples;
  report.seed = seed;

  auto classify = [&](const Eigen::VectorXd& mu) {
    return isotropy_at({mu}, h);
  };

  auto find_class = [&](const IsotropyClass& cls, bool origin) -> int {
    for (size_t i = 0; i < report.classes.size(); ++i) {
      const auto& sc = report.classes[i];
      if (!trivial && sc.is_origin != origin) continue;
      if (sc.cls.same_type(cls)) return static_cast<int>(i);
    }
    return -1;
  };

  for (const auto& pt : pts) {
    IsotropyClass cls = classify(pt.mu);
    const bool origin = !trivial && pt.mu.norm() < 1e-14;
    int idx = find_class(cls, origin);
    if (idx < 0) {
      StratumClass sc;
      sc.cls = cls;
      sc.representative = pt.mu;
      sc.is_origin = origin;
      sc.orbit_dim = h.r() - cls.stabilizer_dim;
      sc.stratum_dim = origin ? 0 : stratum_dimension(pt.mu, h);
      sc.quotient_dim = sc.stratum_dim - sc.orbit_dim;
      report.classes.push_back(sc);
      idx = static_cast<int>(report.classes.size()) - 1;
    }
    auto& sc = report.classes[idx];
    sc.sample_count += 1;
    if (pt.probe) sc.deterministic_probe = true;
  }

  for (auto& sc : report.classes)
    sc.low_confidence = !sc.deterministic_probe && sc.sample_count < 3;

  // Order classes: origin first, then by decreasing singularity.
  std::sort(report.classes.begin(), report.classes.end(),
            [](const StratumClass& a, const StratumClass& b) {
              if (a.is_origin != b.is_origin) return a.is_origin;
              if (a.cls.stabilizer_dim != b.cls.stabilizer_dim)
                return a.cls.stabilizer_dim > b.cls.stabilizer_dim;
              if (a.cls.component_order != b.cls.component_order)
                return a.cls.component_order > b.cls.component_order;
              return a.stratum_dim < b.stratum_dim;
            });
  for (size_t i = 0; i < report.classes.size(); ++i) {
    auto& sc = report.classes[i];
    if (sc.is_origin)
      sc.cls.label = "(H)";
    else
      sc.cls.label = "(K" + std::to_string(i) + ")";
  }

  // Partial order by perturbing representatives: classes seen arbitrarily
  // close to a representative precede its class.
  std::vector<std::pair<int, int>> order;
  const double delta = 1e-3;
  for (size_t b = 0; b < report.classes.size(); ++b) {
    const Eigen::VectorXd& rep = report.classes[b].representative;
    for (int trial = 0; trial < 24 && m > 0; ++trial) {
      Eigen::VectorXd z(m);
      for (int i = 0; i < m; ++i) z(i) = normal(rng);
      if (z.norm() < 1e-12) continue;
      Eigen::VectorXd pert =
          rep + delta * (1.0 + rep.norm()) * (ann.vectors * z / z.norm());
      IsotropyClass cls = classify(pert);
      const bool origin = !trivial && pert.norm() < 1e-14;
      int a = find_class(cls, origin);
      if (a >= 0 && a != static_cast<int>(b)) {
        auto pair = std::make_pair(a, static_cast<int>(b));
        if (std::find(order.begin(), order.end(), pair) == order.end())
          order.push_back(pair);
      }
    }
  }
  std::sort(order.begin(), order.end());
  report.partial_order = order;
  return report;
}

}  // namespace lps

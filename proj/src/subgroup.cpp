#include "lps/subgroup.hpp"

#include <cmath>

#include "lps/linalg.hpp"

namespace lps {

SubgroupSpec::SubgroupSpec(AlgebraPtr parent, Eigen::MatrixXd subalgebra_basis,
                           std::vector<GroupElement> discrete_generators,
                           std::string name)
    : parent_(std::move(parent)),
      subalgebra_(std::move(subalgebra_basis)),
      generators_(std::move(discrete_generators)),
      name_(std::move(name)) {
  if (!parent_) throw InputError("subgroup needs a parent algebra");
  const int k = parent_->dim();
  if (subalgebra_.size() == 0) subalgebra_ = Eigen::MatrixXd(k, 0);
  if (subalgebra_.rows() != k)
    throw InputError("subalgebra basis vectors have wrong length");
  if (subalgebra_.cols() > 0 &&
      rank_rel(subalgebra_) < subalgebra_.cols())
    throw InputError("subalgebra basis is rank deficient");
  if (!generators_.empty() && !parent_->has_rep())
    throw UnsupportedError("discrete generators need a matrix representation");
  for (const auto& g : generators_) parent_->require_member(g);
  const double clo = closure_residual();
  if (clo > 1e-10)
    throw InputError("subalgebra basis is not closed under the bracket");
  const double nor = normalization_residual();
  if (nor > 1e-10)
    throw InputError("a discrete generator does not normalize the subalgebra");
}

double SubgroupSpec::closure_residual() const {
  const int rr = r();
  if (rr == 0) return 0.0;
  Eigen::MatrixXd q = orthonormal_span(subalgebra_);
  double worst = 0.0;
  for (int a = 0; a < rr; ++a)
    for (int b = a + 1; b < rr; ++b) {
      Eigen::VectorXd br =
          parent_->bracket(subalgebra_.col(a), subalgebra_.col(b));
      worst = std::max(worst, (br - q * (q.transpose() * br)).norm() /
                                  (1.0 + br.norm()));
    }
  return worst;
}

double SubgroupSpec::normalization_residual() const {
  if (generators_.empty() || r() == 0) return 0.0;
  Eigen::MatrixXd q = orthonormal_span(subalgebra_);
  double worst = 0.0;
  for (const auto& g : generators_)
    for (int a = 0; a < r(); ++a) {
      Eigen::VectorXd im = parent_->group_adjoint(g, subalgebra_.col(a));
      worst = std::max(worst, (im - q * (q.transpose() * im)).norm() /
                                  (1.0 + im.norm()));
    }
  return worst;
}

AnnihilatorBasis annihilator_basis(const SubgroupSpec& h) {
  const int k = h.algebra().dim();
  AnnihilatorBasis out;
  if (h.r() == 0) {
    out.vectors = Eigen::MatrixXd::Identity(k, k);
    out.projector = Eigen::MatrixXd::Identity(k, k);
    return out;
  }
  // Null space of the pairing map mu -> (<mu, eta_a>)_a.
  out.vectors = null_space(h.subalgebra().transpose());
  out.projector = out.vectors * out.vectors.transpose();
  return out;
}

Eigen::MatrixXd normalizer_algebra(const SubgroupSpec& h) {
  const auto& g = h.algebra();
  const int k = g.dim();
  const int r = h.r();
  // Conditions on xi, stacked into one linear system:
  //   P_perp [xi, eta_a] = 0 for each subalgebra basis vector
  //   P_perp (Ad_g xi - xi) = 0 for each discrete generator,
  // where P_perp projects off the subalgebra span.
  Eigen::MatrixXd p_perp = Eigen::MatrixXd::Identity(k, k);
  if (r > 0) {
    Eigen::MatrixXd q = orthonormal_span(h.subalgebra());
    p_perp -= q * q.transpose();
  }
  const int rows = k * (r + static_cast<int>(h.generators().size()));
  if (rows == 0) return Eigen::MatrixXd::Identity(k, k);
  Eigen::MatrixXd sys(rows, k);
  int at = 0;
  for (int a = 0; a < r; ++a) {
    // xi -> [xi, eta_a] is -ad_{eta_a}.
    sys.middleRows(at, k) = -p_perp * g.ad_matrix(h.subalgebra().col(a));
    at += k;
  }
  for (const auto& gen : h.generators()) {
    sys.middleRows(at, k) =
        p_perp * (g.adjoint_matrix(gen) - Eigen::MatrixXd::Identity(k, k));
    at += k;
  }
  Eigen::MatrixXd ker = null_space(sys);
  // The subalgebra always satisfies the conditions; return h first for
  // readability of reports.
  if (r == 0) return ker;
  Eigen::MatrixXd hq = orthonormal_span(h.subalgebra());
  Eigen::MatrixXd all(k, hq.cols() + ker.cols());
  all << hq, ker;
  return orthonormal_span(all);
}

Eigen::MatrixXd normalizer_complement(const SubgroupSpec& h) {
  Eigen::MatrixXd n = normalizer_algebra(h);
  if (h.r() == 0) return n;
  Eigen::MatrixXd hq = orthonormal_span(h.subalgebra());
  Eigen::MatrixXd p_perp =
      Eigen::MatrixXd::Identity(n.rows(), n.rows()) - hq * hq.transpose();
  return orthonormal_span(p_perp * n);
}

Eigen::MatrixXd fixed_set(const SubgroupSpec& h, ActionSpace space) {
  const auto& g = h.algebra();
  const int k = g.dim();
  if (space == ActionSpace::Annihilator) {
    // mu fixed iff ad*_eta mu = 0 for eta in h and Ad*_gen mu = mu,
    // intersected with the annihilator itself.
    std::vector<Eigen::MatrixXd> conds;
    for (int a = 0; a < h.r(); ++a)
      conds.push_back(g.coad_matrix(h.subalgebra().col(a)));
    for (const auto& gen : h.generators())
      conds.push_back(g.adjoint_matrix(gen).transpose() -
                      Eigen::MatrixXd::Identity(k, k));
    if (h.r() > 0) conds.push_back(h.subalgebra().transpose());  // membership
    if (conds.empty()) return Eigen::MatrixXd::Identity(k, k);
    int rows = 0;
    for (const auto& c : conds) rows += static_cast<int>(c.rows());
    Eigen::MatrixXd sys(rows, k);
    int at = 0;
    for (const auto& c : conds) {
      sys.middleRows(at, c.rows()) = c;
      at += static_cast<int>(c.rows());
    }
    return null_space(sys);
  }
  // Quotient case: classes represented on the orthogonal complement of h.
  Eigen::MatrixXd q;  // k x (k-r) complement basis
  if (h.r() == 0) {
    q = Eigen::MatrixXd::Identity(k, k);
  } else {
    q = null_space(orthonormal_span(h.subalgebra()).transpose());
  }
  const int m = static_cast<int>(q.cols());
  std::vector<Eigen::MatrixXd> conds;
  for (int a = 0; a < h.r(); ++a)
    conds.push_back(q.transpose() * g.ad_matrix(h.subalgebra().col(a)) * q);
  for (const auto& gen : h.generators())
    conds.push_back(q.transpose() * g.adjoint_matrix(gen) * q -
                    Eigen::MatrixXd::Identity(m, m));
  if (conds.empty()) return q;
  int rows = 0;
  for (const auto& c : conds) rows += static_cast<int>(c.rows());
  Eigen::MatrixXd sys(rows, m);
  int at = 0;
  for (const auto& c : conds) {
    sys.middleRows(at, c.rows()) = c;
    at += static_cast<int>(c.rows());
  }
  return q * null_space(sys);
}

RestrictedAction annihilator_action(const SubgroupSpec& h) {
  RestrictedAction out;
  const auto& g = h.algebra();
  AnnihilatorBasis ann = annihilator_basis(h);
  out.basis = ann.vectors;
  const Eigen::MatrixXd& q = ann.vectors;
  for (int a = 0; a < h.r(); ++a)
    out.infinitesimal.push_back(q.transpose() *
                                g.coad_matrix(h.subalgebra().col(a)) * q);
  for (const auto& gen : h.generators())
    out.discrete.push_back(q.transpose() * g.adjoint_matrix(gen).transpose() *
                           q);
  return out;
}

std::vector<Eigen::MatrixXd> quotient_structure(const SubgroupSpec& h) {
  const auto& g = h.algebra();
  Eigen::MatrixXd comp = normalizer_complement(h);
  const int q = static_cast<int>(comp.cols());
  std::vector<Eigen::MatrixXd> cs(q, Eigen::MatrixXd::Zero(q, q));
  if (q == 0) return cs;
  Eigen::MatrixXd hq = h.r() > 0 ? orthonormal_span(h.subalgebra())
                                 : Eigen::MatrixXd(g.dim(), 0);
  for (int i = 0; i < q; ++i)
    for (int j = 0; j < q; ++j) {
      Eigen::VectorXd br = g.bracket(comp.col(i), comp.col(j));
      if (hq.cols() > 0) br -= hq * (hq.transpose() * br);  // mod h
      Eigen::VectorXd coords = comp.transpose() * br;
      if ((comp * coords - br).norm() > 1e-9 * (1.0 + br.norm()))
        throw InputError("normalizer quotient is not closed; bad subgroup");
      for (int k = 0; k < q; ++k) cs[k](i, j) = coords(k);
    }
  return cs;
}

// ---------------------------------------------------------------------------
// Built-in pairs

namespace {
Eigen::MatrixXd third_axis() {
  Eigen::MatrixXd b(3, 1);
  b << 0, 0, 1;
  return b;
}
}  // namespace

SubgroupSpec pair_so3_so2() {
  return SubgroupSpec(algebra_so3(), third_axis(), {}, "so3_so2");
}

SubgroupSpec pair_su2_u1() {
  return SubgroupSpec(algebra_su2(), third_axis(), {}, "su2_u1");
}

SubgroupSpec pair_so3_z2() {
  auto g = algebra_so3();
  Eigen::VectorXd axis(3);
  axis << 0, 0, M_PI;
  GroupElement rot = g->exponential(axis);
  return SubgroupSpec(g, Eigen::MatrixXd(3, 0), {rot}, "so3_z2");
}

SubgroupSpec pair_trivial(AlgebraPtr g) {
  return SubgroupSpec(g, Eigen::MatrixXd(g->dim(), 0), {},
                      g->name() + "_free");
}

SubgroupSpec pair_full(AlgebraPtr g) {
  return SubgroupSpec(g, Eigen::MatrixXd::Identity(g->dim(), g->dim()), {},
                      g->name() + "_full");
}

}  // namespace lps

#pragma once

#include <string>
#include <vector>

#include "lps/lie_algebra.hpp"

namespace lps {

/// Basis of the annihilator of a subalgebra inside the dual, plus the
/// orthogonal projector of dual coordinates onto that span.
struct AnnihilatorBasis {
  Eigen::MatrixXd vectors;    // k x (k-r), orthonormal columns
  Eigen::MatrixXd projector;  // k x k
};

/// A closed subgroup H of the represented group: a subalgebra basis for the
/// identity component plus finitely many generators of the component group.
class SubgroupSpec {
 public:
  SubgroupSpec(AlgebraPtr parent, Eigen::MatrixXd subalgebra_basis,
               std::vector<GroupElement> discrete_generators = {},
               std::string name = "");

  const AlgebraPtr& parent() const { return parent_; }
  const LieAlgebraSpec& algebra() const { return *parent_; }
  int r() const { return static_cast<int>(subalgebra_.cols()); }
  const Eigen::MatrixXd& subalgebra() const { return subalgebra_; }
  const std::vector<GroupElement>& generators() const { return generators_; }
  const std::string& name() const { return name_; }
  bool trivial() const { return r() == 0 && generators_.empty(); }

  double closure_residual() const;
  double normalization_residual() const;

 private:
  AlgebraPtr parent_;
  Eigen::MatrixXd subalgebra_;  // k x r columns
  std::vector<GroupElement> generators_;
  std::string name_;
};

/// Orthonormal basis of {mu : <mu, eta> = 0 for all eta in h}.
AnnihilatorBasis annihilator_basis(const SubgroupSpec& h);

/// Basis (columns) of the normalizer algebra
/// n = {xi : [xi, h] in h, Ad_g xi - xi in h for every discrete generator}.
/// Contains the subalgebra; see normalizer_complement for n/h.
Eigen::MatrixXd normalizer_algebra(const SubgroupSpec& h);

/// Basis of a complement of h inside n (orthogonal to h), representing n/h.
Eigen::MatrixXd normalizer_complement(const SubgroupSpec& h);

enum class ActionSpace { Annihilator, QuotientGh };

/// Fixed set of the induced H-action. For Annihilator the result lives in
/// the dual and is contained in h-annihilator; for QuotientGh the classes are
/// represented on the orthogonal complement of h in the algebra.
Eigen::MatrixXd fixed_set(const SubgroupSpec& h, ActionSpace space);

/// Matrices of the coadjoint H-action restricted to annihilator coordinates
/// (in the basis returned by annihilator_basis): infinitesimal generators
/// for the subalgebra basis and one matrix per discrete generator.
struct RestrictedAction {
  Eigen::MatrixXd basis;                    // annihilator basis, k x m
  std::vector<Eigen::MatrixXd> infinitesimal;  // m x m per subalgebra vector
  std::vector<Eigen::MatrixXd> discrete;       // m x m per generator
};
RestrictedAction annihilator_action(const SubgroupSpec& h);

/// Structure constants of n/h in the basis from normalizer_complement.
/// Throws if h is not an ideal of n (cannot happen for a valid subgroup).
std::vector<Eigen::MatrixXd> quotient_structure(const SubgroupSpec& h);

// Built-in subgroup pairs on the catalog algebras.
SubgroupSpec pair_so3_so2();   // rotations about the third axis
SubgroupSpec pair_su2_u1();    // the circle generated by e3
SubgroupSpec pair_so3_z2();    // the two-element group {1, R_z(pi)}
SubgroupSpec pair_trivial(AlgebraPtr g);  // H = {e}
SubgroupSpec pair_full(AlgebraPtr g);     // H = G (identity component)

}  // namespace lps

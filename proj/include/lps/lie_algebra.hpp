#pragma once

#include <Eigen/Dense>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace lps {

/// Thrown on malformed or out-of-contract inputs (CLI maps this to exit 1).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when an operation needs data the spec object does not carry
/// (e.g. group operations without a matrix representation).
class UnsupportedError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct AlgebraVector {
  Eigen::VectorXd coords;
};

struct CovectorPoint {
  Eigen::VectorXd coords;
};

struct GroupElement {
  Eigen::MatrixXd matrix;
  double tolerance = 1e-10;
};

/// A finite-dimensional real Lie algebra given by structure constants in a
/// fixed basis, with an optional faithful real matrix representation and an
/// optional invariant inner product.
///
/// Sign conventions used throughout the library (fixed once, everything else
/// is derived from them):
///   [xi_i, xi_j] = c^k_ij xi_k
///   <ad*_xi mu, eta> = <mu, [xi, eta]>          (so ad*_xi = ad_xi^T)
///   <Ad*_g mu, eta>  = <mu, Ad_g eta>           (so Ad*_g  = Ad_g^T)
/// With these, d/dt|_0 Ad*_{exp(-t xi)} mu = -ad*_xi mu.
class LieAlgebraSpec {
 public:
  LieAlgebraSpec(std::vector<Eigen::MatrixXd> structure,
                 std::vector<std::string> labels,
                 std::vector<Eigen::MatrixXd> rep = {},
                 Eigen::MatrixXd metric = Eigen::MatrixXd(),
                 bool orthogonal_group = true,
                 std::string name = "");

  int dim() const { return dim_; }
  const std::string& name() const { return name_; }
  const std::vector<std::string>& labels() const { return labels_; }

  /// structure()[k](i,j) = c^k_ij
  const std::vector<Eigen::MatrixXd>& structure() const { return structure_; }

  bool has_rep() const { return !rep_.empty(); }
  int rep_dim() const;
  const std::vector<Eigen::MatrixXd>& rep() const { return rep_; }

  bool has_metric() const { return metric_.size() > 0; }
  const Eigen::MatrixXd& metric() const { return metric_; }

  bool orthogonal_group() const { return orthogonal_group_; }

  Eigen::VectorXd bracket(const Eigen::VectorXd& a,
                          const Eigen::VectorXd& b) const;
  AlgebraVector bracket(const AlgebraVector& a, const AlgebraVector& b) const;

  /// Matrix of ad_xi acting on algebra coordinates.
  Eigen::MatrixXd ad_matrix(const Eigen::VectorXd& xi) const;
  /// Matrix of ad*_xi acting on covector coordinates (= ad_matrix^T).
  Eigen::MatrixXd coad_matrix(const Eigen::VectorXd& xi) const;

  Eigen::VectorXd coadjoint_ad(const Eigen::VectorXd& xi,
                               const Eigen::VectorXd& mu) const;
  CovectorPoint coadjoint_ad(const AlgebraVector& xi,
                             const CovectorPoint& mu) const;

  double pairing(const Eigen::VectorXd& mu, const Eigen::VectorXd& xi) const;

  /// rho(xi) = sum_i xi^i rho(xi_i); requires a representation.
  Eigen::MatrixXd rep_of(const Eigen::VectorXd& xi) const;
  /// Least-squares coordinates of a matrix in the representation basis;
  /// if residual != nullptr it receives the off-basis remainder norm.
  Eigen::VectorXd coords_of(const Eigen::MatrixXd& m,
                            double* residual = nullptr) const;

  GroupElement exponential(const Eigen::VectorXd& xi) const;
  GroupElement exponential(const AlgebraVector& xi) const;

  /// Residual of g against the represented group (orthogonality defect when
  /// the group is declared orthogonal-type, plus |det|-1 drift).
  double membership_residual(const GroupElement& g) const;
  void require_member(const GroupElement& g) const;

  /// Ad_g by matrix conjugation, re-expressed in basis coordinates.
  Eigen::VectorXd group_adjoint(const GroupElement& g,
                                const Eigen::VectorXd& xi) const;
  /// Ad*_g = Ad_g^T on covector coordinates.
  Eigen::VectorXd group_coadjoint(const GroupElement& g,
                                  const Eigen::VectorXd& mu) const;
  /// Matrix of Ad_g on algebra coordinates.
  Eigen::MatrixXd adjoint_matrix(const GroupElement& g) const;

  /// Same algebra expressed in a new basis; columns of basis are the new
  /// basis vectors in the old coordinates.
  LieAlgebraSpec rebased(const Eigen::MatrixXd& basis,
                         std::vector<std::string> labels = {},
                         std::string name = "") const;

  // Diagnostics.
  double jacobi_residual() const;
  double rep_residual() const;
  bool antisymmetry_exact() const;

 private:
  int dim_ = 0;
  std::vector<Eigen::MatrixXd> structure_;
  std::vector<std::string> labels_;
  std::vector<Eigen::MatrixXd> rep_;
  Eigen::MatrixXd metric_;
  bool orthogonal_group_ = true;
  std::string name_;
  // Pseudo-inverse data for coords_of: vec(rho_i) stacked as columns.
  Eigen::MatrixXd rep_basis_vec_;
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> rep_cod_;
};

using AlgebraPtr = std::shared_ptr<const LieAlgebraSpec>;

// Built-in algebras. so3/su2 use the cross-product structure constants
// (c^k_ij = epsilon_ijk); su2's representation is the realified 4x4 form of
// the complex 2x2 one. u1 is one-dimensional with a 2x2 rotation generator.
AlgebraPtr algebra_so3();
AlgebraPtr algebra_su2();
AlgebraPtr algebra_u1();
AlgebraPtr algebra_so3_u1();
/// All of the above, for catalog-wide checks.
std::vector<AlgebraPtr> algebra_catalog();

/// Matrix exponential by scaling and squaring with a truncated series.
Eigen::MatrixXd matrix_exp(const Eigen::MatrixXd& a);

struct MatrixLogResult {
  Eigen::MatrixXd log;
  bool reliable = true;       // false near the principal-branch cut
  double branch_margin = 0.0; // pi - max |arg(eigenvalue)|
};

/// Principal matrix logarithm by inverse scaling (repeated square roots)
/// and a truncated series; flags arguments with eigenvalues within
/// `branch_tol` of the negative real axis as unreliable.
MatrixLogResult matrix_log_principal(const Eigen::MatrixXd& g,
                                     double branch_tol = 1e-3);

}  // namespace lps

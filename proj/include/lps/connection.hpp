#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lps/lie_algebra.hpp"

namespace lps {

struct Box {
  Eigen::VectorXd lo, hi;
  int dim() const { return static_cast<int>(lo.size()); }
  bool contains(const Eigen::VectorXd& x, double margin = 0.0) const;
  double scale() const { return (hi - lo).maxCoeff(); }
};

/// Local trivialization of a connection over a coordinate box: coefficient
/// functions A_i^alpha(x) valued in the fiber algebra (the algebra of the
/// group acting freely on the constant-stabilizer set).
///
/// Conventions, fixed once:
///   horizontal lift ODE      g' = -rho(A_i(x) x'^i) g   (compose lifts of
///     concatenated paths right to left: hol(l1 then l2) = hol(l2) hol(l1));
///   curvature                B_ij = d_i A_j - d_j A_i - [A_i, A_j],
///     matching the defect of the commuted coordinate flows in the frame
///     where vertical vectors are read off at the identity.
class ConnectionChart {
 public:
  ConnectionChart(int base_dim, AlgebraPtr fiber_algebra,
                  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> coeff,
                  Box box, std::string name = "",
                  std::function<Eigen::MatrixXd(const Eigen::VectorXd&, int)>
                      coeff_deriv = {});

  int base_dim() const { return n_; }
  int fiber_dim() const { return static_cast<int>(algebra_->dim()); }
  const AlgebraPtr& algebra() const { return algebra_; }
  const Box& box() const { return box_; }
  const std::string& name() const { return name_; }
  bool analytic_derivatives() const { return static_cast<bool>(deriv_); }

  /// q x n matrix whose column i is A_i(x) in fiber-algebra coordinates.
  Eigen::MatrixXd coefficients(const Eigen::VectorXd& x) const;
  /// d/dx_l of the coefficient matrix (analytic or central differences).
  Eigen::MatrixXd coefficient_derivative(const Eigen::VectorXd& x,
                                         int l) const;

  void require_inside(const Eigen::VectorXd& x, double margin = 0.0) const;

 private:
  int n_;
  AlgebraPtr algebra_;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> coeff_;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&, int)> deriv_;
  Box box_;
  std::string name_;
};

enum class CurvatureSource { StructureFormula, CommutatorProbe, ExplicitTable };

/// Antisymmetric table of curvature coefficients B^alpha_ij(x).
class CurvatureTable {
 public:
  CurvatureTable(int base_dim, int fiber_dim, CurvatureSource source,
                 std::function<Eigen::VectorXd(const Eigen::VectorXd&, int,
                                               int)> upper,
                 std::function<Eigen::VectorXd(const Eigen::VectorXd&, int,
                                               int, int)> upper_deriv = {});

  int base_dim() const { return n_; }
  int fiber_dim() const { return q_; }
  CurvatureSource source() const { return source_; }
  bool analytic_derivatives() const { return static_cast<bool>(deriv_); }

  /// B_ij(x) as a fiber-algebra coordinate vector; antisymmetric in (i, j)
  /// by construction.
  Eigen::VectorXd value(const Eigen::VectorXd& x, int i, int j) const;
  /// d/dx_l B_ij(x).
  Eigen::VectorXd derivative(const Eigen::VectorXd& x, int i, int j,
                             int l) const;

 private:
  int n_, q_;
  CurvatureSource source_;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&, int, int)> upper_;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&, int, int, int)> deriv_;
};

/// Curvature from the coefficient table:
///   B^a_ij = d_i A_j^a - d_j A_i^a - c^a_bc A_i^b A_j^c.
CurvatureTable curvature_structure(const ConnectionChart& chart);

class Poly;  // lps/poly.hpp

/// Chart with polynomial coefficients coeffs[alpha][i] (exact derivatives).
ConnectionChart chart_from_polys(
    int base_dim, AlgebraPtr fiber_algebra,
    const std::vector<std::vector<Poly>>& coeffs, Box box,
    std::string name = "");

/// Explicit antisymmetric polynomial curvature table upper[i][j] (i < j),
/// each entry a list of fiber-coordinate polynomials.
CurvatureTable curvature_from_polys(
    int base_dim, int fiber_dim,
    const std::map<std::pair<int, int>, std::vector<Poly>>& upper);

/// Curvature from the commutator of horizontal coordinate flows around a
/// small centered square, Richardson-extrapolated. Returns coordinates in
/// the fiber algebra; off_algebra, when given, receives the residual of the
/// holonomy defect logarithm outside the algebra span.
Eigen::VectorXd curvature_commutator(const ConnectionChart& chart,
                                     const Eigen::VectorXd& x, int i, int j,
                                     double probe = 0.0,
                                     double* off_algebra = nullptr);

/// Covariant closure residual max over index triples:
///   cyc_{ijk} (d_i B_jk - [A_i, B_jk]).
/// For a one-dimensional fiber algebra the bracket term vanishes and this is
/// the plain closure of B. Returns 0 when the base dimension is below 3.
double bianchi_residual(const ConnectionChart& chart,
                        const CurvatureTable& curv, const Eigen::VectorXd& x);

struct LoopPath {
  Eigen::MatrixXd samples;  // n x (m+1); closed iff first == last column
  bool closed() const;
  double closure_gap() const;
  double max_gap() const;
};

LoopPath loop_square(const Eigen::VectorXd& center, double side,
                     int i = 0, int j = 1, int refinement = 64);
LoopPath loop_circle(const Eigen::VectorXd& center, double radius,
                     int i = 0, int j = 1, int refinement = 128);
/// Triangle of great-circle arcs on the unit sphere projected to the chart
/// through stereographic coordinates x = (X, Y) / (1 + Z).
LoopPath loop_spherical_triangle(const Eigen::Vector3d& a,
                                 const Eigen::Vector3d& b,
                                 const Eigen::Vector3d& c,
                                 int refinement = 96);
LoopPath loop_from_samples(Eigen::MatrixXd samples);

struct LiftResult {
  std::vector<Eigen::MatrixXd> fiber;  // one group matrix per path sample
  bool ok = true;
  int failure_index = -1;
  double refinement_error = 0.0;  // endpoint change under step halving
};

/// Horizontal lift of a sampled path (open or closed) through g0, by
/// fourth-order Runge-Kutta on each polyline segment with one Richardson
/// halving for the endpoint.
LiftResult horizontal_lift(const ConnectionChart& chart,
                           const LoopPath& path, const GroupElement& g0,
                           int substeps = 8);

struct HolonomyResult {
  GroupElement element;
  Eigen::VectorXd logarithm;  // fiber-algebra coordinates
  bool log_reliable = true;
  double membership_residual = 0.0;
  double off_algebra_residual = 0.0;
  double refinement_error = 0.0;
};

HolonomyResult holonomy(const ConnectionChart& chart, const LoopPath& loop,
                        int substeps = 8);

struct AmbroseSingerLoopCheck {
  double membership_residual = 0.0;
  double span_residual = 0.0;
  double log_norm = 0.0;
  bool log_reliable = true;
  bool pass = false;
};

struct AmbroseSingerReport {
  std::vector<AmbroseSingerLoopCheck> loops;
  int curvature_span_dim = 0;
  bool pass = false;
};

/// Holonomy of each loop must lie in the represented group, and each
/// holonomy logarithm must lie in the span of the curvature values over the
/// grid of base points.
AmbroseSingerReport ambrose_singer_check(
    const ConnectionChart& chart, const CurvatureTable& curv,
    const std::vector<LoopPath>& loops,
    const std::vector<Eigen::VectorXd>& grid, double membership_tol = 1e-7,
    double span_tol = 1e-6);

}  // namespace lps

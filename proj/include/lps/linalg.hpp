#pragma once

#include <Eigen/Dense>

namespace lps {

/// Numerical rank with threshold relative to the largest singular value.
int rank_rel(const Eigen::MatrixXd& m, double rtol = 1e-10);

/// Orthonormal basis (columns) of the column span of m.
Eigen::MatrixXd orthonormal_span(const Eigen::MatrixXd& m, double rtol = 1e-10);

/// Orthonormal basis (columns) of the null space of m (kernel of x -> m*x).
Eigen::MatrixXd null_space(const Eigen::MatrixXd& m, double rtol = 1e-10);

/// Distance between column spans as the spectral norm of the projector
/// difference. 0 for equal spans (including both empty), 1 for spans of
/// different dimension.
double subspace_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// Orthonormal basis of span(a) ∩ span(b).
Eigen::MatrixXd subspace_intersection(const Eigen::MatrixXd& a,
                                      const Eigen::MatrixXd& b,
                                      double rtol = 1e-10);

/// Orthogonal projector onto the column span of m.
Eigen::MatrixXd span_projector(const Eigen::MatrixXd& m, double rtol = 1e-10);

/// Residual of v against span(m): norm of the component outside the span.
double off_span_residual(const Eigen::MatrixXd& m, const Eigen::VectorXd& v,
                         double rtol = 1e-10);

}  // namespace lps

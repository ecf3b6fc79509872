#include "lps/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace lps {

namespace {
Eigen::JacobiSVD<Eigen::MatrixXd> full_svd(const Eigen::MatrixXd& m) {
  return Eigen::JacobiSVD<Eigen::MatrixXd>(
      m, Eigen::ComputeFullU | Eigen::ComputeFullV);
}
}  // namespace

namespace {
// Data throughout the library is O(1)-scaled, so singular values are cut
// relative to max(1, sigma_max); a purely relative cut would read the noise
// of a numerically-zero matrix as full rank.
double sv_threshold(const Eigen::VectorXd& s, double rtol) {
  const double smax = s.size() ? s(0) : 0.0;
  return rtol * std::max(1.0, smax);
}
}  // namespace

int rank_rel(const Eigen::MatrixXd& m, double rtol) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& s = svd.singularValues();
  const double thr = sv_threshold(s, rtol);
  int r = 0;
  for (int i = 0; i < s.size(); ++i)
    if (s(i) > thr) ++r;
  return r;
}

Eigen::MatrixXd orthonormal_span(const Eigen::MatrixXd& m, double rtol) {
  if (m.size() == 0 || m.cols() == 0) return Eigen::MatrixXd(m.rows(), 0);
  auto svd = full_svd(m);
  const auto& s = svd.singularValues();
  const double thr = sv_threshold(s, rtol);
  int r = 0;
  for (int i = 0; i < s.size(); ++i)
    if (s(i) > thr) ++r;
  return svd.matrixU().leftCols(r);
}

Eigen::MatrixXd null_space(const Eigen::MatrixXd& m, double rtol) {
  if (m.size() == 0 || m.rows() == 0)
    return Eigen::MatrixXd::Identity(m.cols(), m.cols());
  auto svd = full_svd(m);
  const auto& s = svd.singularValues();
  const double thr = sv_threshold(s, rtol);
  int r = 0;
  for (int i = 0; i < s.size(); ++i)
    if (s(i) > thr) ++r;
  return svd.matrixV().rightCols(m.cols() - r);
}

Eigen::MatrixXd span_projector(const Eigen::MatrixXd& m, double rtol) {
  Eigen::MatrixXd q = orthonormal_span(m, rtol);
  if (q.cols() == 0) return Eigen::MatrixXd::Zero(m.rows(), m.rows());
  return q * q.transpose();
}

double subspace_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const int n = a.rows() > 0 ? static_cast<int>(a.rows())
                             : static_cast<int>(b.rows());
  if (n == 0) return 0.0;
  Eigen::MatrixXd pa = a.size() == 0 ? Eigen::MatrixXd::Zero(n, n)
                                     : span_projector(a);
  Eigen::MatrixXd pb = b.size() == 0 ? Eigen::MatrixXd::Zero(n, n)
                                     : span_projector(b);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(pa - pb);
  return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
}

Eigen::MatrixXd subspace_intersection(const Eigen::MatrixXd& a,
                                      const Eigen::MatrixXd& b, double rtol) {
  Eigen::MatrixXd qa = orthonormal_span(a, rtol);
  Eigen::MatrixXd qb = orthonormal_span(b, rtol);
  if (qa.cols() == 0 || qb.cols() == 0)
    return Eigen::MatrixXd(a.rows(), 0);
  // Kernel of [qa, -qb]: pairs (x, y) with qa*x == qb*y.
  Eigen::MatrixXd stacked(qa.rows(), qa.cols() + qb.cols());
  stacked << qa, -qb;
  Eigen::MatrixXd ker = null_space(stacked, rtol);
  if (ker.cols() == 0) return Eigen::MatrixXd(a.rows(), 0);
  Eigen::MatrixXd vecs = qa * ker.topRows(qa.cols());
  return orthonormal_span(vecs, rtol);
}

double off_span_residual(const Eigen::MatrixXd& m, const Eigen::VectorXd& v,
                         double rtol) {
  Eigen::MatrixXd q = orthonormal_span(m, rtol);
  if (q.cols() == 0) return v.norm();
  return (v - q * (q.transpose() * v)).norm();
}

}  // namespace lps

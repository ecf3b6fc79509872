#include "lps/lie_algebra.hpp"

#include <cmath>
#include <complex>

namespace lps {

namespace {

Eigen::MatrixXd vec_columns(const std::vector<Eigen::MatrixXd>& mats) {
  if (mats.empty()) return Eigen::MatrixXd();
  const int d2 = static_cast<int>(mats[0].size());
  Eigen::MatrixXd out(d2, static_cast<int>(mats.size()));
  for (size_t i = 0; i < mats.size(); ++i)
    out.col(static_cast<int>(i)) =
        Eigen::Map<const Eigen::VectorXd>(mats[i].data(), d2);
  return out;
}

}  // namespace

LieAlgebraSpec::LieAlgebraSpec(std::vector<Eigen::MatrixXd> structure,
                               std::vector<std::string> labels,
                               std::vector<Eigen::MatrixXd> rep,
                               Eigen::MatrixXd metric, bool orthogonal_group,
                               std::string name)
    : dim_(static_cast<int>(structure.size())),
      structure_(std::move(structure)),
      labels_(std::move(labels)),
      rep_(std::move(rep)),
      metric_(std::move(metric)),
      orthogonal_group_(orthogonal_group),
      name_(std::move(name)) {
  if (dim_ <= 0) throw InputError("algebra dimension must be positive");
  for (const auto& ck : structure_)
    if (ck.rows() != dim_ || ck.cols() != dim_)
      throw InputError("structure constant block has wrong shape");
  if (labels_.empty()) {
    labels_.resize(dim_);
    for (int i = 0; i < dim_; ++i) labels_[i] = "e" + std::to_string(i + 1);
  }
  if (static_cast<int>(labels_.size()) != dim_)
    throw InputError("label count does not match dimension");
  if (!antisymmetry_exact())
    throw InputError("structure constants are not antisymmetric");
  if (jacobi_residual() > 1e-12)
    throw InputError("structure constants violate the Jacobi identity");
  if (!rep_.empty()) {
    if (static_cast<int>(rep_.size()) != dim_)
      throw InputError("representation must have one matrix per basis vector");
    const int d = static_cast<int>(rep_[0].rows());
    for (const auto& m : rep_)
      if (m.rows() != d || m.cols() != d)
        throw InputError("representation matrices must be square, same size");
    rep_basis_vec_ = vec_columns(rep_);
    rep_cod_.compute(rep_basis_vec_);
    if (rep_cod_.rank() < dim_)
      throw InputError("representation matrices are linearly dependent");
    if (rep_residual() > 1e-10)
      throw InputError("representation does not match structure constants");
  }
  if (metric_.size() > 0) {
    if (metric_.rows() != dim_ || metric_.cols() != dim_)
      throw InputError("metric has wrong shape");
    if ((metric_ - metric_.transpose()).norm() > 1e-14 * (1 + metric_.norm()))
      throw InputError("metric must be symmetric");
  }
}

int LieAlgebraSpec::rep_dim() const {
  if (!has_rep()) throw UnsupportedError("algebra has no representation");
  return static_cast<int>(rep_[0].rows());
}

Eigen::VectorXd LieAlgebraSpec::bracket(const Eigen::VectorXd& a,
                                        const Eigen::VectorXd& b) const {
  if (a.size() != dim_ || b.size() != dim_)
    throw InputError("bracket: coordinate vector length does not match dim");
  Eigen::VectorXd out(dim_);
  for (int k = 0; k < dim_; ++k) out(k) = a.dot(structure_[k] * b);
  return out;
}

AlgebraVector LieAlgebraSpec::bracket(const AlgebraVector& a,
                                      const AlgebraVector& b) const {
  return {bracket(a.coords, b.coords)};
}

Eigen::MatrixXd LieAlgebraSpec::ad_matrix(const Eigen::VectorXd& xi) const {
  if (xi.size() != dim_) throw InputError("ad: wrong vector length");
  Eigen::MatrixXd m(dim_, dim_);
  for (int k = 0; k < dim_; ++k)
    m.row(k) = (xi.transpose() * structure_[k]);
  return m;
}

Eigen::MatrixXd LieAlgebraSpec::coad_matrix(const Eigen::VectorXd& xi) const {
  return ad_matrix(xi).transpose();
}

Eigen::VectorXd LieAlgebraSpec::coadjoint_ad(const Eigen::VectorXd& xi,
                                             const Eigen::VectorXd& mu) const {
  if (xi.size() != dim_ || mu.size() != dim_)
    throw InputError("coadjoint_ad: wrong vector length");
  Eigen::VectorXd out(dim_);
  for (int j = 0; j < dim_; ++j) {
    double s = 0.0;
    for (int k = 0; k < dim_; ++k) s += mu(k) * xi.dot(structure_[k].col(j));
    out(j) = s;
  }
  return out;
}

CovectorPoint LieAlgebraSpec::coadjoint_ad(const AlgebraVector& xi,
                                           const CovectorPoint& mu) const {
  return {coadjoint_ad(xi.coords, mu.coords)};
}

double LieAlgebraSpec::pairing(const Eigen::VectorXd& mu,
                               const Eigen::VectorXd& xi) const {
  if (mu.size() != dim_ || xi.size() != dim_)
    throw InputError("pairing: wrong vector length");
  return mu.dot(xi);
}

Eigen::MatrixXd LieAlgebraSpec::rep_of(const Eigen::VectorXd& xi) const {
  if (!has_rep()) throw UnsupportedError("algebra has no representation");
  if (xi.size() != dim_) throw InputError("rep_of: wrong vector length");
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(rep_[0].rows(), rep_[0].cols());
  for (int i = 0; i < dim_; ++i) m += xi(i) * rep_[i];
  return m;
}

Eigen::VectorXd LieAlgebraSpec::coords_of(const Eigen::MatrixXd& m,
                                          double* residual) const {
  if (!has_rep()) throw UnsupportedError("algebra has no representation");
  Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
  Eigen::VectorXd coords = rep_cod_.solve(v);
  if (residual) *residual = (rep_basis_vec_ * coords - v).norm();
  return coords;
}

GroupElement LieAlgebraSpec::exponential(const Eigen::VectorXd& xi) const {
  return {matrix_exp(rep_of(xi)), 1e-10};
}

GroupElement LieAlgebraSpec::exponential(const AlgebraVector& xi) const {
  return exponential(xi.coords);
}

double LieAlgebraSpec::membership_residual(const GroupElement& g) const {
  const int d = rep_dim();
  if (g.matrix.rows() != d || g.matrix.cols() != d)
    throw InputError("group element has wrong matrix size");
  double res = 0.0;
  if (orthogonal_group_) {
    res = (g.matrix.transpose() * g.matrix - Eigen::MatrixXd::Identity(d, d))
              .norm();
    res = std::max(res, std::abs(std::abs(g.matrix.determinant()) - 1.0));
  }
  return res;
}

void LieAlgebraSpec::require_member(const GroupElement& g) const {
  const double res = membership_residual(g);
  if (res > g.tolerance)
    throw InputError("group element fails membership check (residual " +
                     std::to_string(res) + ")");
}

Eigen::VectorXd LieAlgebraSpec::group_adjoint(const GroupElement& g,
                                              const Eigen::VectorXd& xi) const {
  require_member(g);
  Eigen::MatrixXd conj =
      g.matrix * rep_of(xi) * g.matrix.inverse();
  double res = 0.0;
  Eigen::VectorXd coords = coords_of(conj, &res);
  if (res > 1e-8 * (1.0 + conj.norm()))
    throw InputError("adjoint image leaves the algebra span");
  return coords;
}

Eigen::MatrixXd LieAlgebraSpec::adjoint_matrix(const GroupElement& g) const {
  Eigen::MatrixXd m(dim_, dim_);
  for (int i = 0; i < dim_; ++i) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(dim_);
    e(i) = 1.0;
    m.col(i) = group_adjoint(g, e);
  }
  return m;
}

Eigen::VectorXd LieAlgebraSpec::group_coadjoint(
    const GroupElement& g, const Eigen::VectorXd& mu) const {
  if (mu.size() != dim_) throw InputError("group_coadjoint: wrong length");
  return adjoint_matrix(g).transpose() * mu;
}

LieAlgebraSpec LieAlgebraSpec::rebased(const Eigen::MatrixXd& basis,
                                       std::vector<std::string> labels,
                                       std::string name) const {
  if (basis.rows() != dim_ || basis.cols() != dim_)
    throw InputError("rebased: basis must be square of algebra dimension");
  Eigen::FullPivLU<Eigen::MatrixXd> lu(basis);
  if (!lu.isInvertible()) throw InputError("rebased: basis is singular");
  Eigen::MatrixXd inv = lu.inverse();
  // c'[k](i,j) = sum over old indices of inv(k,:) c[.](basis_i, basis_j)
  std::vector<Eigen::MatrixXd> cs(dim_, Eigen::MatrixXd::Zero(dim_, dim_));
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j) {
      Eigen::VectorXd br = bracket(basis.col(i), basis.col(j));
      Eigen::VectorXd nb = inv * br;
      for (int k = 0; k < dim_; ++k) cs[k](i, j) = nb(k);
    }
  // Clean tiny round-off so antisymmetry stays exact.
  for (auto& ck : cs) {
    ck = 0.5 * (ck - ck.transpose().eval());
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j)
        if (std::abs(ck(i, j)) < 1e-14) ck(i, j) = 0.0;
  }
  std::vector<Eigen::MatrixXd> new_rep;
  if (has_rep()) {
    new_rep.reserve(dim_);
    for (int i = 0; i < dim_; ++i) new_rep.push_back(rep_of(basis.col(i)));
  }
  Eigen::MatrixXd new_metric;
  if (has_metric()) new_metric = basis.transpose() * metric_ * basis;
  if (labels.empty()) {
    labels.resize(dim_);
    for (int i = 0; i < dim_; ++i) labels[i] = "f" + std::to_string(i + 1);
  }
  return LieAlgebraSpec(std::move(cs), std::move(labels), std::move(new_rep),
                        std::move(new_metric), orthogonal_group_,
                        name.empty() ? name_ + "_rebased" : std::move(name));
}

double LieAlgebraSpec::jacobi_residual() const {
  double worst = 0.0;
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j)
      for (int k = 0; k < dim_; ++k)
        for (int l = 0; l < dim_; ++l) {
          double s = 0.0;
          for (int m = 0; m < dim_; ++m)
            s += structure_[m](i, j) * structure_[l](m, k) +
                 structure_[m](j, k) * structure_[l](m, i) +
                 structure_[m](k, i) * structure_[l](m, j);
          worst = std::max(worst, std::abs(s));
        }
  return worst;
}

double LieAlgebraSpec::rep_residual() const {
  if (!has_rep()) return 0.0;
  double worst = 0.0;
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j) {
      Eigen::MatrixXd comm = rep_[i] * rep_[j] - rep_[j] * rep_[i];
      for (int k = 0; k < dim_; ++k) comm -= structure_[k](i, j) * rep_[k];
      worst = std::max(worst, comm.cwiseAbs().maxCoeff());
    }
  return worst;
}

bool LieAlgebraSpec::antisymmetry_exact() const {
  for (const auto& ck : structure_)
    if ((ck + ck.transpose()).cwiseAbs().maxCoeff() != 0.0) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Built-in algebras

namespace {

std::vector<Eigen::MatrixXd> cross_structure() {
  std::vector<Eigen::MatrixXd> c(3, Eigen::MatrixXd::Zero(3, 3));
  // c^k_ij = epsilon_ijk
  c[2](0, 1) = 1.0;
  c[2](1, 0) = -1.0;
  c[0](1, 2) = 1.0;
  c[0](2, 1) = -1.0;
  c[1](2, 0) = 1.0;
  c[1](0, 2) = -1.0;
  return c;
}

std::vector<Eigen::MatrixXd> so3_rep() {
  std::vector<Eigen::MatrixXd> r(3, Eigen::MatrixXd::Zero(3, 3));
  r[0](1, 2) = -1.0;
  r[0](2, 1) = 1.0;
  r[1](0, 2) = 1.0;
  r[1](2, 0) = -1.0;
  r[2](0, 1) = -1.0;
  r[2](1, 0) = 1.0;
  return r;
}

// Realification of a complex 2x2 matrix: each entry a+bi becomes the
// 2x2 block [[a,-b],[b,a]].
Eigen::MatrixXd realify2(const Eigen::Matrix2cd& m) {
  Eigen::MatrixXd out(4, 4);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const std::complex<double> z = m(i, j);
      out(2 * i, 2 * j) = z.real();
      out(2 * i, 2 * j + 1) = -z.imag();
      out(2 * i + 1, 2 * j) = z.imag();
      out(2 * i + 1, 2 * j + 1) = z.real();
    }
  return out;
}

std::vector<Eigen::MatrixXd> su2_rep() {
  using namespace std::complex_literals;
  Eigen::Matrix2cd s1, s2, s3;
  s1 << 0, 1, 1, 0;
  s2 << 0, -1i, 1i, 0;
  s3 << 1, 0, 0, -1;
  // e_a = -i sigma_a / 2, so [e1,e2] = e3 cyclically.
  std::vector<Eigen::MatrixXd> r;
  r.push_back(realify2((-0.5i * s1).eval()));
  r.push_back(realify2((-0.5i * s2).eval()));
  r.push_back(realify2((-0.5i * s3).eval()));
  return r;
}

Eigen::MatrixXd u1_generator() {
  Eigen::MatrixXd j(2, 2);
  j << 0, -1, 1, 0;
  return j;
}

}  // namespace

AlgebraPtr algebra_so3() {
  static AlgebraPtr a = std::make_shared<LieAlgebraSpec>(
      cross_structure(), std::vector<std::string>{"e1", "e2", "e3"}, so3_rep(),
      Eigen::MatrixXd::Identity(3, 3), true, "so3");
  return a;
}

AlgebraPtr algebra_su2() {
  static AlgebraPtr a = std::make_shared<LieAlgebraSpec>(
      cross_structure(), std::vector<std::string>{"e1", "e2", "e3"}, su2_rep(),
      Eigen::MatrixXd::Identity(3, 3), true, "su2");
  return a;
}

AlgebraPtr algebra_u1() {
  static AlgebraPtr a = std::make_shared<LieAlgebraSpec>(
      std::vector<Eigen::MatrixXd>{Eigen::MatrixXd::Zero(1, 1)},
      std::vector<std::string>{"e"},
      std::vector<Eigen::MatrixXd>{u1_generator()},
      Eigen::MatrixXd::Identity(1, 1), true, "u1");
  return a;
}

AlgebraPtr algebra_so3_u1() {
  std::vector<Eigen::MatrixXd> c(4, Eigen::MatrixXd::Zero(4, 4));
  auto c3 = cross_structure();
  for (int k = 0; k < 3; ++k) c[k].topLeftCorner(3, 3) = c3[k];
  auto r3 = so3_rep();
  std::vector<Eigen::MatrixXd> rep(4, Eigen::MatrixXd::Zero(5, 5));
  for (int i = 0; i < 3; ++i) rep[i].topLeftCorner(3, 3) = r3[i];
  rep[3].bottomRightCorner(2, 2) = u1_generator();
  static AlgebraPtr a = std::make_shared<LieAlgebraSpec>(
      std::move(c), std::vector<std::string>{"e1", "e2", "e3", "u"},
      std::move(rep), Eigen::MatrixXd::Identity(4, 4), true, "so3_u1");
  return a;
}

std::vector<AlgebraPtr> algebra_catalog() {
  return {algebra_so3(), algebra_su2(), algebra_u1(), algebra_so3_u1()};
}

// ---------------------------------------------------------------------------
// Matrix exponential / logarithm

Eigen::MatrixXd matrix_exp(const Eigen::MatrixXd& a) {
  const int d = static_cast<int>(a.rows());
  if (a.cols() != d) throw InputError("matrix_exp: matrix must be square");
  double nrm = a.cwiseAbs().rowwise().sum().maxCoeff();  // inf norm
  int squarings = 0;
  while (nrm > 0.5) {
    nrm *= 0.5;
    ++squarings;
  }
  Eigen::MatrixXd x = a / std::pow(2.0, squarings);
  Eigen::MatrixXd term = Eigen::MatrixXd::Identity(d, d);
  Eigen::MatrixXd sum = term;
  for (int n = 1; n <= 30; ++n) {
    term = (term * x) / static_cast<double>(n);
    sum += term;
    if (term.cwiseAbs().maxCoeff() < 1e-18) break;
  }
  for (int i = 0; i < squarings; ++i) sum = sum * sum;
  return sum;
}

MatrixLogResult matrix_log_principal(const Eigen::MatrixXd& g,
                                     double branch_tol) {
  const int d = static_cast<int>(g.rows());
  if (g.cols() != d) throw InputError("matrix_log: matrix must be square");
  MatrixLogResult out;
  // Branch-cut margin from the eigenvalue arguments.
  Eigen::EigenSolver<Eigen::MatrixXd> es(g, /*computeEigenvectors=*/false);
  double max_arg = 0.0;
  for (int i = 0; i < d; ++i)
    max_arg = std::max(max_arg, std::abs(std::arg(es.eigenvalues()(i))));
  out.branch_margin = M_PI - max_arg;
  out.reliable = out.branch_margin > branch_tol;
  if (!out.reliable) {
    out.log = Eigen::MatrixXd::Zero(d, d);
    return out;
  }
  // Inverse scaling: square-root until close to the identity.
  Eigen::MatrixXd x = g;
  int roots = 0;
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(d, d);
  while ((x - id).cwiseAbs().maxCoeff() > 0.25 && roots < 40) {
    // Denman-Beavers square root.
    Eigen::MatrixXd y = x, z = id;
    for (int it = 0; it < 60; ++it) {
      Eigen::MatrixXd yn = 0.5 * (y + z.inverse());
      Eigen::MatrixXd zn = 0.5 * (z + y.inverse());
      if ((yn - y).cwiseAbs().maxCoeff() < 1e-15) {
        y = yn;
        break;
      }
      y = yn;
      z = zn;
    }
    x = y;
    ++roots;
  }
  // log(I + e) by the alternating series.
  Eigen::MatrixXd e = x - id;
  Eigen::MatrixXd power = e;
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(d, d);
  for (int n = 1; n <= 60; ++n) {
    acc += (n % 2 == 1 ? 1.0 : -1.0) / static_cast<double>(n) * power;
    power = power * e;
    if (power.cwiseAbs().maxCoeff() < 1e-18) break;
  }
  out.log = std::pow(2.0, roots) * acc;
  return out;
}

}  // namespace lps

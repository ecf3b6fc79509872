#pragma once

#include <Eigen/Dense>
#include <map>
#include <vector>

namespace lps {

/// Sparse multivariate polynomial with double coefficients. Exponent vectors
/// are kept in a std::map so iteration order (and hence evaluation and
/// serialization) is deterministic.
class Poly {
 public:
  using Monomial = std::vector<int>;

  explicit Poly(int nvars = 0) : nvars_(nvars) {}
  static Poly constant(int nvars, double c);
  static Poly variable(int nvars, int index);

  int nvars() const { return nvars_; }
  const std::map<Monomial, double>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }

  void add_term(const Monomial& m, double coeff);

  double eval(const Eigen::VectorXd& x) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd hessian(const Eigen::VectorXd& x) const;

  Poly derivative(int var) const;

  Poly operator+(const Poly& o) const;
  Poly operator-(const Poly& o) const;
  Poly operator*(const Poly& o) const;
  Poly operator*(double s) const;
  Poly& operator+=(const Poly& o);

  /// Substitute x_i -> sum_j m(i,j) y_j (+ linear change of variables into a
  /// possibly different number of variables).
  Poly linear_substitution(const Eigen::MatrixXd& m, int new_nvars) const;

  /// Re-index variables into a wider variable set: variable i becomes
  /// variable shift + i.
  Poly shifted(int new_nvars, int shift) const;

  double max_abs_coeff() const;

 private:
  int nvars_;
  std::map<Monomial, double> terms_;
  void prune();
};

/// Polynomial built from a quadratic form: mu^T s mu (s symmetric).
Poly quadratic_form_poly(const Eigen::MatrixXd& s);
/// Linear polynomial v . mu.
Poly linear_poly(const Eigen::VectorXd& v);

}  // namespace lps

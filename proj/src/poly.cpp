#include "lps/poly.hpp"

#include <cmath>
#include <stdexcept>

namespace lps {

Poly Poly::constant(int nvars, double c) {
  Poly p(nvars);
  p.add_term(Monomial(nvars, 0), c);
  return p;
}

Poly Poly::variable(int nvars, int index) {
  Poly p(nvars);
  Monomial m(nvars, 0);
  m[index] = 1;
  p.add_term(m, 1.0);
  return p;
}

void Poly::add_term(const Monomial& m, double coeff) {
  if (static_cast<int>(m.size()) != nvars_)
    throw std::invalid_argument("Poly: monomial has wrong arity");
  if (coeff == 0.0) return;
  auto it = terms_.find(m);
  if (it == terms_.end()) {
    terms_[m] = coeff;
  } else {
    it->second += coeff;
    if (it->second == 0.0) terms_.erase(it);
  }
}

void Poly::prune() {
  for (auto it = terms_.begin(); it != terms_.end();)
    it = (it->second == 0.0) ? terms_.erase(it) : std::next(it);
}

double Poly::eval(const Eigen::VectorXd& x) const {
  double out = 0.0;
  for (const auto& [m, c] : terms_) {
    double t = c;
    for (int i = 0; i < nvars_; ++i)
      for (int e = 0; e < m[i]; ++e) t *= x(i);
    out += t;
  }
  return out;
}

Poly Poly::derivative(int var) const {
  Poly out(nvars_);
  for (const auto& [m, c] : terms_) {
    if (m[var] == 0) continue;
    Monomial dm = m;
    dm[var] -= 1;
    out.add_term(dm, c * m[var]);
  }
  return out;
}

Eigen::VectorXd Poly::gradient(const Eigen::VectorXd& x) const {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(nvars_);
  for (const auto& [m, c] : terms_)
    for (int v = 0; v < nvars_; ++v) {
      if (m[v] == 0) continue;
      double t = c * m[v];
      for (int i = 0; i < nvars_; ++i) {
        const int e = (i == v) ? m[i] - 1 : m[i];
        for (int q = 0; q < e; ++q) t *= x(i);
      }
      g(v) += t;
    }
  return g;
}

Eigen::MatrixXd Poly::hessian(const Eigen::VectorXd& x) const {
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(nvars_, nvars_);
  for (int v = 0; v < nvars_; ++v) {
    Poly dv = derivative(v);
    h.row(v) = dv.gradient(x).transpose();
  }
  return 0.5 * (h + h.transpose().eval());
}

Poly Poly::operator+(const Poly& o) const {
  Poly out = *this;
  out += o;
  return out;
}

Poly& Poly::operator+=(const Poly& o) {
  if (o.nvars_ != nvars_)
    throw std::invalid_argument("Poly: arity mismatch in +");
  for (const auto& [m, c] : o.terms_) add_term(m, c);
  return *this;
}

Poly Poly::operator-(const Poly& o) const { return *this + o * (-1.0); }

Poly Poly::operator*(const Poly& o) const {
  if (o.nvars_ != nvars_)
    throw std::invalid_argument("Poly: arity mismatch in *");
  Poly out(nvars_);
  for (const auto& [ma, ca] : terms_)
    for (const auto& [mb, cb] : o.terms_) {
      Monomial m(nvars_);
      for (int i = 0; i < nvars_; ++i) m[i] = ma[i] + mb[i];
      out.add_term(m, ca * cb);
    }
  return out;
}

Poly Poly::operator*(double s) const {
  Poly out(nvars_);
  if (s == 0.0) return out;
  for (const auto& [m, c] : terms_) out.add_term(m, c * s);
  return out;
}

Poly Poly::linear_substitution(const Eigen::MatrixXd& mat,
                               int new_nvars) const {
  if (mat.rows() != nvars_ || mat.cols() != new_nvars)
    throw std::invalid_argument("Poly: substitution matrix has wrong shape");
  // Precompute images of the variables.
  std::vector<Poly> images;
  images.reserve(nvars_);
  for (int i = 0; i < nvars_; ++i) {
    Poly img(new_nvars);
    for (int j = 0; j < new_nvars; ++j)
      if (mat(i, j) != 0.0)
        img += Poly::variable(new_nvars, j) * mat(i, j);
    if (img.empty()) img = Poly(new_nvars);
    images.push_back(img);
  }
  Poly out(new_nvars);
  for (const auto& [m, c] : terms_) {
    Poly term = Poly::constant(new_nvars, c);
    for (int i = 0; i < nvars_; ++i)
      for (int e = 0; e < m[i]; ++e) term = term * images[i];
    out += term;
  }
  return out;
}

Poly Poly::shifted(int new_nvars, int shift) const {
  if (shift + nvars_ > new_nvars)
    throw std::invalid_argument("Poly: shift out of range");
  Poly out(new_nvars);
  for (const auto& [m, c] : terms_) {
    Monomial nm(new_nvars, 0);
    for (int i = 0; i < nvars_; ++i) nm[shift + i] = m[i];
    out.add_term(nm, c);
  }
  return out;
}

double Poly::max_abs_coeff() const {
  double w = 0.0;
  for (const auto& [m, c] : terms_) w = std::max(w, std::abs(c));
  return w;
}

Poly quadratic_form_poly(const Eigen::MatrixXd& s) {
  const int n = static_cast<int>(s.rows());
  Poly p(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (s(i, j) == 0.0) continue;
      Poly::Monomial m(n, 0);
      m[i] += 1;
      m[j] += 1;
      p.add_term(m, s(i, j));
    }
  return p;
}

Poly linear_poly(const Eigen::VectorXd& v) {
  const int n = static_cast<int>(v.size());
  Poly p(n);
  for (int i = 0; i < n; ++i) {
    if (v(i) == 0.0) continue;
    Poly::Monomial m(n, 0);
    m[i] = 1;
    p.add_term(m, v(i));
  }
  return p;
}

}  // namespace lps

#pragma once

// Real polynomials in the Laplace variable, ascending coefficient order, and
// root finding through companion-matrix eigenvalues.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <initializer_list>
#include <limits>
#include <sstream>
#include <vector>

#include "vsgosc/errors.hpp"

namespace vsgosc {

class Polynomial {
 public:
  Polynomial() : coeffs_{0.0} {}
  Polynomial(std::initializer_list<double> c) : coeffs_(c) { normalize_storage(); }
  explicit Polynomial(std::vector<double> c) : coeffs_(std::move(c)) { normalize_storage(); }

  static Polynomial constant(double c) { return Polynomial({c}); }
  static Polynomial s() { return Polynomial({0.0, 1.0}); }

  const std::vector<double>& coeffs() const { return coeffs_; }
  double operator[](std::size_t k) const { return k < coeffs_.size() ? coeffs_[k] : 0.0; }

  /// Degree after dropping exact zero high-order terms; the zero polynomial has degree 0.
  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  bool is_zero() const { return coeffs_.size() == 1 && coeffs_[0] == 0.0; }
  double leading() const { return coeffs_.back(); }

  double max_abs_coeff() const {
    double m = 0.0;
    for (double c : coeffs_) m = std::max(m, std::abs(c));
    return m;
  }

  template <typename T>
  T operator()(T x) const {
    T acc = T(coeffs_.back());
    for (auto it = coeffs_.rbegin() + 1; it != coeffs_.rend(); ++it) acc = acc * x + T(*it);
    return acc;
  }

  Polynomial derivative() const {
    if (coeffs_.size() == 1) return Polynomial();
    std::vector<double> d(coeffs_.size() - 1);
    for (std::size_t k = 1; k < coeffs_.size(); ++k) d[k - 1] = static_cast<double>(k) * coeffs_[k];
    return Polynomial(std::move(d));
  }

  Polynomial& operator+=(const Polynomial& o) {
    if (o.coeffs_.size() > coeffs_.size()) coeffs_.resize(o.coeffs_.size(), 0.0);
    for (std::size_t k = 0; k < o.coeffs_.size(); ++k) coeffs_[k] += o.coeffs_[k];
    normalize_storage();
    return *this;
  }
  Polynomial& operator-=(const Polynomial& o) { return *this += o * -1.0; }
  Polynomial& operator*=(double a) {
    for (double& c : coeffs_) c *= a;
    normalize_storage();
    return *this;
  }

  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(Polynomial a, double k) { return a *= k; }
  friend Polynomial operator*(double k, Polynomial a) { return a *= k; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    std::vector<double> r(a.coeffs_.size() + b.coeffs_.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.coeffs_.size(); ++i) {
      for (std::size_t j = 0; j < b.coeffs_.size(); ++j) r[i + j] += a.coeffs_[i] * b.coeffs_[j];
    }
    return Polynomial(std::move(r));
  }
  friend bool operator==(const Polynomial& a, const Polynomial& b) { return a.coeffs_ == b.coeffs_; }

 private:
  void normalize_storage() {
    while (coeffs_.size() > 1 && coeffs_.back() == 0.0) coeffs_.pop_back();
    if (coeffs_.empty()) coeffs_.push_back(0.0);
  }

  std::vector<double> coeffs_;
};

/// Product of a list of polynomials, skipping index `skip` (or none).
inline Polynomial product_except(const std::vector<Polynomial>& ps,
                                 std::size_t skip = static_cast<std::size_t>(-1),
                                 std::size_t skip2 = static_cast<std::size_t>(-1)) {
  Polynomial acc = Polynomial::constant(1.0);
  for (std::size_t k = 0; k < ps.size(); ++k) {
    if (k == skip || k == skip2) continue;
    acc = acc * ps[k];
  }
  return acc;
}

/// Condition number of a simple root r of p: sum|a_k||r|^k / (|r| |p'(r)|).
inline double root_condition(const Polynomial& p, std::complex<double> r) {
  double absr = std::abs(r);
  double num = 0.0;
  double pw = 1.0;
  for (double c : p.coeffs()) {
    num += std::abs(c) * pw;
    pw *= absr;
  }
  double den = std::abs(p.derivative()(r)) * std::max(absr, std::numeric_limits<double>::min());
  return den == 0.0 ? std::numeric_limits<double>::infinity() : num / den;
}

/// Relative backward error of r as a root of p: |p(r)| / sum|a_k||r|^k.
inline double root_backward_error(const Polynomial& p, std::complex<double> r) {
  double absr = std::abs(r);
  double scale = 0.0;
  double pw = 1.0;
  for (double c : p.coeffs()) {
    scale += std::abs(c) * pw;
    pw *= absr;
  }
  return scale == 0.0 ? 0.0 : std::abs(p(r)) / scale;
}

/// All complex roots of `p`, sorted by descending real part. Throws
/// IllConditionedError when a computed root is not a root of `p` to within
/// 1e-8 relative backward error; the message carries the root condition.
inline std::vector<std::complex<double>> polynomial_roots(const Polynomial& p) {
  const int n = p.degree();
  if (n < 1) return {};

  // Exact zero roots first; the companion matrix handles the rest.
  std::size_t zeros = 0;
  while (p[zeros] == 0.0) ++zeros;
  std::vector<std::complex<double>> roots(zeros, {0.0, 0.0});
  const int m = n - static_cast<int>(zeros);
  if (m == 0) return roots;

  std::vector<double> c(p.coeffs().begin() + static_cast<long>(zeros), p.coeffs().end());
  // Substitute s = alpha * t so |c0| and |cm| balance out.
  const double alpha = std::pow(std::abs(c.front()) / std::abs(c.back()), 1.0 / m);
  std::vector<double> q(c.size());
  double pw = 1.0;
  for (std::size_t k = 0; k < c.size(); ++k) {
    q[k] = c[k] * pw;
    pw *= alpha;
  }

  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(m, m);
  for (int k = 0; k < m; ++k) companion(0, k) = -q[m - 1 - k] / q[m];
  for (int k = 1; k < m; ++k) companion(k, k - 1) = 1.0;
  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
  if (solver.info() != Eigen::Success) {
    throw IllConditionedError("companion eigen-solve did not converge",
                              std::numeric_limits<double>::infinity());
  }

  const Polynomial reduced{std::vector<double>(c)};
  const Polynomial dreduced = reduced.derivative();
  for (int k = 0; k < m; ++k) {
    std::complex<double> r = solver.eigenvalues()(k) * alpha;
    // Newton polish on the unscaled polynomial, kept only if it helps.
    for (int it = 0; it < 2; ++it) {
      std::complex<double> d = dreduced(r);
      if (std::abs(d) == 0.0) break;
      std::complex<double> next = r - reduced(r) / d;
      if (!std::isfinite(std::abs(next)) ||
          root_backward_error(reduced, next) >= root_backward_error(reduced, r)) {
        break;
      }
      r = next;
    }
    double backward = root_backward_error(reduced, r);
    if (!std::isfinite(std::abs(r)) || backward > 1e-8) {
      std::ostringstream msg;
      msg << "polynomial of degree " << n << " is ill-conditioned: root " << r
          << " has backward error " << backward << ", condition " << root_condition(reduced, r);
      throw IllConditionedError(msg.str(), root_condition(reduced, r));
    }
    roots.push_back(r);
  }
  std::sort(roots.begin(), roots.end(), [](auto a, auto b) {
    if (a.real() != b.real()) return a.real() > b.real();
    return a.imag() > b.imag();
  });
  return roots;
}

}  // namespace vsgosc

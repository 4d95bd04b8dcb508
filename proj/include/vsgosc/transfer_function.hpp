#pragma once

// Rational transfer functions: algebra, frequency response, poles and a
// state-space step-response integrator.

#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "vsgosc/polynomial.hpp"

namespace vsgosc {

/// num(s) / den(s), den monic. TFs are never reduced: a common factor in
/// num and den stays where it is.
class RationalTF {
 public:
  RationalTF() : num_(Polynomial::constant(0.0)), den_(Polynomial::constant(1.0)) {}
  RationalTF(Polynomial num, Polynomial den) : num_(std::move(num)), den_(std::move(den)) {
    if (den_.is_zero()) throw std::invalid_argument("transfer function denominator is zero");
    double lead = den_.leading();
    num_ *= 1.0 / lead;
    den_ *= 1.0 / lead;
  }

  static RationalTF gain(double k) { return {Polynomial::constant(k), Polynomial::constant(1.0)}; }

  const Polynomial& num() const { return num_; }
  const Polynomial& den() const { return den_; }

  bool is_proper() const { return num_.is_zero() || num_.degree() <= den_.degree(); }

  std::complex<double> operator()(std::complex<double> s) const { return num_(s) / den_(s); }
  std::complex<double> at_frequency(double omega) const { return (*this)(std::complex<double>(0.0, omega)); }

  /// Value at s = 0; infinite when den(0) = 0.
  double dc_gain() const { return num_[0] / den_[0]; }

 private:
  Polynomial num_;
  Polynomial den_;
};

inline RationalTF tf_add(const RationalTF& a, const RationalTF& b) {
  if (a.den() == b.den()) return {a.num() + b.num(), a.den()};
  return {a.num() * b.den() + b.num() * a.den(), a.den() * b.den()};
}

inline RationalTF tf_mul(const RationalTF& a, const RationalTF& b) {
  return {a.num() * b.num(), a.den() * b.den()};
}

/// Negative feedback a / (1 + a*b).
inline RationalTF tf_feedback(const RationalTF& a, const RationalTF& b) {
  return {a.num() * b.den(), a.den() * b.den() + a.num() * b.num()};
}

// ---------------------------------------------------------------------------
// Frequency response
// ---------------------------------------------------------------------------

struct FrequencyResponse {
  std::vector<double> omegas;
  std::vector<double> magnitude_db;
  std::vector<double> phase_deg;
};

inline std::vector<double> log_grid(double omega_min, double omega_max, std::size_t points) {
  if (!(omega_min > 0.0) || !(omega_max > omega_min)) {
    throw std::invalid_argument("frequency grid needs 0 < omega_min < omega_max");
  }
  if (points < 2) throw std::invalid_argument("frequency grid needs at least 2 points");
  std::vector<double> w(points);
  const double lo = std::log10(omega_min);
  const double hi = std::log10(omega_max);
  for (std::size_t k = 0; k < points; ++k) {
    w[k] = std::pow(10.0, lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(points - 1));
  }
  w.front() = omega_min;
  w.back() = omega_max;
  return w;
}

/// Thrown when s = j*omega hits a denominator root.
class PoleOnAxisError : public std::domain_error {
 public:
  PoleOnAxisError(const std::string& what, double omega) : std::domain_error(what), omega_(omega) {}
  double omega() const noexcept { return omega_; }

 private:
  double omega_;
};

inline FrequencyResponse bode(const RationalTF& tf, double omega_min = 0.01, double omega_max = 1000.0,
                              std::size_t points = 400) {
  FrequencyResponse fr;
  fr.omegas = log_grid(omega_min, omega_max, points);
  fr.magnitude_db.reserve(points);
  fr.phase_deg.reserve(points);
  double prev_phase = 0.0;
  for (std::size_t k = 0; k < points; ++k) {
    const double w = fr.omegas[k];
    const std::complex<double> s(0.0, w);
    const std::complex<double> den = tf.den()(s);
    double den_scale = 0.0;
    double pw = 1.0;
    for (double c : tf.den().coeffs()) {
      den_scale += std::abs(c) * pw;
      pw *= w;
    }
    if (std::abs(den) <= 1e-14 * den_scale) {
      std::ostringstream msg;
      msg << "transfer function has a pole on the imaginary axis at omega = " << w << " rad/s";
      throw PoleOnAxisError(msg.str(), w);
    }
    const std::complex<double> h = tf.num()(s) / den;
    fr.magnitude_db.push_back(20.0 * std::log10(std::abs(h)));
    double phase = std::arg(h) * 180.0 / std::numbers::pi;
    if (k > 0) {
      while (phase - prev_phase > 180.0) phase -= 360.0;
      while (phase - prev_phase < -180.0) phase += 360.0;
    }
    fr.phase_deg.push_back(phase);
    prev_phase = phase;
  }
  return fr;
}

struct ResonancePeak {
  double omega = 0.0;
  double peak_db_above_dc = 0.0;
};

/// Interior magnitude maximum, refined by a parabola in (log omega, dB).
/// Empty when the response has no interior maximum that rises more than
/// `flat_tolerance_db` above both ends of the grid.
inline std::optional<ResonancePeak> resonance_peak(const FrequencyResponse& fr,
                                                   double flat_tolerance_db = 1e-6) {
  const auto& m = fr.magnitude_db;
  const std::size_t n = m.size();
  if (n < 3) return std::nullopt;
  std::size_t best = 1;
  for (std::size_t k = 2; k + 1 < n; ++k) {
    if (m[k] > m[best]) best = k;
  }
  if (!(m[best] > m.front() + flat_tolerance_db && m[best] > m.back() + flat_tolerance_db)) {
    return std::nullopt;
  }
  if (!(m[best] >= m[best - 1] && m[best] >= m[best + 1])) return std::nullopt;

  const double x0 = std::log(fr.omegas[best - 1]);
  const double x1 = std::log(fr.omegas[best]);
  const double x2 = std::log(fr.omegas[best + 1]);
  const double y0 = m[best - 1];
  const double y1 = m[best];
  const double y2 = m[best + 1];
  // Vertex of the parabola through the three samples.
  const double d01 = (y1 - y0) / (x1 - x0);
  const double d12 = (y2 - y1) / (x2 - x1);
  const double curvature = (d12 - d01) / (x2 - x0);
  ResonancePeak peak{fr.omegas[best], y1 - m.front()};
  if (curvature < 0.0) {
    const double xv = 0.5 * (x0 + x1) - d01 / (2.0 * curvature);
    const double yv = y1 + d01 * (xv - x1) + curvature * (xv - x0) * (xv - x1);
    if (xv > x0 && xv < x2) peak = {std::exp(xv), yv - m.front()};
  }
  return peak;
}

// ---------------------------------------------------------------------------
// Poles
// ---------------------------------------------------------------------------

struct Pole {
  std::complex<double> value;
  double omega_n = 0.0;  // |s|
  double zeta = 0.0;     // -Re(s)/|s|; 1 for a pole at the origin by convention
  double condition = 0.0;
};

inline std::vector<Pole> poles(const RationalTF& tf) {
  if (tf.den().degree() < 1) throw std::invalid_argument("poles() needs a denominator of degree >= 1");
  std::vector<Pole> out;
  for (const auto& r : polynomial_roots(tf.den())) {
    Pole p;
    p.value = r;
    p.omega_n = std::abs(r);
    p.zeta = p.omega_n == 0.0 ? 1.0 : -r.real() / p.omega_n;
    p.condition = root_condition(tf.den(), r);
    out.push_back(p);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Step response
// ---------------------------------------------------------------------------

struct StepResponse {
  std::vector<double> t;
  std::vector<double> y;
  bool unstable = false;
};

/// Response to a step of `magnitude` at t = 0, from the controllable
/// canonical realization integrated with classical RK4.
inline StepResponse step_response(const RationalTF& tf, double t_end, double dt, double magnitude = 1.0) {
  if (!tf.is_proper()) throw std::invalid_argument("step_response needs a proper transfer function");
  if (!(dt > 0.0) || !(t_end > 0.0)) throw std::invalid_argument("step_response needs dt, t_end > 0");

  const int n = tf.den().degree();
  StepResponse out;
  if (n >= 1) {
    double fastest = 0.0;
    for (const auto& p : poles(tf)) {
      fastest = std::max(fastest, p.omega_n);
      if (p.value.real() > 0.0) out.unstable = true;
    }
    if (dt * fastest >= 0.1) {
      std::ostringstream msg;
      msg << "dt = " << dt << " does not resolve the fastest pole |s| = " << fastest;
      throw std::invalid_argument(msg.str());
    }
  }

  // den monic: s^n + a_{n-1} s^{n-1} + ... + a_0. Split off the feedthrough.
  const double feedthrough = tf.num()[static_cast<std::size_t>(n)];
  std::vector<double> a(static_cast<std::size_t>(n)), c(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    a[static_cast<std::size_t>(k)] = tf.den()[static_cast<std::size_t>(k)];
    c[static_cast<std::size_t>(k)] = tf.num()[static_cast<std::size_t>(k)] - feedthrough * a[static_cast<std::size_t>(k)];
  }

  auto rhs = [&](const std::vector<double>& x, std::vector<double>& dx) {
    for (int k = 0; k + 1 < n; ++k) dx[static_cast<std::size_t>(k)] = x[static_cast<std::size_t>(k + 1)];
    if (n > 0) {
      double last = magnitude;
      for (int k = 0; k < n; ++k) last -= a[static_cast<std::size_t>(k)] * x[static_cast<std::size_t>(k)];
      dx[static_cast<std::size_t>(n - 1)] = last;
    }
  };
  auto output = [&](const std::vector<double>& x) {
    double y = feedthrough * magnitude;
    for (int k = 0; k < n; ++k) y += c[static_cast<std::size_t>(k)] * x[static_cast<std::size_t>(k)];
    return y;
  };

  const auto steps = static_cast<std::size_t>(std::llround(t_end / dt));
  std::vector<double> x(static_cast<std::size_t>(n), 0.0), k1(x), k2(x), k3(x), k4(x), tmp(x);
  out.t.reserve(steps + 1);
  out.y.reserve(steps + 1);
  for (std::size_t step = 0;; ++step) {
    out.t.push_back(static_cast<double>(step) * dt);
    out.y.push_back(output(x));
    if (step == steps) break;
    rhs(x, k1);
    for (std::size_t i = 0; i < x.size(); ++i) tmp[i] = x[i] + 0.5 * dt * k1[i];
    rhs(tmp, k2);
    for (std::size_t i = 0; i < x.size(); ++i) tmp[i] = x[i] + 0.5 * dt * k2[i];
    rhs(tmp, k3);
    for (std::size_t i = 0; i < x.size(); ++i) tmp[i] = x[i] + dt * k3[i];
    rhs(tmp, k4);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
  return out;
}

}  // namespace vsgosc

#pragma once

// Quasi-static phasor network: every unit feeds the PCC through an inductive
// branch, the PCC carries a constant-power load and (optionally) a grid tie.
// Given unit angles and branch reactances, find the PCC voltage phasor that
// balances active and reactive power.

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <vector>

#include "vsgosc/errors.hpp"
#include "vsgosc/model.hpp"

namespace vsgosc {

/// Grid tie as seen by one network solve.
struct GridTie {
  bool connected = false;
  bool stiff = false;
  double X = 0.0;      // ohm, ignored when stiff
  double V = 0.0;      // amplitude, V
  double theta = 0.0;  // angle in the rotating frame, rad
};

struct NetworkInput {
  std::vector<double> theta;  // unit internal angles, rad
  std::vector<double> X;      // total branch reactances, ohm
  std::vector<double> V0;     // internal voltage set points, V
  std::vector<double> kq;     // Q-V droop coefficients, V/var
  double load_P = 0.0;
  double load_Q = 0.0;
  GridTie grid;
};

struct NetworkSolution {
  double Vp = 0.0;
  double theta_p = 0.0;
  std::vector<double> P;
  std::vector<double> Q;
  std::vector<double> E;  // internal voltage after droop
  double Pg = 0.0;
  double Qg = 0.0;
  int iterations = 0;
  double residual = 0.0;
};

namespace detail {

struct FlowEval {
  Eigen::Vector2d F;
  Eigen::Matrix2d J;  // d(F)/d(Vp, theta_p)
};

// Per-unit flows with the droop folded in: E = V0 - kq Q,
// Q = (V0 Vp c - Vp^2) / (X + kq Vp c), P = E Vp s / X, with c, s of
// delta = theta - theta_p.
inline FlowEval evaluate_flows(const NetworkInput& in, double Vp, double thp, NetworkSolution* out) {
  FlowEval f;
  f.F.setZero();
  f.J.setZero();
  const std::size_t n = in.theta.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double d = in.theta[i] - thp;
    const double c = std::cos(d);
    const double s = std::sin(d);
    const double X = in.X[i];
    const double kq = in.kq[i];
    const double V0 = in.V0[i];

    const double N = V0 * Vp * c - Vp * Vp;
    const double M = X + kq * Vp * c;
    const double Q = N / M;
    const double E = V0 - kq * Q;
    const double P = E * Vp * s / X;

    const double dN_dV = V0 * c - 2.0 * Vp;
    const double dM_dV = kq * c;
    const double dN_dt = V0 * Vp * s;
    const double dM_dt = kq * Vp * s;
    const double dQ_dV = (dN_dV * M - N * dM_dV) / (M * M);
    const double dQ_dt = (dN_dt * M - N * dM_dt) / (M * M);
    const double dP_dV = (-kq * dQ_dV * Vp * s + E * s) / X;
    const double dP_dt = (-kq * dQ_dt * Vp * s - E * Vp * c) / X;

    f.F(0) += P;
    f.F(1) += Q;
    f.J(0, 0) += dP_dV;
    f.J(0, 1) += dP_dt;
    f.J(1, 0) += dQ_dV;
    f.J(1, 1) += dQ_dt;
    if (out) {
      out->P[i] = P;
      out->Q[i] = Q;
      out->E[i] = E;
    }
  }
  if (in.grid.connected) {
    const double dg = in.grid.theta - thp;
    const double c = std::cos(dg);
    const double s = std::sin(dg);
    const double Xg = in.grid.X;
    const double Vg = in.grid.V;
    const double Pg = Vg * Vp * s / Xg;
    const double Qg = (Vg * Vp * c - Vp * Vp) / Xg;
    f.F(0) += Pg;
    f.F(1) += Qg;
    f.J(0, 0) += Vg * s / Xg;
    f.J(0, 1) += -Vg * Vp * c / Xg;
    f.J(1, 0) += (Vg * c - 2.0 * Vp) / Xg;
    f.J(1, 1) += Vg * Vp * s / Xg;
    if (out) {
      out->Pg = Pg;
      out->Qg = Qg;
    }
  }
  f.F(0) -= in.load_P;
  f.F(1) -= in.load_Q;
  return f;
}

inline void check_synchronism(const NetworkInput& in, const NetworkSolution& sol) {
  constexpr double limit = std::numbers::pi / 2.0;
  for (std::size_t i = 0; i < in.theta.size(); ++i) {
    const double d = std::remainder(in.theta[i] - sol.theta_p, 2.0 * std::numbers::pi);
    if (std::abs(d) > limit) {
      std::ostringstream msg;
      msg << "loss of synchronism: unit " << i + 1 << " angle to PCC is " << d << " rad";
      throw LossOfSynchronism(msg.str());
    }
  }
  if (in.grid.connected && !in.grid.stiff) {
    const double d = std::remainder(in.grid.theta - sol.theta_p, 2.0 * std::numbers::pi);
    if (std::abs(d) > limit) {
      std::ostringstream msg;
      msg << "loss of synchronism: grid angle to PCC is " << d << " rad";
      throw LossOfSynchronism(msg.str());
    }
  }
}

}  // namespace detail

/// Newton solve for (Vp, theta_p) starting at (Vp0, thp0), converged when the
/// power mismatch is below rel_tol * max(1, |load_P|) or the rounding floor.
/// A stiff grid pins the PCC to the grid phasor and the grid absorbs the
/// imbalance.
inline NetworkSolution network_solve(const NetworkInput& in, double Vp0, double thp0, int max_iterations = 50,
                                     double rel_tol = 1e-9) {
  const std::size_t n = in.theta.size();
  if (n == 0) throw ValidationError("network_solve needs at least one unit");
  if (in.X.size() != n || in.V0.size() != n || in.kq.size() != n) {
    throw ValidationError("network_solve input vectors must have one entry per unit");
  }
  for (double X : in.X) {
    if (!(X > 0.0)) throw ValidationError("branch reactance must be positive");
  }
  NetworkSolution sol;
  sol.P.assign(n, 0.0);
  sol.Q.assign(n, 0.0);
  sol.E.assign(n, 0.0);

  if (in.grid.connected && in.grid.stiff) {
    sol.Vp = in.grid.V;
    sol.theta_p = in.grid.theta;
    NetworkInput open = in;
    open.grid.connected = false;
    const auto f = detail::evaluate_flows(open, sol.Vp, sol.theta_p, &sol);
    sol.Pg = -f.F(0);
    sol.Qg = -f.F(1);
    detail::check_synchronism(in, sol);
    return sol;
  }
  if (in.grid.connected && !(in.grid.X > 0.0)) throw ValidationError("grid reactance must be positive");

  // Never ask for less than the rounding floor of the individual branch terms.
  double flow_scale = std::abs(in.load_P) + std::abs(in.load_Q);
  for (std::size_t i = 0; i < n; ++i) flow_scale += in.V0[i] * std::max(Vp0, in.V0[i]) / in.X[i];
  if (in.grid.connected) flow_scale += in.grid.V * std::max(Vp0, in.grid.V) / in.grid.X;
  const double tol = std::max(rel_tol * std::max(1.0, std::abs(in.load_P)),
                              16.0 * std::numeric_limits<double>::epsilon() * flow_scale);
  double Vp = Vp0 > 0.0 ? Vp0 : in.V0.front();
  double thp = thp0;
  for (int it = 0;; ++it) {
    const auto f = detail::evaluate_flows(in, Vp, thp, nullptr);
    const double res = f.F.cwiseAbs().maxCoeff();
    if (res < tol) {
      sol.Vp = Vp;
      sol.theta_p = thp;
      detail::evaluate_flows(in, Vp, thp, &sol);
      sol.iterations = it;
      sol.residual = res;
      detail::check_synchronism(in, sol);
      return sol;
    }
    if (it >= max_iterations || !std::isfinite(res)) {
      std::ostringstream msg;
      msg << "network solve did not converge: residual " << res << " after " << it << " iterations";
      throw ConvergenceError(msg.str(), res, it);
    }
    Eigen::Vector2d dx = f.J.partialPivLu().solve(-f.F);
    // Keep the PCC voltage positive.
    while (Vp + dx(0) <= 0.0) dx *= 0.5;
    Vp += dx(0);
    thp += dx(1);
  }
}

}  // namespace vsgosc

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <vector>

#include "lightray/errors.hpp"

namespace lightray {

// Dormand-Prince 5(4) with the classic quartic dense-output interpolant.
// The integrator is generic over the right-hand side functor
//     void rhs(double t, const double* y, double* dy)
// and works in either time direction.  A right-hand side may throw
// DomainError to signal that the state left its chart; the step is then
// retried smaller and, if that fails, integration stops early with
// Status::kBoundary at the last accepted state.
//
// Accepted step sizes are recorded so a later integration can replay the
// exact step sequence with different initial data (see dopri5_replay).
// Nearby trajectories integrated on a shared step sequence differ smoothly
// in their initial data, which is what makes finite-difference variation
// fields accurate to far below the per-trajectory tolerance.

inline constexpr int kOdeMaxDim = 16;

struct OdeOptions {
  double abs_tol = 1e-12;
  double rel_tol = 1e-10;
  double h_min = 1e-13;
  long max_steps = 200000;
};

enum class OdeStatus { kComplete, kBoundary };

using OdeState = std::array<double, kOdeMaxDim>;

struct DenseStep {
  double t0 = 0, h = 0;
  // cont[0] + th*(cont[1] + (1-th)*(cont[2] + th*(cont[3] + (1-th)*cont[4])))
  std::array<OdeState, 5> cont{};
};

struct OdeSolution {
  int dim = 0;
  int direction = 1;  // +1 forward, -1 backward
  double t_begin = 0, t_end = 0;
  OdeStatus status = OdeStatus::kComplete;
  std::vector<DenseStep> steps;
  OdeState y_end{};

  bool covers(double t) const {
    return direction > 0 ? (t >= t_begin && t <= t_end) : (t <= t_begin && t >= t_end);
  }

  void eval(double t, double* y) const {
    if (steps.empty()) {
      std::memcpy(y, y_end.data(), sizeof(double) * static_cast<size_t>(dim));
      return;
    }
    // binary search for the step whose interval contains t
    size_t lo = 0, hi = steps.size() - 1;
    while (lo < hi) {
      const size_t mid = (lo + hi + 1) / 2;
      const double start = steps[mid].t0;
      if (direction > 0 ? (t >= start) : (t <= start))
        lo = mid;
      else
        hi = mid - 1;
    }
    const DenseStep& s = steps[lo];
    const double th = (t - s.t0) / s.h;
    const double th1 = 1.0 - th;
    for (int i = 0; i < dim; ++i) {
      const size_t ii = static_cast<size_t>(i);
      y[i] = s.cont[0][ii] +
             th * (s.cont[1][ii] +
                   th1 * (s.cont[2][ii] + th * (s.cont[3][ii] + th1 * s.cont[4][ii])));
    }
  }

  std::vector<double> node_times() const {
    std::vector<double> ts;
    ts.reserve(steps.size() + 1);
    for (const auto& s : steps) ts.push_back(s.t0);
    ts.push_back(t_end);
    return ts;
  }

  std::vector<double> step_sizes() const {
    std::vector<double> hs;
    hs.reserve(steps.size());
    for (const auto& s : steps) hs.push_back(s.h);
    return hs;
  }
};

namespace dopri5_detail {

// Butcher tableau
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
inline constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                        a75 = -2187.0 / 6784, a76 = 11.0 / 84;
// b - bhat (embedded 4th-order error coefficients)
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                        e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
// dense-output weights
inline constexpr double d1 = -12715105075.0 / 11282082432.0;
inline constexpr double d3 = 87487479700.0 / 32700410799.0;
inline constexpr double d4 = -10690763975.0 / 1880347072.0;
inline constexpr double d5 = 701980252875.0 / 199316789632.0;
inline constexpr double d6 = -1453857185.0 / 822651844.0;
inline constexpr double d7 = 69997945.0 / 29380423.0;

struct StageWork {
  OdeState k1{}, k2{}, k3{}, k4{}, k5{}, k6{}, k7{}, y1{}, tmp{};
};

// One DP5 step from (t, y) with size h.  k1 must hold rhs(t, y).  On return
// y1/k7 hold the new state and its derivative, and err is the scaled error
// estimate.  Throws whatever the right-hand side throws.
template <class F>
void dp5_step(F&& f, int dim, double t, const double* y, double h, StageWork& w,
              double abs_tol, double rel_tol, double& err) {
  auto& k1 = w.k1;
  auto& k2 = w.k2;
  auto& k3 = w.k3;
  auto& k4 = w.k4;
  auto& k5 = w.k5;
  auto& k6 = w.k6;
  auto& k7 = w.k7;
  auto& y1 = w.y1;
  auto& tmp = w.tmp;

  for (int i = 0; i < dim; ++i) tmp[i] = y[i] + h * a21 * k1[i];
  f(t + c2 * h, tmp.data(), k2.data());
  for (int i = 0; i < dim; ++i) tmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
  f(t + c3 * h, tmp.data(), k3.data());
  for (int i = 0; i < dim; ++i) tmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
  f(t + c4 * h, tmp.data(), k4.data());
  for (int i = 0; i < dim; ++i)
    tmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
  f(t + c5 * h, tmp.data(), k5.data());
  for (int i = 0; i < dim; ++i)
    tmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
  f(t + h, tmp.data(), k6.data());
  for (int i = 0; i < dim; ++i)
    y1[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
  f(t + h, y1.data(), k7.data());

  double sum = 0;
  for (int i = 0; i < dim; ++i) {
    const double ei =
        h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
    const double sc = abs_tol + rel_tol * std::max(std::abs(y[i]), std::abs(y1[i]));
    sum += (ei / sc) * (ei / sc);
  }
  err = std::sqrt(sum / dim);
}

template <class F>
DenseStep make_dense(F&&, int dim, double t, const double* y, double h, const StageWork& w) {
  DenseStep s;
  s.t0 = t;
  s.h = h;
  for (int i = 0; i < dim; ++i) {
    const size_t ii = static_cast<size_t>(i);
    const double ydiff = w.y1[ii] - y[i];
    const double bspl = h * w.k1[ii] - ydiff;
    s.cont[0][ii] = y[i];
    s.cont[1][ii] = ydiff;
    s.cont[2][ii] = bspl;
    s.cont[3][ii] = ydiff - h * w.k7[ii] - bspl;
    s.cont[4][ii] = h * (d1 * w.k1[ii] + d3 * w.k3[ii] + d4 * w.k4[ii] + d5 * w.k5[ii] +
                         d6 * w.k6[ii] + d7 * w.k7[ii]);
  }
  return s;
}

template <class F>
double initial_step(F&& f, int dim, double t0, const double* y0, const double* f0, double span,
                    double abs_tol, double rel_tol) {
  double d0 = 0, d1v = 0;
  for (int i = 0; i < dim; ++i) {
    const double sc = abs_tol + rel_tol * std::abs(y0[i]);
    d0 += (y0[i] / sc) * (y0[i] / sc);
    d1v += (f0[i] / sc) * (f0[i] / sc);
  }
  d0 = std::sqrt(d0 / dim);
  d1v = std::sqrt(d1v / dim);
  double h = (d0 > 1e-10 && d1v > 1e-10) ? 0.01 * d0 / d1v : 1e-6 * std::abs(span);
  (void)f;
  (void)t0;
  return std::min(h, std::abs(span));
}

}  // namespace dopri5_detail

template <class F>
OdeSolution dopri5(F&& f, int dim, double t0, const double* y0, double t1,
                   const OdeOptions& opts = {}) {
  using namespace dopri5_detail;
  OdeSolution sol;
  sol.dim = dim;
  sol.t_begin = t0;
  sol.direction = t1 >= t0 ? 1 : -1;
  OdeState y{};
  std::memcpy(y.data(), y0, sizeof(double) * static_cast<size_t>(dim));
  if (t1 == t0) {
    sol.t_end = t0;
    sol.y_end = y;
    return sol;
  }

  StageWork w;
  f(t0, y.data(), w.k1.data());  // chart errors on the initial state propagate
  double h = sol.direction *
             initial_step(f, dim, t0, y.data(), w.k1.data(), t1 - t0, opts.abs_tol, opts.rel_tol);

  double t = t0;
  bool rejected = false;
  for (long step = 0; step < opts.max_steps; ++step) {
    if ((sol.direction > 0 && t + h > t1) || (sol.direction < 0 && t + h < t1)) h = t1 - t;
    double err = 0;
    bool domain_failure = false;
    try {
      dp5_step(f, dim, t, y.data(), h, w, opts.abs_tol, opts.rel_tol, err);
    } catch (const DomainError&) {
      domain_failure = true;
    }
    if (domain_failure) {
      h *= 0.5;
      rejected = true;
      if (std::abs(h) < opts.h_min * std::max(1.0, std::abs(t))) {
        sol.status = OdeStatus::kBoundary;
        break;
      }
      continue;
    }
    if (err <= 1.0) {
      sol.steps.push_back(make_dense(f, dim, t, y.data(), h, w));
      t += h;
      y = w.y1;
      w.k1 = w.k7;  // FSAL
      if ((sol.direction > 0 && t >= t1) || (sol.direction < 0 && t <= t1)) {
        sol.t_end = t;
        sol.y_end = y;
        return sol;
      }
      const double fac = std::min(rejected ? 1.0 : 10.0,
                                  std::max(0.2, 0.9 * std::pow(err > 1e-30 ? err : 1e-30, -0.2)));
      h *= fac;
      rejected = false;
    } else {
      h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
      rejected = true;
      if (std::abs(h) < opts.h_min * std::max(1.0, std::abs(t)))
        throw StepFailureError("step size underflow at t = " + std::to_string(t));
    }
  }
  if (sol.status != OdeStatus::kBoundary)
    throw StepFailureError("integration exceeded max_steps before reaching the endpoint");
  sol.t_end = t;
  sol.y_end = y;
  return sol;
}

// Re-runs a recorded step sequence with different initial data.  No error
// control: the caller guarantees the steps suit the new trajectory (they do
// for the small perturbations used by variation fields).
template <class F>
OdeSolution dopri5_replay(F&& f, int dim, double t0, const double* y0,
                          const std::vector<double>& step_sizes) {
  using namespace dopri5_detail;
  OdeSolution sol;
  sol.dim = dim;
  sol.t_begin = t0;
  sol.direction = (step_sizes.empty() || step_sizes.front() >= 0) ? 1 : -1;
  OdeState y{};
  std::memcpy(y.data(), y0, sizeof(double) * static_cast<size_t>(dim));
  StageWork w;
  f(t0, y.data(), w.k1.data());
  double t = t0;
  for (double h : step_sizes) {
    double err = 0;
    dp5_step(f, dim, t, y.data(), h, w, 1.0, 1.0, err);
    sol.steps.push_back(make_dense(f, dim, t, y.data(), h, w));
    t += h;
    y = w.y1;
    w.k1 = w.k7;
  }
  sol.t_end = t;
  sol.y_end = y;
  return sol;
}

// Fixed-step driver used by convergence measurements.
template <class F>
OdeSolution dopri5_fixed(F&& f, int dim, double t0, const double* y0, double t1, long steps) {
  std::vector<double> hs(static_cast<size_t>(steps), (t1 - t0) / static_cast<double>(steps));
  return dopri5_replay(f, dim, t0, y0, hs);
}

}  // namespace lightray

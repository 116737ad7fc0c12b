#pragma once

// Globally adaptive Gauss-Kronrod (G10/K21) quadrature with evaluation
// counting, piecewise panels, and semi-infinite panel marching. Node and
// weight tables come from Boost.Math; the adaptive driver lives here so the
// error estimate is scaled consistently on arbitrarily narrow intervals.

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <queue>
#include <span>
#include <vector>

namespace casimir::quad {

struct Estimate {
  double value = 0.0;
  double abs_error = 0.0;
  std::size_t evaluations = 0;
  bool converged = true;

  double rel_error() const {
    return value == 0.0 ? abs_error : abs_error / std::abs(value);
  }

  Estimate& operator+=(const Estimate& other) {
    value += other.value;
    abs_error += other.abs_error;
    evaluations += other.evaluations;
    converged = converged && other.converged;
    return *this;
  }
};

inline constexpr std::size_t kDefaultMaxIntervals = 2000;

namespace detail {

struct Interval {
  double a;
  double b;
  double value;
  double error;
  bool operator<(const Interval& o) const { return error < o.error; }
};

template <class F>
Interval apply_rule(F& f, double a, double b) {
  using Kronrod = boost::math::quadrature::gauss_kronrod<double, 21>;
  using Gauss = boost::math::quadrature::gauss<double, 10>;
  const auto& x = Kronrod::abscissa();
  const auto& wk = Kronrod::weights();
  const auto& wg = Gauss::weights();
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);

  const double f0 = f(mid);
  double kronrod = f0 * wk[0];
  double gauss = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) {
    const double sum = f(mid + half * x[i]) + f(mid - half * x[i]);
    kronrod += sum * wk[i];
    if (i % 2 == 1) gauss += sum * wg[i / 2];
  }
  const double value = half * kronrod;
  const double roundoff = 50.0 * std::numeric_limits<double>::epsilon() * std::abs(value);
  return {a, b, value, std::max(std::abs(half * (kronrod - gauss)), roundoff)};
}

}  // namespace detail

/// Adaptive integral of f over [a, b]. Bisects the interval with the largest
/// error until the summed error is below max(abs_tol, rel_tol * |value|) or
/// max_intervals is reached (then `converged` is false).
template <class F>
Estimate integrate(F&& f, double a, double b, double rel_tol,
                   double abs_tol = 0.0,
                   std::size_t max_intervals = kDefaultMaxIntervals) {
  Estimate est;
  if (a == b) return est;
  std::size_t count = 0;
  auto counted = [&](double x) {
    ++count;
    return f(x);
  };

  std::priority_queue<detail::Interval> heap;
  heap.push(detail::apply_rule(counted, a, b));
  double value = heap.top().value;
  double error = heap.top().error;
  while (error > std::max(abs_tol, rel_tol * std::abs(value))) {
    if (heap.size() >= max_intervals) {
      est.converged = false;
      break;
    }
    const auto worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      // Interval cannot be split further in double precision.
      heap.push(worst);
      est.converged = false;
      break;
    }
    const auto left = detail::apply_rule(counted, worst.a, mid);
    const auto right = detail::apply_rule(counted, mid, worst.b);
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
  }

  // Re-sum to shed the drift of the running totals.
  value = 0.0;
  error = 0.0;
  while (!heap.empty()) {
    value += heap.top().value;
    error += heap.top().error;
    heap.pop();
  }
  est.value = value;
  est.abs_error = error;
  est.evaluations = count;
  return est;
}

/// Sum of adaptive integrals over consecutive panels [breaks[i], breaks[i+1]].
template <class F>
Estimate integrate_panels(F&& f, std::span<const double> breaks,
                          double rel_tol,
                          std::size_t max_intervals = kDefaultMaxIntervals) {
  Estimate total;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    total += integrate(f, breaks[i], breaks[i + 1], rel_tol, 0.0, max_intervals);
  }
  return total;
}

struct MarchOptions {
  double first_width = 1.0;
  double growth = 2.0;
  // Stop once a panel contributes less than this fraction of the largest
  // panel seen so far.
  double cutoff = 1e-12;
  std::size_t min_panels = 3;
  std::size_t max_panels = 400;
  std::size_t max_intervals = kDefaultMaxIntervals;
};

/// Integrates f on [a, inf) with geometrically growing panels. Assumes f
/// decays once past its peak; the march stops at the cutoff. Panels are
/// held to rel_tol of the running total, so tiny tail panels are cheap.
template <class F>
Estimate integrate_to_infinity(F&& f, double a, double rel_tol,
                               const MarchOptions& opt) {
  Estimate total;
  double lo = a;
  double width = opt.first_width;
  double peak = 0.0;
  bool done = false;
  for (std::size_t panel = 0; panel < opt.max_panels; ++panel) {
    const double hi = lo + width;
    const double abs_tol = 0.5 * rel_tol * std::abs(total.value);
    const Estimate part = integrate(f, lo, hi, rel_tol, abs_tol, opt.max_intervals);
    total += part;
    peak = std::max(peak, std::abs(part.value));
    if (panel + 1 >= opt.min_panels &&
        std::abs(part.value) <= opt.cutoff * peak) {
      done = true;
      break;
    }
    lo = hi;
    width *= opt.growth;
  }
  total.converged = total.converged && done;
  return total;
}

}  // namespace casimir::quad

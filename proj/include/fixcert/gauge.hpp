#pragma once

// The integrand phi and its cumulative integral F(u) = ∫_0^u phi(t) dt.
// phi must be nonnegative and piecewise continuous; discontinuities are
// declared as breakpoints and integration is split there, with adaptive
// Simpson refinement inside each piece.

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fixcert/expr.hpp"

namespace fixcert {

inline constexpr double kPositivityFloor = 1e-14;
inline constexpr int kMaxSimpsonDepth = 50;

class GaugeError : public std::runtime_error {
 public:
  explicit GaugeError(const std::string& message) : std::runtime_error(message) {}
};

class Gauge {
 public:
  explicit Gauge(RealMap phi, std::vector<double> breakpoints = {}, double quad_tol = 1e-10)
      : phi_(std::move(phi)), breakpoints_(std::move(breakpoints)), quad_tol_(quad_tol) {
    if (!(quad_tol_ > 0.0)) throw GaugeError("gauge: quad_tol must be positive");
    for (std::size_t i = 0; i < breakpoints_.size(); ++i) {
      if (!(breakpoints_[i] >= 0.0))
        throw GaugeError("gauge: breakpoints must be nonnegative");
      if (i > 0 && !(breakpoints_[i] > breakpoints_[i - 1]))
        throw GaugeError("gauge: breakpoints must be strictly increasing");
    }
    sanity_sample();
  }

  const RealMap& phi() const noexcept { return phi_; }
  const std::vector<double>& breakpoints() const noexcept { return breakpoints_; }
  double quad_tol() const noexcept { return quad_tol_; }

  /// Evaluate phi(t), enforcing evaluability and nonnegativity.
  double at(double t) const {
    EvalResult r = phi_.evaluate(t);
    if (!r.ok())
      throw GaugeError("gauge integrand failed at t=" + std::to_string(t) + ": " +
                       r.error().message);
    if (r.value() < 0.0)
      throw GaugeError("gauge integrand negative at t=" + std::to_string(t) +
                       " (phi must be nonnegative)");
    return r.value();
  }

 private:
  // Nonnegativity over the continuum is not machine-checkable; reject
  // gauges that are already negative on a fixed sample of [0, inf).
  void sanity_sample() const {
    std::vector<double> probes;
    for (int i = 0; i <= 64; ++i) probes.push_back(i * (4.0 / 64.0));
    for (int p = -8; p <= 2; ++p) probes.push_back(std::pow(10.0, p));
    for (double b : breakpoints_) {
      probes.push_back(b);
      probes.push_back(b + 1e-9);
      probes.push_back(b + 1e-3);
      if (b > 1e-9) probes.push_back(b - 1e-9);
    }
    for (double t : probes) at(t);
  }

  RealMap phi_;
  std::vector<double> breakpoints_;
  double quad_tol_;
};

namespace detail {

inline double simpson_recurse(const Gauge& g, double a, double fa, double m, double fm, double b,
                              double fb, double whole, double tol, int depth) {
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = g.at(lm);
  const double frm = g.at(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  if (depth >= kMaxSimpsonDepth)
    throw GaugeError("quadrature did not converge within the refinement depth limit");
  return simpson_recurse(g, a, fa, lm, flm, m, fm, left, 0.5 * tol, depth + 1) +
         simpson_recurse(g, m, fm, rm, frm, b, fb, right, 0.5 * tol, depth + 1);
}

inline double simpson_piece(const Gauge& g, double a, double b, double tol) {
  if (!(b > a)) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = g.at(a);
  const double fm = g.at(m);
  const double fb = g.at(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_recurse(g, a, fa, m, fm, b, fb, whole, tol, 0);
}

}  // namespace detail

/// F(upper) = ∫_0^upper phi(t) dt with absolute error <= quad_tol.
inline double integrate(const Gauge& gauge, double upper) {
  if (!std::isfinite(upper) || upper < 0.0)
    throw std::invalid_argument("integrate: upper limit must be finite and nonnegative");
  if (upper == 0.0) return 0.0;

  std::vector<double> bounds{0.0};
  for (double b : gauge.breakpoints()) {
    if (b > 0.0 && b < upper) bounds.push_back(b);
  }
  bounds.push_back(upper);

  double total = 0.0;
  for (std::size_t i = 0; i + 1 < bounds.size(); ++i) {
    const double a = bounds[i];
    const double b = bounds[i + 1];
    const double tol = gauge.quad_tol() * std::max((b - a) / upper, 1e-3);
    total += detail::simpson_piece(gauge, a, b, tol);
  }
  return total;
}

struct PositivityEntry {
  double epsilon;
  double integral;
  bool pass;
};

struct PositivityReport {
  std::vector<PositivityEntry> entries;
  bool all_pass = true;
  std::size_t failures = 0;
};

/// Sampled check of the gauge condition: F(eps) > 0 for every eps > 0.
inline PositivityReport check_positivity(const Gauge& gauge, std::span<const double> epsilons) {
  PositivityReport report;
  report.entries.reserve(epsilons.size());
  for (double eps : epsilons) {
    if (!(eps > 0.0)) throw std::invalid_argument("check_positivity: epsilon must be positive");
    const double integral = integrate(gauge, eps);
    const bool pass = integral > kPositivityFloor;
    if (!pass) {
      report.all_pass = false;
      ++report.failures;
    }
    report.entries.push_back({eps, integral, pass});
  }
  return report;
}

/// Log-spaced epsilon grid from `lo` up to the scale `hi` (both positive).
inline std::vector<double> default_epsilon_grid(double lo, double hi, std::size_t count = 12) {
  if (!(lo > 0.0) || !(hi > lo) || count < 2)
    throw std::invalid_argument("default_epsilon_grid: need 0 < lo < hi and count >= 2");
  std::vector<double> grid;
  grid.reserve(count);
  const double step = std::log(hi / lo) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i)
    grid.push_back(lo * std::exp(step * static_cast<double>(i)));
  return grid;
}

/// Memoized view of F(u). Results are bit-identical to calling integrate
/// directly (the cache only stores exact-argument hits), so the table can
/// be shared across readers without changing observable behavior.
class CumulativeIntegral {
 public:
  explicit CumulativeIntegral(Gauge gauge) : gauge_(std::move(gauge)) { cache_[0.0] = 0.0; }

  const Gauge& gauge() const noexcept { return gauge_; }

  double operator()(double upper) const {
    {
      std::lock_guard<std::mutex> lock(mutex_);
      auto it = cache_.find(upper);
      if (it != cache_.end()) return it->second;
    }
    const double value = integrate(gauge_, upper);
    std::lock_guard<std::mutex> lock(mutex_);
    cache_.emplace(upper, value);
    return value;
  }

 private:
  Gauge gauge_;
  mutable std::map<double, double> cache_;
  mutable std::mutex mutex_;
};

}  // namespace fixcert

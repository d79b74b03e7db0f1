#pragma once

// Metric space on a real interval: domain membership, the distance map,
// seeded point sampling, and sampled verification of the metric axioms
// and of injectivity of a declared map.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fixcert/expr.hpp"
#include "fixcert/rng.hpp"

namespace fixcert {

inline constexpr double kMergeTol = 1e-9;
inline constexpr double kAxiomTol = 1e-12;

class MetricError : public std::runtime_error {
 public:
  explicit MetricError(const std::string& message) : std::runtime_error(message) {}
};

struct Domain {
  double lower = 0.0;
  double upper = std::numeric_limits<double>::infinity();
  bool lower_closed = true;
  bool upper_closed = false;

  Domain() = default;

  Domain(double lo, double up, bool lo_closed, bool up_closed)
      : lower(lo), upper(up), lower_closed(lo_closed), upper_closed(up_closed) {
    if (!std::isfinite(lower)) throw std::invalid_argument("domain: lower bound must be finite");
    if (std::isnan(upper)) throw std::invalid_argument("domain: upper bound must not be NaN");
    if (!(lower < upper)) throw std::invalid_argument("domain: lower must be less than upper");
    if (!bounded()) upper_closed = false;
  }

  bool bounded() const noexcept { return std::isfinite(upper); }

  bool contains(double v) const noexcept {
    if (std::isnan(v)) return false;
    if (lower_closed ? v < lower : v <= lower) return false;
    if (bounded() && (upper_closed ? v > upper : v >= upper)) return false;
    return !bounded() ? std::isfinite(v) : true;
  }
};

class MetricSpace {
 public:
  explicit MetricSpace(Domain domain) : domain_(domain) {}

  MetricSpace(Domain domain, RealMap custom) : domain_(domain), custom_(std::move(custom)) {}

  const Domain& domain() const noexcept { return domain_; }
  bool euclidean() const noexcept { return !custom_.has_value(); }
  const std::optional<RealMap>& custom_metric() const noexcept { return custom_; }

  /// d(x, y): |x - y| for the euclidean metric, otherwise the custom map
  /// applied to |x - y|.
  double distance(double x, double y) const {
    const double gap = std::abs(x - y);
    if (!custom_) return gap;
    EvalResult r = custom_->evaluate(gap);
    if (!r.ok())
      throw MetricError("metric evaluation failed at |x-y|=" + std::to_string(gap) + ": " +
                        r.error().message);
    return r.value();
  }

 private:
  Domain domain_;
  std::optional<RealMap> custom_;
};

struct MapProperties {
  bool one_to_one = true;
  bool continuous = true;
  bool sequentially_convergent = true;
  bool subsequentially_convergent = true;

  /// Declared flags; sequential convergence implies subsequential.
  static MapProperties make(bool one_to_one, bool continuous, bool sequentially,
                            bool subsequentially) {
    if (sequentially && !subsequentially)
      throw std::invalid_argument(
          "map properties: sequentially convergent implies subsequentially convergent");
    return MapProperties{one_to_one, continuous, sequentially, subsequentially};
  }
};

namespace detail {

struct Window {
  double lo;
  double hi;
};

/// The finite interval sampling operates on: the domain clipped to
/// `span` past its lower end, nudged off open endpoints.
inline Window sampling_window(const Domain& d, double span) {
  if (!(span > 0.0)) throw std::invalid_argument("sampling: span must be positive");
  double lo = d.lower;
  double hi = d.bounded() ? std::min(d.upper, d.lower + span) : d.lower + span;
  const double nudge = 1e-9 * std::max({1.0, std::abs(lo), std::abs(hi)});
  if (!d.lower_closed) lo += nudge;
  if (d.bounded() && hi == d.upper && !d.upper_closed) hi -= nudge;
  return {lo, hi};
}

}  // namespace detail

/// n domain points, deterministic in seed: a uniform grid of cells with
/// one jittered point per cell, in ascending order.
inline std::vector<double> sample_points(const MetricSpace& space, std::size_t n,
                                         std::uint64_t seed, double span) {
  const auto [lo, hi] = detail::sampling_window(space.domain(), span);
  std::vector<double> points;
  points.reserve(n);
  Rng rng(seed);
  const double width = hi - lo;
  for (std::size_t i = 0; i < n; ++i) {
    const double u = (static_cast<double>(i) + rng.unit()) / static_cast<double>(n);
    points.push_back(lo + u * width);
  }
  return points;
}

struct AxiomViolation {
  std::string axiom;  // "identity", "symmetry", "triangle", "nonnegativity", "separation"
  double x = 0, y = 0, z = 0;
  bool has_z = false;
  double lhs = 0, rhs = 0;
};

struct AxiomReport {
  bool untested = false;
  std::size_t points = 0;
  std::size_t pairs = 0;
  std::size_t triples = 0;
  std::optional<AxiomViolation> violation;

  bool pass() const noexcept { return !violation.has_value(); }
};

/// Sampled metric-axiom verification: identity and nonnegativity on all
/// points/pairs, symmetry on all pairs, triangle inequality on all
/// triples. Reports the first violating tuple found.
inline AxiomReport check_metric_axioms(const MetricSpace& space, std::size_t n,
                                       std::uint64_t seed, double span = 10.0) {
  AxiomReport report;
  if (n == 0) {
    report.untested = true;
    return report;
  }
  const std::vector<double> pts = sample_points(space, n, seed, span);
  report.points = pts.size();

  for (double p : pts) {
    const double d = space.distance(p, p);
    if (std::abs(d) > kAxiomTol) {
      report.violation = AxiomViolation{"identity", p, p, 0, false, d, 0.0};
      return report;
    }
  }

  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      ++report.pairs;
      const double dxy = space.distance(pts[i], pts[j]);
      const double dyx = space.distance(pts[j], pts[i]);
      if (dxy < 0.0 || dyx < 0.0) {
        report.violation =
            AxiomViolation{"nonnegativity", pts[i], pts[j], 0, false, std::min(dxy, dyx), 0.0};
        return report;
      }
      if (std::abs(dxy - dyx) > kAxiomTol * std::max(1.0, std::abs(dxy))) {
        report.violation = AxiomViolation{"symmetry", pts[i], pts[j], 0, false, dxy, dyx};
        return report;
      }
      if (dxy <= 0.0 && std::abs(pts[i] - pts[j]) > kMergeTol) {
        report.violation = AxiomViolation{"separation", pts[i], pts[j], 0, false, dxy, 0.0};
        return report;
      }
    }
  }

  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = 0; j < pts.size(); ++j) {
      if (j == i) continue;
      for (std::size_t k = 0; k < pts.size(); ++k) {
        if (k == i || k == j) continue;
        ++report.triples;
        const double dxz = space.distance(pts[i], pts[k]);
        const double via = space.distance(pts[i], pts[j]) + space.distance(pts[j], pts[k]);
        if (dxz > via + kAxiomTol * std::max(1.0, dxz)) {
          report.violation =
              AxiomViolation{"triangle", pts[i], pts[j], pts[k], true, dxz, via};
          return report;
        }
      }
    }
  }
  return report;
}

struct InjectivityReport {
  bool pass = true;
  std::optional<std::pair<double, double>> witness;
  double witness_t_gap = 0.0;     // |T(x) - T(y)| at the witness
  double witness_distance = 0.0;  // d(x, y) at the witness
  std::size_t points_checked = 0;
  std::size_t eval_failures = 0;
  std::string note;
};

namespace detail {

/// Bisect for T(v) = target on [a, b], assuming T(a)-target and
/// T(b)-target have opposite signs. Returns the midpoint after refinement.
inline std::optional<double> bisect_level(const RealMap& t_map, double a, double b, double target,
                                          double fa) {
  double lo = a, hi = b;
  double flo = fa - target;
  for (int iter = 0; iter < 200 && (hi - lo) > 0.0; ++iter) {
    const double mid = 0.5 * (lo + hi);
    EvalResult r = t_map.evaluate(mid);
    if (!r.ok()) return std::nullopt;
    const double fm = r.value() - target;
    if (fm == 0.0) return mid;
    if ((flo < 0.0) == (fm < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

/// Sampled injectivity evidence for T. Fails only with a concrete witness
/// pair: d(x,y) > merge_tol while |T(x) - T(y)| <= merge_tol. A pass is
/// evidence, not proof.
inline InjectivityReport sanity_check_injectivity(const RealMap& t_map, const MetricSpace& space,
                                                  std::size_t n, std::uint64_t seed,
                                                  double span = 10.0,
                                                  double merge_tol = kMergeTol) {
  InjectivityReport report;
  if (n == 0) {
    report.note = "untested (n = 0)";
    return report;
  }

  const std::vector<double> pts = sample_points(space, n, seed, span);
  std::vector<double> xs, ts;
  xs.reserve(pts.size());
  ts.reserve(pts.size());
  for (double p : pts) {
    EvalResult r = t_map.evaluate(p);
    if (!r.ok()) {
      ++report.eval_failures;
      continue;
    }
    xs.push_back(p);
    ts.push_back(r.value());
  }
  report.points_checked = xs.size();
  if (xs.size() < 2) {
    report.note = "insufficient evaluable points";
    return report;
  }

  auto record_witness = [&](double x, double y, double t_gap) {
    report.pass = false;
    report.witness = std::make_pair(x, y);
    report.witness_t_gap = t_gap;
    report.witness_distance = space.distance(x, y);
  };

  // Direct scan: distinct sampled points mapped to near-equal values.
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (std::size_t j = i + 1; j < xs.size(); ++j) {
      if (space.distance(xs[i], xs[j]) > merge_tol && std::abs(ts[i] - ts[j]) <= merge_tol) {
        record_witness(xs[i], xs[j], std::abs(ts[i] - ts[j]));
        return report;
      }
    }
  }

  // A continuous injective map on an interval is strictly monotone; a
  // slope sign change brackets an extremum, and level bisection on both
  // flanks produces two points with equal T-value.
  for (std::size_t i = 0; i + 2 < xs.size(); ++i) {
    const double left = ts[i + 1] - ts[i];
    const double right = ts[i + 2] - ts[i + 1];
    if (left == 0.0 || right == 0.0 || (left > 0.0) == (right > 0.0)) continue;

    const double a = xs[i], m = xs[i + 1], b = xs[i + 2];
    const bool is_max = left > 0.0;
    const double inner = ts[i + 1];
    const double outer = is_max ? std::max(ts[i], ts[i + 2]) : std::min(ts[i], ts[i + 2]);
    const double target = 0.5 * (inner + outer);

    auto px = detail::bisect_level(t_map, a, m, target, ts[i]);
    auto py = detail::bisect_level(t_map, m, b, target, ts[i + 1]);
    if (!px || !py) continue;
    EvalResult rx = t_map.evaluate(*px);
    EvalResult ry = t_map.evaluate(*py);
    if (!rx.ok() || !ry.ok()) continue;
    const double gap = std::abs(rx.value() - ry.value());
    if (space.distance(*px, *py) > merge_tol && gap <= merge_tol) {
      record_witness(*px, *py, gap);
      report.note = "witness located by extremum bracketing";
      return report;
    }
  }

  report.note = "no collision found on sampled evidence";
  return report;
}

}  // namespace fixcert

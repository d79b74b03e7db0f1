#pragma once

// Picard iteration x_n = T(S^n x): orbit recording, stopping on a
// stabilized Cauchy criterion in T-image space, fixed-point extraction
// (directly or through accumulation-point detection), and the
// proof-step diagnostics reported alongside a solve.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fixcert/contraction.hpp"
#include "fixcert/expr.hpp"
#include "fixcert/gauge.hpp"
#include "fixcert/problem.hpp"
#include "fixcert/space.hpp"

namespace fixcert {

inline constexpr double kDiagTol = 1e-8;
inline constexpr double kOverflowGuard = 1e12;

struct OrbitTrace {
  std::vector<double> s_orbit;         // S^n x, beginning with x0
  std::vector<double> t_orbit;         // x_n = T(S^n x)
  std::vector<double> step_distances;  // d(x_n, x_{n+1})
  double diameter_estimate = 0.0;      // max pairwise distance within t_orbit
  std::vector<double> cauchy_modulus;  // sup_{m>n} d(x_m, x_n), recorded tail
};

enum class SolveStatus { Converged, MaxIterExceeded, Diverged, EvaluationError };

inline constexpr std::string_view to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::MaxIterExceeded: return "max-iter-exceeded";
    case SolveStatus::Diverged: return "diverged";
    case SolveStatus::EvaluationError: return "evaluation-error";
  }
  return "?";
}

struct SolveResult {
  SolveStatus status = SolveStatus::MaxIterExceeded;
  std::optional<double> fixed_point;  // b with S(b) = b
  std::optional<double> residual;     // d(S(b), b)
  std::optional<double> t_limit;      // a = lim x_n; T(b) = a
  std::size_t iterations = 0;         // orbit index of the accepted point
  bool via_subsequence = false;
  std::string message;
};

struct SolveRun {
  OrbitTrace trace;
  SolveResult result;
};

namespace detail {

/// 1-D cluster centers of `points`: sort, split at gaps larger than eps,
/// return the mean of each block.
inline std::vector<double> cluster_centers(std::vector<double> points, double eps) {
  std::vector<double> centers;
  if (points.empty()) return centers;
  std::sort(points.begin(), points.end());
  double sum = points[0];
  std::size_t count = 1;
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (points[i] - points[i - 1] > eps) {
      centers.push_back(sum / static_cast<double>(count));
      sum = 0;
      count = 0;
    }
    sum += points[i];
    ++count;
  }
  centers.push_back(sum / static_cast<double>(count));
  return centers;
}

inline std::vector<double> orbit_tail(const std::vector<double>& orbit, std::size_t want) {
  const std::size_t n = std::min(orbit.size(), want);
  return std::vector<double>(orbit.end() - static_cast<std::ptrdiff_t>(n), orbit.end());
}

inline double cluster_eps_for(const std::vector<double>& tail) {
  double lo = tail.front(), hi = tail.front();
  for (double v : tail) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return std::max(1e-9, 1e-3 * (hi - lo));
}

inline void finish_trace(OrbitTrace& trace) {
  const auto& t = trace.t_orbit;
  if (t.empty()) return;
  double lo = t[0], hi = t[0];
  for (double v : t) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  trace.diameter_estimate = hi - lo;

  // sup_{m>n} |t_m - t_n| via suffix extrema, recorded for the tail.
  if (t.size() < 2) return;
  const std::size_t n = t.size();
  const std::size_t tail = std::min<std::size_t>(128, n - 1);
  std::vector<double> suf_max(n), suf_min(n);
  suf_max[n - 1] = suf_min[n - 1] = t[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) {
    suf_max[i] = std::max(t[i], suf_max[i + 1]);
    suf_min[i] = std::min(t[i], suf_min[i + 1]);
  }
  trace.cauchy_modulus.reserve(tail);
  for (std::size_t i = n - 1 - tail; i + 1 < n; ++i)
    trace.cauchy_modulus.push_back(std::max(suf_max[i + 1] - t[i], t[i] - suf_min[i + 1]));
}

}  // namespace detail

/// Run the Picard iteration from config.x0 (default: low end of the
/// sampling window). Stops when the last `stability_window` T-image step
/// distances all fall within tol and the candidate validates by residual;
/// a failed validation falls back to accumulation-point extraction and,
/// failing that, the iteration continues.
inline SolveRun iterate(const Problem& problem, const SolverConfig& config) {
  const RealMap& s_map = problem.S;
  const RealMap& t_map = problem.T;
  const MetricSpace& space = problem.space;

  const detail::Window w = detail::sampling_window(space.domain(), problem.sampling.span);
  const double x0 = config.x0.value_or(w.lo);
  if (!space.domain().contains(x0))
    throw std::invalid_argument("iterate: starting point lies outside the domain");

  SolveRun run;
  OrbitTrace& trace = run.trace;
  SolveResult& result = run.result;

  auto fail_eval = [&](const std::exception& e, std::size_t step) {
    result.status = SolveStatus::EvaluationError;
    result.iterations = step;
    result.message = "evaluation failed at step " + std::to_string(step) + ": " + e.what();
    detail::finish_trace(trace);
  };

  try {
    trace.s_orbit.push_back(x0);
    trace.t_orbit.push_back(eval_or_throw(t_map, x0, "T"));
  } catch (const EvalException& e) {
    fail_eval(e, 0);
    return run;
  }

  const std::size_t window = static_cast<std::size_t>(config.stability_window);

  auto window_stable = [&]() {
    if (trace.step_distances.size() < window) return false;
    for (std::size_t i = trace.step_distances.size() - window; i < trace.step_distances.size();
         ++i)
      if (trace.step_distances[i] > config.tol) return false;
    return true;
  };

  auto accept = [&](double b, double resid, bool via_subsequence, std::size_t index) {
    result.status = SolveStatus::Converged;
    result.fixed_point = b;
    result.residual = resid;
    result.t_limit = trace.t_orbit.back();
    result.iterations = index;
    result.via_subsequence = via_subsequence;
  };

  for (int n = 0; n < config.max_iter; ++n) {
    const double current = trace.s_orbit.back();
    double next = 0;
    try {
      next = eval_or_throw(s_map, current, "S");
    } catch (const EvalException& e) {
      fail_eval(e, static_cast<std::size_t>(n));
      return run;
    }

    if (!space.domain().contains(next)) {
      result.status = SolveStatus::Diverged;
      result.iterations = static_cast<std::size_t>(n);
      result.message = "orbit left the domain at step " + std::to_string(n) +
                       " (S^n x = " + std::to_string(next) + ")";
      detail::finish_trace(trace);
      return run;
    }
    if (std::abs(next) > kOverflowGuard) {
      result.status = SolveStatus::Diverged;
      result.iterations = static_cast<std::size_t>(n);
      result.message = "orbit exceeded the overflow guard at step " + std::to_string(n);
      detail::finish_trace(trace);
      return run;
    }

    double t_next = 0;
    try {
      t_next = eval_or_throw(t_map, next, "T");
      trace.step_distances.push_back(space.distance(trace.t_orbit.back(), t_next));
    } catch (const std::exception& e) {
      fail_eval(e, static_cast<std::size_t>(n));
      return run;
    }
    trace.s_orbit.push_back(next);
    trace.t_orbit.push_back(t_next);

    try {
      // Stationary point: S holds the value exactly.
      if (next == current) {
        accept(next, space.distance(next, next), false, static_cast<std::size_t>(n));
        detail::finish_trace(trace);
        return run;
      }

      if (window_stable()) {
        const double b = trace.s_orbit.back();
        const double resid = space.distance(eval_or_throw(s_map, b, "S"), b);
        if (resid <= config.residual_tol) {
          accept(b, resid, false, trace.s_orbit.size() - 1);
          detail::finish_trace(trace);
          return run;
        }
        // T-images stabilized but S did not: try accumulation points of
        // the s-orbit tail (the subsequential-convergence reading).
        const auto tail = detail::orbit_tail(trace.s_orbit, 64);
        const auto centers = detail::cluster_centers(tail, detail::cluster_eps_for(tail));
        if (centers.size() > 1) {
          const double a = trace.t_orbit.back();
          for (double c : centers) {
            if (!space.domain().contains(c)) continue;
            EvalResult sc = s_map.evaluate(c);
            EvalResult tc = t_map.evaluate(c);
            if (!sc.ok() || !tc.ok()) continue;
            if (space.distance(sc.value(), c) <= config.residual_tol &&
                std::abs(tc.value() - a) <= config.residual_tol) {
              accept(c, space.distance(sc.value(), c), true, trace.s_orbit.size() - 1);
              result.message = "fixed point recovered from an accumulation point of S^n x";
              detail::finish_trace(trace);
              return run;
            }
          }
        }
      }
    } catch (const EvalException& e) {
      fail_eval(e, static_cast<std::size_t>(n));
      return run;
    }
  }

  result.status = SolveStatus::MaxIterExceeded;
  result.iterations = trace.s_orbit.size() - 1;
  result.message = "no stabilized fixed point within max_iter";
  detail::finish_trace(trace);
  return run;
}

// ---- proof-step diagnostics ----

struct Step1Verdict {
  bool decay_pass = false;
  bool geometric_pass = false;
  std::optional<std::size_t> first_violation;
  double k = 0.0;
  std::size_t steps = 0;
  std::string note;
};

/// Step 1: d(x_n, x_{n+1}) -> 0, and the geometric envelope
/// F(d(x_n,x_{n+1})) <= k^n F(d(x_0,x_1)) + diag_tol at the preset's k.
inline Step1Verdict check_step1(const OrbitTrace& trace, const Problem& problem,
                                const SolverConfig& config) {
  Step1Verdict verdict;
  verdict.k = problem.preset.k();
  verdict.steps = trace.step_distances.size();
  if (verdict.steps == 0) {
    verdict.decay_pass = verdict.geometric_pass = true;
    verdict.note = "no steps recorded; vacuous";
    return verdict;
  }

  const double decay_threshold = std::max(10.0 * config.tol, kDiagTol);
  verdict.decay_pass = trace.step_distances.back() <= decay_threshold;

  CumulativeIntegral cumulative(problem.gauge);
  const double base = cumulative(trace.step_distances.front());
  verdict.geometric_pass = true;
  double envelope = base;
  for (std::size_t n = 0; n < verdict.steps; ++n) {
    if (cumulative(trace.step_distances[n]) > envelope + kDiagTol) {
      verdict.geometric_pass = false;
      verdict.first_violation = n;
      break;
    }
    envelope *= verdict.k;
  }
  if (!verdict.decay_pass && !verdict.first_violation)
    verdict.first_violation = verdict.steps - 1;
  return verdict;
}

struct Step23Verdict {
  bool bounded_pass = false;
  bool cauchy_pass = false;
  double diameter = 0.0;
  double tail_growth = 0.0;
  double final_cauchy = 0.0;
  std::string note;
};

/// Steps 2 and 3: the orbit's diameter estimate has stabilized, and the
/// tail Cauchy modulus has fallen below tolerance.
inline Step23Verdict check_step2_step3(const OrbitTrace& trace, const SolverConfig& config) {
  Step23Verdict verdict;
  verdict.diameter = trace.diameter_estimate;
  const auto& t = trace.t_orbit;
  if (t.size() < 4) {
    verdict.bounded_pass = true;
    verdict.cauchy_pass = true;
    verdict.note = "orbit too short for tail analysis; vacuous";
    return verdict;
  }

  const std::size_t prefix = (3 * t.size()) / 4;
  double lo = t[0], hi = t[0];
  for (std::size_t i = 0; i < prefix; ++i) {
    lo = std::min(lo, t[i]);
    hi = std::max(hi, t[i]);
  }
  verdict.tail_growth = verdict.diameter - (hi - lo);
  verdict.bounded_pass = std::isfinite(verdict.diameter) &&
                         verdict.tail_growth <= std::max(kDiagTol, 0.01 * verdict.diameter);

  verdict.final_cauchy =
      trace.cauchy_modulus.empty() ? 0.0 : trace.cauchy_modulus.back();
  verdict.cauchy_pass = verdict.final_cauchy <= std::max(10.0 * config.tol, kDiagTol);
  return verdict;
}

enum class UniquenessStatus { Pass, Fail, Inconclusive };

inline constexpr std::string_view to_string(UniquenessStatus s) {
  switch (s) {
    case UniquenessStatus::Pass: return "pass";
    case UniquenessStatus::Fail: return "fail";
    case UniquenessStatus::Inconclusive: return "inconclusive";
  }
  return "?";
}

struct UniquenessVerdict {
  UniquenessStatus status = UniquenessStatus::Inconclusive;
  std::vector<double> starts;
  std::vector<double> results;
  double max_spread = 0.0;
  std::string note;
};

/// Re-solve from extra starting points; all limits must agree with the
/// primary fixed point within 10 * residual_tol.
inline UniquenessVerdict check_uniqueness(const Problem& problem, const SolverConfig& config,
                                          double primary_fixed_point) {
  UniquenessVerdict verdict;
  if (!config.probes.empty()) {
    verdict.starts = config.probes;
  } else if (config.uniqueness_probes > 0) {
    verdict.starts = sample_points(problem.space,
                                   static_cast<std::size_t>(config.uniqueness_probes),
                                   problem.sampling.seed + 1, problem.sampling.span);
  } else {
    verdict.status = UniquenessStatus::Pass;
    verdict.note = "no probes requested";
    return verdict;
  }

  for (double start : verdict.starts) {
    SolverConfig probe_config = config;
    probe_config.x0 = start;
    SolveRun run = iterate(problem, probe_config);
    if (run.result.status != SolveStatus::Converged || !run.result.fixed_point) {
      verdict.status = UniquenessStatus::Inconclusive;
      verdict.note = "probe from x0=" + std::to_string(start) +
                     " did not converge (" + std::string(to_string(run.result.status)) + ")";
      return verdict;
    }
    verdict.results.push_back(*run.result.fixed_point);
  }

  double spread = 0.0;
  for (double b : verdict.results)
    spread = std::max(spread, problem.space.distance(b, primary_fixed_point));
  for (std::size_t i = 0; i < verdict.results.size(); ++i)
    for (std::size_t j = i + 1; j < verdict.results.size(); ++j)
      spread = std::max(spread, problem.space.distance(verdict.results[i], verdict.results[j]));
  verdict.max_spread = spread;
  verdict.status = spread <= 10.0 * config.residual_tol ? UniquenessStatus::Pass
                                                        : UniquenessStatus::Fail;
  if (verdict.status == UniquenessStatus::Fail)
    verdict.note = "probe limits disagree; fixed point not unique over the probed starts";
  return verdict;
}

struct PosthocNote {
  bool s_orbit_converged = false;
  bool subsequence_extracted = false;
  std::optional<double> accumulation_point;
  std::string note;
};

/// Compare the observed orbit behavior with the declared convergence
/// properties of T. Sampled orbits cannot prove Definition-style
/// sequential convergence; this records consistency evidence only.
inline PosthocNote posthoc_convergence_check(const OrbitTrace& trace, const Problem& problem,
                                             const SolverConfig& config) {
  PosthocNote note;
  const auto& s = trace.s_orbit;
  if (s.size() < 2) {
    note.s_orbit_converged = true;
    note.note = "orbit trivial; nothing to compare";
    return note;
  }

  const double last_gap = std::abs(s[s.size() - 1] - s[s.size() - 2]);
  note.s_orbit_converged =
      last_gap <= std::max(10.0 * config.residual_tol, 1e-12 * std::max(1.0, std::abs(s.back())));

  const bool t_converged = !trace.step_distances.empty() &&
                           trace.step_distances.back() <= std::max(10.0 * config.tol, kDiagTol);

  if (note.s_orbit_converged) {
    note.note = problem.t_properties.sequentially_convergent
                    ? "declared sequentially convergent: consistent (S^n x converged)"
                    : "S^n x converged; stronger than the declared subsequential convergence";
    return note;
  }

  if (t_converged) {
    const auto tail = detail::orbit_tail(s, 64);
    const auto centers = detail::cluster_centers(tail, detail::cluster_eps_for(tail));
    if (centers.size() > 1) {
      note.subsequence_extracted = true;
      const double a = trace.t_orbit.back();
      double best = centers.front();
      double best_gap = std::numeric_limits<double>::infinity();
      for (double c : centers) {
        EvalResult tc = problem.T.evaluate(c);
        if (!tc.ok()) continue;
        const double gap = std::abs(tc.value() - a);
        if (gap < best_gap) {
          best_gap = gap;
          best = c;
        }
      }
      note.accumulation_point = best;
      note.note = "subsequence extracted: T(S^n x) converged while S^n x oscillates among " +
                  std::to_string(centers.size()) + " accumulation points";
      if (problem.t_properties.sequentially_convergent)
        note.note += "; inconsistent with the declared sequential convergence";
      return note;
    }
  }

  note.note = "S^n x did not converge on this run";
  return note;
}

}  // namespace fixcert

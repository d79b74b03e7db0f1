#pragma once

// The integral contractive conditions: maximal terms m and m', per-pair
// inequality evaluation, sampled certification of a candidate constant k,
// and witness search for falsification.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fixcert/condition.hpp"
#include "fixcert/expr.hpp"
#include "fixcert/gauge.hpp"
#include "fixcert/problem.hpp"
#include "fixcert/rng.hpp"
#include "fixcert/space.hpp"

namespace fixcert {

inline constexpr double kCertTol = 1e-9;

namespace detail {

// Shared by m_prime and evaluate_pair so that the identity-T reduction
// (moradi vs rhoades) is bit-exact, not merely close.
inline double maximal_term(double tx, double ty, double tsx, double tsy,
                           const MetricSpace& space) {
  const double d1 = space.distance(tx, ty);
  const double d2 = space.distance(tx, tsx);
  const double d3 = space.distance(ty, tsy);
  const double d4 = 0.5 * (space.distance(tx, tsy) + space.distance(ty, tsx));
  return std::max(std::max(d1, d2), std::max(d3, d4));
}

}  // namespace detail

/// m(x, y) = max{d(x,y), d(x,Sx), d(y,Sy), (d(x,Sy)+d(y,Sx))/2}.
inline double m_max(double x, double y, const RealMap& s_map, const MetricSpace& space) {
  const double sx = eval_or_throw(s_map, x, "S");
  const double sy = eval_or_throw(s_map, y, "S");
  return detail::maximal_term(x, y, sx, sy, space);
}

/// m'(Tx, Ty) = max{d(Tx,Ty), d(Tx,TSx), d(Ty,TSy), (d(Tx,TSy)+d(Ty,TSx))/2}.
inline double m_prime(double x, double y, const RealMap& s_map, const RealMap& t_map,
                      const MetricSpace& space) {
  const double sx = eval_or_throw(s_map, x, "S");
  const double sy = eval_or_throw(s_map, y, "S");
  const double tx = eval_or_throw(t_map, x, "T");
  const double ty = eval_or_throw(t_map, y, "T");
  const double tsx = eval_or_throw(t_map, sx, "T∘S");
  const double tsy = eval_or_throw(t_map, sy, "T∘S");
  return detail::maximal_term(tx, ty, tsx, tsy, space);
}

/// Both sides of the contractive inequality at one pair of points.
struct PairEvaluation {
  double x = 0, y = 0;
  double lhs_upper = 0;   // d(Sx,Sy) for identity T, d(TSx,TSy) otherwise
  double rhs_upper = 0;   // d(x,y) | m(x,y) | m'(Tx,Ty) per preset
  double lhs_integral = 0;
  double rhs_integral = 0;
  std::optional<double> ratio;  // defined iff rhs_integral > positivity floor
};

inline PairEvaluation evaluate_pair(const Problem& problem, double x, double y,
                                    const CumulativeIntegral& cumulative) {
  const RealMap& s_map = problem.S;
  const RealMap& t_map = problem.preset.t_map();
  const MetricSpace& space = problem.space;

  const double sx = eval_or_throw(s_map, x, "S");
  const double sy = eval_or_throw(s_map, y, "S");
  const double tx = eval_or_throw(t_map, x, "T");
  const double ty = eval_or_throw(t_map, y, "T");
  const double tsx = eval_or_throw(t_map, sx, "T∘S");
  const double tsy = eval_or_throw(t_map, sy, "T∘S");

  PairEvaluation pe;
  pe.x = x;
  pe.y = y;
  pe.lhs_upper = space.distance(tsx, tsy);
  pe.rhs_upper = problem.preset.kind() == ConditionKind::Branciari
                     ? space.distance(tx, ty)
                     : detail::maximal_term(tx, ty, tsx, tsy, space);
  pe.lhs_integral = cumulative(pe.lhs_upper);
  pe.rhs_integral = cumulative(pe.rhs_upper);
  if (pe.rhs_integral > kPositivityFloor) pe.ratio = pe.lhs_integral / pe.rhs_integral;
  return pe;
}

inline PairEvaluation evaluate_pair(const Problem& problem, double x, double y) {
  CumulativeIntegral cumulative(problem.gauge);
  return evaluate_pair(problem, x, y, cumulative);
}

enum class CertVerdict { CertifiedAtK, Falsified, Inconclusive };

inline constexpr std::string_view to_string(CertVerdict v) {
  switch (v) {
    case CertVerdict::CertifiedAtK: return "certified-at-k";
    case CertVerdict::Falsified: return "falsified";
    case CertVerdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

/// Sampled-evidence verdict for the contractive inequality at candidate k.
struct Certificate {
  CertVerdict verdict = CertVerdict::Inconclusive;
  std::optional<double> estimated_k;            // max defined ratio over checked pairs
  std::optional<PairEvaluation> witness_best;   // attains estimated_k
  std::optional<PairEvaluation> witness_violation;
  std::size_t pairs_checked = 0;
  std::uint64_t seed = 0;
  std::string note;
};

namespace detail {

inline bool pair_lex_less(double x1, double y1, double x2, double y2) {
  return x1 < x2 || (x1 == x2 && y1 < y2);
}

/// Short Picard pre-runs that expose near-fixed points of S; the
/// supremum ratio is often attained with one endpoint there.
inline std::vector<double> detect_fixed_candidates(const Problem& problem, const Window& w) {
  std::vector<double> candidates;
  const double starts[3] = {w.lo + 0.25 * (w.hi - w.lo), w.lo + 0.5 * (w.hi - w.lo),
                            w.lo + 0.75 * (w.hi - w.lo)};
  for (double p : starts) {
    for (int step = 0; step < 80; ++step) {
      EvalResult r = problem.S.evaluate(p);
      if (!r.ok()) break;
      const double next = r.value();
      if (!problem.space.domain().contains(next) || std::abs(next) > 1e12) break;
      if (std::abs(next - p) <= 1e-12 * std::max(1.0, std::abs(next))) {
        p = next;
        bool fresh = true;
        for (double c : candidates)
          if (std::abs(c - p) <= 1e-6 * std::max(1.0, std::abs(c))) fresh = false;
        if (fresh) candidates.push_back(p);
        break;
      }
      p = next;
    }
  }
  return candidates;
}

/// Deterministic pool: grid pairs, anchored pairs (boundary and
/// near-fixed points), near-diagonal pairs, and uniform random pairs.
inline std::vector<std::pair<double, double>> build_pair_pool(const Problem& problem,
                                                              std::size_t n_pairs,
                                                              std::uint64_t seed) {
  const Window w = sampling_window(problem.space.domain(), problem.sampling.span);
  const double width = w.hi - w.lo;
  Rng rng(seed);
  std::vector<std::pair<double, double>> pool;
  pool.reserve(n_pairs);

  const std::size_t quarter = n_pairs / 4;

  if (quarter > 0) {
    // Grid pairs over the window, row-major i < j.
    std::size_t m = 2;
    while (m * (m - 1) / 2 < quarter) ++m;
    std::vector<double> grid;
    grid.reserve(m);
    for (std::size_t i = 0; i < m; ++i)
      grid.push_back(w.lo + width * static_cast<double>(i) / static_cast<double>(m - 1));
    for (std::size_t i = 0; i < m && pool.size() < quarter; ++i)
      for (std::size_t j = i + 1; j < m && pool.size() < quarter; ++j)
        pool.emplace_back(grid[i], grid[j]);

    // Anchored pairs: window ends plus detected near-fixed points.
    std::vector<double> anchors{w.lo, w.hi};
    for (double c : detect_fixed_candidates(problem, w)) anchors.push_back(c);
    for (std::size_t c = 0; c < quarter; ++c) {
      const double anchor = anchors[c % anchors.size()];
      double other = rng.uniform(w.lo, w.hi);
      if (other == anchor) other = 0.5 * (w.lo + w.hi);
      pool.emplace_back(anchor, other);
    }

    // Near-diagonal pairs: |x - y| spans nine decades below the width.
    for (std::size_t c = 0; c < quarter; ++c) {
      const double x = rng.uniform(w.lo, w.hi);
      const double delta = width * std::pow(10.0, rng.uniform(-9.0, -1.0));
      const double y = std::clamp(rng.coin() ? x + delta : x - delta, w.lo, w.hi);
      pool.emplace_back(x, y);
    }
  }

  while (pool.size() < n_pairs) pool.emplace_back(rng.uniform(w.lo, w.hi), rng.uniform(w.lo, w.hi));
  return pool;
}

}  // namespace detail

/// Check the preset inequality over a deterministic sampled pair pool.
/// A certified verdict is sampled evidence over those pairs, not a proof.
inline Certificate certify(const Problem& problem, std::size_t n_pairs, std::uint64_t seed) {
  if (n_pairs < 1) throw std::invalid_argument("certify: n_pairs must be at least 1");

  Certificate cert;
  cert.seed = seed;
  const double k = problem.preset.k();
  CumulativeIntegral cumulative(problem.gauge);
  const auto pool = detail::build_pair_pool(problem, n_pairs, seed);

  bool ratio_exceeded = false;
  double worst_excess = 0.0;

  for (const auto& [x, y] : pool) {
    PairEvaluation pe;
    try {
      pe = evaluate_pair(problem, x, y, cumulative);
    } catch (const std::exception& e) {
      cert.verdict = CertVerdict::Inconclusive;
      cert.note = "aborted after " + std::to_string(cert.pairs_checked) +
                  " pairs: " + e.what();
      return cert;
    }
    ++cert.pairs_checked;

    if (pe.ratio) {
      if (!cert.estimated_k || *pe.ratio > *cert.estimated_k ||
          (*pe.ratio == *cert.estimated_k &&
           detail::pair_lex_less(pe.x, pe.y, cert.witness_best->x, cert.witness_best->y))) {
        cert.estimated_k = *pe.ratio;
        cert.witness_best = pe;
      }
      if (*pe.ratio > k + kCertTol) ratio_exceeded = true;
    }

    const double excess = pe.lhs_integral - k * pe.rhs_integral;
    if (excess > kCertTol) {
      if (!cert.witness_violation || excess > worst_excess ||
          (excess == worst_excess &&
           detail::pair_lex_less(pe.x, pe.y, cert.witness_violation->x,
                                 cert.witness_violation->y))) {
        worst_excess = excess;
        cert.witness_violation = pe;
      }
    }
  }

  if (cert.witness_violation) {
    cert.verdict = CertVerdict::Falsified;
    cert.note = "violation found; worst pair reported";
  } else if (ratio_exceeded) {
    cert.verdict = CertVerdict::Inconclusive;
    cert.note = "ratio exceeds k on near-degenerate pairs without a definite violation";
  } else {
    cert.verdict = CertVerdict::CertifiedAtK;
    cert.note = cert.estimated_k
                    ? "all sampled pairs satisfy the inequality at k"
                    : "no pair produced a defined ratio; vacuous over this sample";
  }
  return cert;
}

/// Result of the falsification search.
struct FalsifyOutcome {
  bool found = false;
  std::optional<PairEvaluation> witness;  // violating pair when found
  std::optional<PairEvaluation> best;     // best ratio seen overall
  std::size_t evaluations = 0;
  std::size_t errors_skipped = 0;
  std::uint64_t seed = 0;
  std::string note;
};

namespace detail {

struct BudgetExhausted {};

class RatioProbe {
 public:
  RatioProbe(const Problem& problem, const CumulativeIntegral& cumulative, std::size_t budget,
             FalsifyOutcome& out)
      : problem_(problem), cumulative_(cumulative), budget_(budget), out_(out) {}

  /// Ratio at (x, y); -1 when undefined, -2 on evaluation error.
  double operator()(double x, double y) {
    if (out_.evaluations >= budget_) throw BudgetExhausted{};
    ++out_.evaluations;
    PairEvaluation pe;
    try {
      pe = evaluate_pair(problem_, x, y, cumulative_);
    } catch (const std::exception&) {
      ++out_.errors_skipped;
      return -2.0;
    }
    if (!pe.ratio) return -1.0;
    if (!out_.best || *pe.ratio > *out_.best->ratio ||
        (*pe.ratio == *out_.best->ratio && pair_lex_less(pe.x, pe.y, out_.best->x, out_.best->y)))
      out_.best = pe;
    return *pe.ratio;
  }

 private:
  const Problem& problem_;
  const CumulativeIntegral& cumulative_;
  std::size_t budget_;
  FalsifyOutcome& out_;
};

/// Golden-section ascent of f over [a, b]; returns the argmax estimate.
template <typename F>
inline double golden_max(F&& f, double a, double b, int iterations) {
  constexpr double kInvPhi = 0.6180339887498949;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int i = 0; i < iterations && d > c; ++i) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
    }
  }
  return fc >= fd ? c : d;
}

}  // namespace detail

/// Search for a pair violating the preset inequality: random restarts
/// refined by alternating golden-section ascent on each coordinate.
inline FalsifyOutcome falsify(const Problem& problem, std::size_t budget, std::uint64_t seed,
                              int restarts = 64) {
  if (budget < 1) throw std::invalid_argument("falsify: budget must be at least 1");

  FalsifyOutcome out;
  out.seed = seed;
  const double k = problem.preset.k();
  const detail::Window w = detail::sampling_window(problem.space.domain(), problem.sampling.span);
  CumulativeIntegral cumulative(problem.gauge);
  detail::RatioProbe probe(problem, cumulative, budget, out);
  Rng rng(seed);

  const auto violates = [&](const PairEvaluation& pe) {
    return pe.ratio && *pe.ratio > k + kCertTol;
  };

  try {
    // Coarse scan seeds the first restart.
    double best_x = w.lo, best_y = w.hi, best_r = -3.0;
    const int g = 12;
    for (int i = 0; i <= g; ++i) {
      for (int j = 0; j <= g; ++j) {
        const double x = w.lo + (w.hi - w.lo) * i / g;
        const double y = w.lo + (w.hi - w.lo) * j / g;
        const double r = probe(x, y);
        if (r > best_r) {
          best_r = r;
          best_x = x;
          best_y = y;
        }
      }
    }

    for (int restart = 0; restart < restarts; ++restart) {
      double x = restart == 0 ? best_x : rng.uniform(w.lo, w.hi);
      double y = restart == 0 ? best_y : rng.uniform(w.lo, w.hi);
      double value = probe(x, y);

      for (int sweep = 0; sweep < 8; ++sweep) {
        const double before = value;
        x = detail::golden_max([&](double t) { return probe(t, y); }, w.lo, w.hi, 28);
        y = detail::golden_max([&](double t) { return probe(x, t); }, w.lo, w.hi, 28);
        value = probe(x, y);
        if (value - before < 1e-13) break;
      }

      if (out.best && violates(*out.best)) {
        out.found = true;
        out.witness = out.best;
        out.note = "violation found on restart " + std::to_string(restart);
        return out;
      }
    }
  } catch (detail::BudgetExhausted) {
    // fall through with the best pair seen
  }

  if (out.best && violates(*out.best)) {
    out.found = true;
    out.witness = out.best;
    out.note = "violation found at budget boundary";
  } else {
    out.note = "not-found: best ratio within bound over the explored pairs";
  }
  return out;
}

}  // namespace fixcert

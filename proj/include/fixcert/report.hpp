#pragma once

// Orchestration of the pipeline stages and report emission: verdicts to
// stdout as readable text and, on request, a machine-readable JSON
// document. Reports are deterministic for a fixed problem and seed,
// except for the timing block.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fixcert/condition.hpp"
#include "fixcert/contraction.hpp"
#include "fixcert/expr.hpp"
#include "fixcert/gauge.hpp"
#include "fixcert/problem.hpp"
#include "fixcert/solver.hpp"
#include "fixcert/space.hpp"
#include "fixcert/version.hpp"

namespace fixcert {

// Eq-level reading recorded in every report: the maximal term of the
// main condition is evaluated at (Tx, Ty).
inline constexpr const char* kMaximalTermInterpretation =
    "maximal term m' evaluated at (Tx, Ty)";

struct RunOptions {
  std::optional<std::uint64_t> seed;
  std::optional<int> pairs;
  std::optional<double> tol;
  std::optional<int> max_iter;
  std::size_t falsify_budget = 5000;
  int falsify_restarts = 64;
  std::size_t axiom_points = 30;
  std::size_t injectivity_points = 100;
};

struct HypothesisReport {
  std::optional<PositivityReport> positivity;
  std::optional<AxiomReport> axioms;
  std::optional<InjectivityReport> injectivity;
  bool declared_ok = true;
  std::vector<std::string> failures;      // human-readable hypothesis failures
  std::vector<std::string> stage_errors;  // stages that could not run
};

struct Diagnostics {
  std::optional<Step1Verdict> step1;
  std::optional<Step23Verdict> step23;
  std::optional<UniquenessVerdict> uniqueness;
  std::optional<PosthocNote> posthoc;
};

struct Report {
  std::string command;
  Problem problem;
  std::uint64_t seed_used = 0;
  int pairs_used = 0;
  std::optional<Certificate> certificate;
  std::optional<FalsifyOutcome> falsification;
  std::optional<SolveResult> solve;
  std::optional<OrbitTrace> trace;
  HypothesisReport hypotheses;
  Diagnostics diagnostics;
  std::string conclusion_label;
  std::vector<std::string> conclusion_reasons;
  bool execution_failure = false;
  std::string version = kVersion;
  double total_seconds = 0.0;
  std::vector<std::pair<std::string, double>> stage_seconds;
};

namespace detail {

class StageClock {
 public:
  explicit StageClock(Report& report) : report_(report), start_(clock::now()) {}

  template <typename F>
  void stage(const std::string& name, F&& body) {
    const auto begin = clock::now();
    body();
    report_.stage_seconds.emplace_back(name, seconds_since(begin));
  }

  void finish() { report_.total_seconds = seconds_since(start_); }

 private:
  using clock = std::chrono::steady_clock;

  static double seconds_since(clock::time_point begin) {
    return std::chrono::duration<double>(clock::now() - begin).count();
  }

  Report& report_;
  clock::time_point start_;
};

inline SolverConfig effective_solver_config(const Problem& problem, const RunOptions& options) {
  SolverConfig config = problem.solver;
  if (options.tol) config.tol = *options.tol;
  if (options.max_iter) config.max_iter = *options.max_iter;
  return config;
}

inline std::uint64_t effective_seed(const Problem& problem, const RunOptions& options) {
  return options.seed.value_or(problem.sampling.seed);
}

inline int effective_pairs(const Problem& problem, const RunOptions& options) {
  return options.pairs.value_or(problem.sampling.n_pairs);
}

}  // namespace detail

/// Gauge positivity, metric axioms, injectivity sanity, and the declared
/// T-property flags — the checkable hypotheses of the main theorem.
inline HypothesisReport check_hypotheses(const Problem& problem, const RunOptions& options) {
  HypothesisReport hypotheses;
  const detail::Window w =
      detail::sampling_window(problem.space.domain(), problem.sampling.span);
  const std::uint64_t seed = detail::effective_seed(problem, options);

  try {
    const double hi = std::max(w.hi - w.lo, 1e-6);
    const auto grid = default_epsilon_grid(1e-8, hi);
    hypotheses.positivity = check_positivity(problem.gauge, grid);
    if (!hypotheses.positivity->all_pass)
      hypotheses.failures.push_back("gauge positivity fails on the sampled epsilon grid");
  } catch (const std::exception& e) {
    hypotheses.stage_errors.push_back(std::string("gauge positivity: ") + e.what());
  }

  try {
    hypotheses.axioms =
        check_metric_axioms(problem.space, options.axiom_points, seed, problem.sampling.span);
    if (!hypotheses.axioms->pass())
      hypotheses.failures.push_back("metric axiom violation (" +
                                    hypotheses.axioms->violation->axiom + ")");
  } catch (const std::exception& e) {
    hypotheses.stage_errors.push_back(std::string("metric axioms: ") + e.what());
  }

  try {
    hypotheses.injectivity = sanity_check_injectivity(
        problem.T, problem.space, options.injectivity_points, seed, problem.sampling.span);
    if (!hypotheses.injectivity->pass)
      hypotheses.failures.push_back("T is not injective on sampled evidence");
  } catch (const std::exception& e) {
    hypotheses.stage_errors.push_back(std::string("injectivity: ") + e.what());
  }

  const MapProperties& props = problem.t_properties;
  hypotheses.declared_ok =
      props.one_to_one && props.continuous && props.subsequentially_convergent;
  if (!hypotheses.declared_ok)
    hypotheses.failures.push_back(
        "declared T properties do not meet the theorem hypotheses");
  return hypotheses;
}

inline Report run_certify(const Problem& problem, const RunOptions& options = {}) {
  Report report;
  report.command = "certify";
  report.problem = problem;
  report.seed_used = detail::effective_seed(problem, options);
  report.pairs_used = detail::effective_pairs(problem, options);

  detail::StageClock clock(report);
  clock.stage("certify", [&] {
    report.certificate =
        certify(problem, static_cast<std::size_t>(report.pairs_used), report.seed_used);
  });
  clock.finish();

  const Certificate& cert = *report.certificate;
  report.conclusion_label = std::string(to_string(cert.verdict)) + " (sampled evidence)";
  if (cert.verdict == CertVerdict::Inconclusive && cert.pairs_checked == 0)
    report.execution_failure = true;
  return report;
}

inline Report run_falsify(const Problem& problem, const RunOptions& options = {}) {
  Report report;
  report.command = "falsify";
  report.problem = problem;
  report.seed_used = detail::effective_seed(problem, options);
  const std::size_t budget =
      options.pairs ? static_cast<std::size_t>(*options.pairs) : options.falsify_budget;
  report.pairs_used = static_cast<int>(budget);

  detail::StageClock clock(report);
  clock.stage("falsify", [&] {
    report.falsification = falsify(problem, budget, report.seed_used, options.falsify_restarts);
  });
  clock.finish();

  const FalsifyOutcome& outcome = *report.falsification;
  report.conclusion_label = outcome.found ? "violation witness found" : "not-found (best pair reported)";
  if (outcome.evaluations > 0 && outcome.errors_skipped == outcome.evaluations)
    report.execution_failure = true;
  return report;
}

namespace detail {

inline void solve_and_diagnose(Report& report, const Problem& problem,
                               const SolverConfig& config, StageClock& clock) {
  clock.stage("solve", [&] {
    SolveRun run = iterate(problem, config);
    report.solve = run.result;
    report.trace = std::move(run.trace);
  });

  clock.stage("diagnostics", [&] {
    report.diagnostics.step1 = check_step1(*report.trace, problem, config);
    report.diagnostics.step23 = check_step2_step3(*report.trace, config);
    report.diagnostics.posthoc = posthoc_convergence_check(*report.trace, problem, config);
  });

  if (report.solve->status == SolveStatus::Converged && report.solve->fixed_point) {
    clock.stage("uniqueness", [&] {
      report.diagnostics.uniqueness =
          check_uniqueness(problem, config, *report.solve->fixed_point);
    });
  }
}

}  // namespace detail

inline Report run_solve(const Problem& problem, const RunOptions& options = {}) {
  Report report;
  report.command = "solve";
  report.problem = problem;
  report.seed_used = detail::effective_seed(problem, options);
  const SolverConfig config = detail::effective_solver_config(problem, options);

  detail::StageClock clock(report);
  detail::solve_and_diagnose(report, problem, config, clock);
  clock.finish();

  const SolveResult& solve = *report.solve;
  report.conclusion_label = std::string(to_string(solve.status));
  if (solve.status == SolveStatus::EvaluationError) report.execution_failure = true;
  return report;
}

inline Report run_full(const Problem& problem, const RunOptions& options = {}) {
  Report report;
  report.command = "full";
  report.problem = problem;
  report.seed_used = detail::effective_seed(problem, options);
  report.pairs_used = detail::effective_pairs(problem, options);
  const SolverConfig config = detail::effective_solver_config(problem, options);

  detail::StageClock clock(report);
  clock.stage("hypotheses", [&] { report.hypotheses = check_hypotheses(problem, options); });

  clock.stage("certify", [&] {
    report.certificate =
        certify(problem, static_cast<std::size_t>(report.pairs_used), report.seed_used);
  });

  detail::solve_and_diagnose(report, problem, config, clock);
  clock.finish();

  // Conclusion: every checkable hypothesis, the certificate, the solve,
  // and the proof-step diagnostics must hold for the theorem label.
  std::vector<std::string>& reasons = report.conclusion_reasons;
  for (const auto& f : report.hypotheses.failures) reasons.push_back(f);
  for (const auto& e : report.hypotheses.stage_errors) reasons.push_back(e);
  if (report.certificate->verdict != CertVerdict::CertifiedAtK)
    reasons.push_back("contractive condition not certified at k (" +
                      std::string(to_string(report.certificate->verdict)) + ")");
  if (report.solve->status != SolveStatus::Converged)
    reasons.push_back("solver did not converge (" +
                      std::string(to_string(report.solve->status)) + ")");
  if (report.diagnostics.step1 &&
      !(report.diagnostics.step1->decay_pass && report.diagnostics.step1->geometric_pass))
    reasons.push_back("step-1 diagnostics failed");
  if (report.diagnostics.step23 &&
      !(report.diagnostics.step23->bounded_pass && report.diagnostics.step23->cauchy_pass))
    reasons.push_back("step-2/3 diagnostics failed");
  if (report.diagnostics.uniqueness &&
      report.diagnostics.uniqueness->status != UniquenessStatus::Pass)
    reasons.push_back("uniqueness probes did not agree");
  if (!report.diagnostics.uniqueness && report.solve->status != SolveStatus::Converged)
    reasons.push_back("uniqueness not probed");

  report.conclusion_label =
      reasons.empty() ? "theorem applies (sampled evidence)" : "heuristic run";
  if (report.solve->status == SolveStatus::EvaluationError &&
      report.certificate->pairs_checked == 0)
    report.execution_failure = true;
  return report;
}

// ---- serialization ----

namespace detail {

using ojson = nlohmann::ordered_json;

inline ojson finite_or_null(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

inline ojson json_of(const PairEvaluation& pe) {
  ojson j;
  j["x"] = pe.x;
  j["y"] = pe.y;
  j["lhs_upper"] = pe.lhs_upper;
  j["rhs_upper"] = pe.rhs_upper;
  j["lhs_integral"] = pe.lhs_integral;
  j["rhs_integral"] = pe.rhs_integral;
  j["ratio"] = pe.ratio ? ojson(*pe.ratio) : ojson(nullptr);
  return j;
}

inline ojson json_of(const Certificate& cert) {
  ojson j;
  j["verdict"] = std::string(to_string(cert.verdict));
  j["estimated_k"] = cert.estimated_k ? ojson(*cert.estimated_k) : ojson(nullptr);
  j["witness_best"] = cert.witness_best ? json_of(*cert.witness_best) : ojson(nullptr);
  j["witness_violation"] =
      cert.witness_violation ? json_of(*cert.witness_violation) : ojson(nullptr);
  j["pairs_checked"] = cert.pairs_checked;
  j["seed"] = cert.seed;
  j["cert_tol"] = kCertTol;
  j["note"] = cert.note;
  return j;
}

inline ojson json_of(const FalsifyOutcome& outcome) {
  ojson j;
  j["found"] = outcome.found;
  j["witness"] = outcome.witness ? json_of(*outcome.witness) : ojson(nullptr);
  j["best"] = outcome.best ? json_of(*outcome.best) : ojson(nullptr);
  j["evaluations"] = outcome.evaluations;
  j["errors_skipped"] = outcome.errors_skipped;
  j["seed"] = outcome.seed;
  j["note"] = outcome.note;
  return j;
}

inline ojson json_of(const SolveResult& solve) {
  ojson j;
  j["status"] = std::string(to_string(solve.status));
  j["fixed_point"] = solve.fixed_point ? ojson(*solve.fixed_point) : ojson(nullptr);
  j["residual"] = solve.residual ? ojson(*solve.residual) : ojson(nullptr);
  j["t_limit"] = solve.t_limit ? ojson(*solve.t_limit) : ojson(nullptr);
  j["iterations"] = solve.iterations;
  j["via_subsequence"] = solve.via_subsequence;
  j["message"] = solve.message;
  return j;
}

inline ojson json_of(const OrbitTrace& trace) {
  ojson j;
  j["length"] = trace.s_orbit.size();
  j["s_orbit"] = trace.s_orbit;
  j["t_orbit"] = trace.t_orbit;
  j["step_distances"] = trace.step_distances;
  j["diameter_estimate"] = trace.diameter_estimate;
  j["cauchy_modulus"] = trace.cauchy_modulus;
  return j;
}

inline ojson json_of(const HypothesisReport& hypotheses) {
  ojson j;
  if (hypotheses.positivity) {
    ojson p;
    p["all_pass"] = hypotheses.positivity->all_pass;
    p["failures"] = hypotheses.positivity->failures;
    p["floor"] = kPositivityFloor;
    ojson entries = ojson::array();
    for (const auto& entry : hypotheses.positivity->entries) {
      ojson e;
      e["epsilon"] = entry.epsilon;
      e["integral"] = entry.integral;
      e["pass"] = entry.pass;
      entries.push_back(std::move(e));
    }
    p["entries"] = std::move(entries);
    j["gauge_positivity"] = std::move(p);
  } else {
    j["gauge_positivity"] = nullptr;
  }

  if (hypotheses.axioms) {
    ojson a;
    a["pass"] = hypotheses.axioms->pass();
    a["untested"] = hypotheses.axioms->untested;
    a["points"] = hypotheses.axioms->points;
    a["pairs"] = hypotheses.axioms->pairs;
    a["triples"] = hypotheses.axioms->triples;
    if (hypotheses.axioms->violation) {
      const auto& v = *hypotheses.axioms->violation;
      ojson vj;
      vj["axiom"] = v.axiom;
      vj["x"] = v.x;
      vj["y"] = v.y;
      if (v.has_z) vj["z"] = v.z;
      vj["lhs"] = v.lhs;
      vj["rhs"] = v.rhs;
      a["violation"] = std::move(vj);
    } else {
      a["violation"] = nullptr;
    }
    j["metric_axioms"] = std::move(a);
  } else {
    j["metric_axioms"] = nullptr;
  }

  if (hypotheses.injectivity) {
    ojson i;
    i["pass"] = hypotheses.injectivity->pass;
    i["points_checked"] = hypotheses.injectivity->points_checked;
    i["eval_failures"] = hypotheses.injectivity->eval_failures;
    if (hypotheses.injectivity->witness) {
      i["witness"] = {hypotheses.injectivity->witness->first,
                      hypotheses.injectivity->witness->second};
      i["witness_t_gap"] = hypotheses.injectivity->witness_t_gap;
      i["witness_distance"] = hypotheses.injectivity->witness_distance;
    } else {
      i["witness"] = nullptr;
    }
    i["note"] = hypotheses.injectivity->note;
    j["injectivity"] = std::move(i);
  } else {
    j["injectivity"] = nullptr;
  }

  j["declared_properties_ok"] = hypotheses.declared_ok;
  j["failures"] = hypotheses.failures;
  j["stage_errors"] = hypotheses.stage_errors;
  j["interpretation"] = kMaximalTermInterpretation;
  return j;
}

inline ojson json_of(const Diagnostics& diagnostics) {
  ojson j;
  if (diagnostics.step1) {
    const auto& s = *diagnostics.step1;
    ojson v;
    v["decay_pass"] = s.decay_pass;
    v["geometric_pass"] = s.geometric_pass;
    v["first_violation"] = s.first_violation ? ojson(*s.first_violation) : ojson(nullptr);
    v["k"] = s.k;
    v["steps"] = s.steps;
    v["note"] = s.note;
    j["step1"] = std::move(v);
  } else {
    j["step1"] = nullptr;
  }
  if (diagnostics.step23) {
    const auto& s = *diagnostics.step23;
    ojson v;
    v["bounded_pass"] = s.bounded_pass;
    v["cauchy_pass"] = s.cauchy_pass;
    v["diameter"] = finite_or_null(s.diameter);
    v["tail_growth"] = finite_or_null(s.tail_growth);
    v["final_cauchy"] = finite_or_null(s.final_cauchy);
    v["note"] = s.note;
    j["step2_step3"] = std::move(v);
  } else {
    j["step2_step3"] = nullptr;
  }
  if (diagnostics.uniqueness) {
    const auto& u = *diagnostics.uniqueness;
    ojson v;
    v["status"] = std::string(to_string(u.status));
    v["starts"] = u.starts;
    v["results"] = u.results;
    v["max_spread"] = finite_or_null(u.max_spread);
    v["note"] = u.note;
    j["uniqueness"] = std::move(v);
  } else {
    j["uniqueness"] = nullptr;
  }
  if (diagnostics.posthoc) {
    const auto& p = *diagnostics.posthoc;
    ojson v;
    v["s_orbit_converged"] = p.s_orbit_converged;
    v["subsequence_extracted"] = p.subsequence_extracted;
    v["accumulation_point"] =
        p.accumulation_point ? ojson(*p.accumulation_point) : ojson(nullptr);
    v["note"] = p.note;
    j["posthoc"] = std::move(v);
  } else {
    j["posthoc"] = nullptr;
  }
  return j;
}

inline ojson json_of_problem(const Problem& problem) {
  ojson j;
  j["path"] = problem.source_path;
  const Domain& d = problem.space.domain();
  ojson dom;
  dom["lower"] = d.lower;
  dom["upper"] = d.bounded() ? ojson(d.upper) : ojson(nullptr);
  dom["lower_closed"] = d.lower_closed;
  dom["upper_closed"] = d.upper_closed;
  ojson space;
  space["domain"] = std::move(dom);
  space["metric"] = problem.space.euclidean()
                        ? std::string("euclidean")
                        : problem.space.custom_metric()->source();
  j["space"] = std::move(space);
  j["S"] = problem.S.source();
  j["T"] = problem.T.source();
  ojson props;
  props["one_to_one"] = problem.t_properties.one_to_one;
  props["continuous"] = problem.t_properties.continuous;
  props["sequentially_convergent"] = problem.t_properties.sequentially_convergent;
  props["subsequentially_convergent"] = problem.t_properties.subsequentially_convergent;
  j["T_properties"] = std::move(props);
  ojson gauge;
  gauge["phi"] = problem.gauge.phi().source();
  gauge["breakpoints"] = problem.gauge.breakpoints();
  gauge["quad_tol"] = problem.gauge.quad_tol();
  j["gauge"] = std::move(gauge);
  ojson preset;
  preset["kind"] = std::string(to_string(problem.preset.kind()));
  preset["k"] = problem.preset.k();
  j["preset"] = std::move(preset);
  ojson sampling;
  sampling["n_pairs"] = problem.sampling.n_pairs;
  sampling["seed"] = problem.sampling.seed;
  sampling["span"] = problem.sampling.span;
  j["sampling"] = std::move(sampling);
  ojson solver;
  solver["x0"] = problem.solver.x0 ? ojson(*problem.solver.x0) : ojson(nullptr);
  solver["tol"] = problem.solver.tol;
  solver["max_iter"] = problem.solver.max_iter;
  solver["stability_window"] = problem.solver.stability_window;
  solver["residual_tol"] = problem.solver.residual_tol;
  solver["uniqueness_probes"] = problem.solver.uniqueness_probes;
  solver["probes"] = problem.solver.probes;
  j["solver"] = std::move(solver);
  return j;
}

}  // namespace detail

inline nlohmann::ordered_json to_json(const Report& report) {
  using detail::ojson;
  ojson j;
  ojson tool;
  tool["name"] = "fixcert";
  tool["version"] = report.version;
  j["tool"] = std::move(tool);
  j["command"] = report.command;
  j["problem"] = detail::json_of_problem(report.problem);
  j["seed"] = report.seed_used;
  j["pairs"] = report.pairs_used;
  j["hypotheses"] = report.command == "full" ? detail::json_of(report.hypotheses) : ojson(nullptr);
  j["certificate"] = report.certificate ? detail::json_of(*report.certificate) : ojson(nullptr);
  j["falsification"] =
      report.falsification ? detail::json_of(*report.falsification) : ojson(nullptr);
  j["solve"] = report.solve ? detail::json_of(*report.solve) : ojson(nullptr);
  j["orbit"] = report.trace ? detail::json_of(*report.trace) : ojson(nullptr);
  j["diagnostics"] = detail::json_of(report.diagnostics);
  ojson conclusion;
  conclusion["label"] = report.conclusion_label;
  conclusion["reasons"] = report.conclusion_reasons;
  j["conclusion"] = std::move(conclusion);
  j["execution_failure"] = report.execution_failure;
  ojson timing;
  timing["total_seconds"] = report.total_seconds;
  ojson stages;
  for (const auto& [name, secs] : report.stage_seconds) stages[name] = secs;
  timing["stages"] = std::move(stages);
  j["timing"] = std::move(timing);
  return j;
}

namespace detail {

inline std::string short_num(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

inline const char* pf(bool pass) { return pass ? "PASS" : "FAIL"; }

inline void describe_pair(std::ostringstream& os, const char* label, const PairEvaluation& pe) {
  os << "  " << label << ": (x, y) = (" << short_num(pe.x) << ", " << short_num(pe.y) << ")\n"
     << "    lhs upper " << short_num(pe.lhs_upper) << ", rhs upper " << short_num(pe.rhs_upper)
     << ", lhs integral " << short_num(pe.lhs_integral) << ", rhs integral "
     << short_num(pe.rhs_integral) << ", ratio "
     << (pe.ratio ? short_num(*pe.ratio) : std::string("undefined")) << "\n";
}

}  // namespace detail

inline std::string to_text(const Report& report) {
  using detail::pf;
  using detail::short_num;
  std::ostringstream os;
  const Problem& p = report.problem;
  os << "fixcert " << report.version << " — " << report.command
     << (p.source_path.empty() ? "" : " on " + p.source_path) << "\n";
  const Domain& d = p.space.domain();
  os << "  space: " << (d.lower_closed ? '[' : '(') << short_num(d.lower) << ", "
     << (d.bounded() ? short_num(d.upper) : "inf")
     << (d.bounded() && d.upper_closed ? ']' : ')') << " with "
     << (p.space.euclidean() ? "euclidean metric" : "metric " + p.space.custom_metric()->source())
     << "\n";
  os << "  S = " << p.S.source() << "   T = " << p.T.source() << "\n";
  os << "  preset " << to_string(p.preset.kind()) << ", k = " << short_num(p.preset.k())
     << ", gauge phi = " << p.gauge.phi().source() << "\n";

  if (report.command == "full") {
    os << "hypotheses\n";
    if (report.hypotheses.positivity)
      os << "  gauge positivity (" << report.hypotheses.positivity->entries.size()
         << " sampled eps): " << pf(report.hypotheses.positivity->all_pass) << "\n";
    if (report.hypotheses.axioms) {
      const auto& a = *report.hypotheses.axioms;
      os << "  metric axioms (" << a.points << " points, " << a.pairs << " pairs, " << a.triples
         << " triples): " << (a.untested ? "UNTESTED" : pf(a.pass()));
      if (a.violation)
        os << "  [" << a.violation->axiom << " violated at x=" << short_num(a.violation->x)
           << " y=" << short_num(a.violation->y)
           << (a.violation->has_z ? " z=" + short_num(a.violation->z) : "") << "]";
      os << "\n";
    }
    if (report.hypotheses.injectivity) {
      const auto& i = *report.hypotheses.injectivity;
      os << "  injectivity of T (" << i.points_checked << " points): " << pf(i.pass);
      if (i.witness)
        os << "  [witness (" << short_num(i.witness->first) << ", "
           << short_num(i.witness->second) << ")]";
      os << "\n";
    }
    os << "  declared T properties: " << pf(report.hypotheses.declared_ok) << "\n";
    for (const auto& e : report.hypotheses.stage_errors) os << "  stage error: " << e << "\n";
    os << "  note: " << kMaximalTermInterpretation << "\n";
  }

  if (report.certificate) {
    const Certificate& c = *report.certificate;
    os << "certificate: " << to_string(c.verdict) << " (sampled evidence, " << c.pairs_checked
       << " pairs, seed " << c.seed << ")\n";
    os << "  estimated k = " << (c.estimated_k ? short_num(*c.estimated_k) : "undefined") << "\n";
    if (c.witness_best) detail::describe_pair(os, "extremal pair", *c.witness_best);
    if (c.witness_violation) detail::describe_pair(os, "violation", *c.witness_violation);
    if (!c.note.empty()) os << "  note: " << c.note << "\n";
  }

  if (report.falsification) {
    const FalsifyOutcome& f = *report.falsification;
    os << "falsify: " << (f.found ? "violation witness found" : "not-found") << " ("
       << f.evaluations << " evaluations, " << f.errors_skipped << " skipped, seed " << f.seed
       << ")\n";
    if (f.witness) detail::describe_pair(os, "witness", *f.witness);
    else if (f.best) detail::describe_pair(os, "best pair", *f.best);
    if (!f.note.empty()) os << "  note: " << f.note << "\n";
  }

  if (report.solve) {
    const SolveResult& s = *report.solve;
    os << "solve: " << to_string(s.status) << " after " << s.iterations << " iterations";
    if (s.via_subsequence) os << " (via accumulation point)";
    os << "\n";
    if (s.fixed_point)
      os << "  fixed point b = " << short_num(*s.fixed_point)
         << "   residual d(S b, b) = " << short_num(s.residual.value_or(0.0)) << "\n";
    if (s.t_limit) os << "  t-limit a = T(b) = " << short_num(*s.t_limit) << "\n";
    if (!s.message.empty()) os << "  " << s.message << "\n";
    if (report.trace && !report.trace->s_orbit.empty()) {
      const auto& orbit = report.trace->s_orbit;
      os << "  orbit S^n x: ";
      const std::size_t head = std::min<std::size_t>(6, orbit.size());
      for (std::size_t i = 0; i < head; ++i) os << (i ? " -> " : "") << short_num(orbit[i]);
      if (orbit.size() > head) os << " -> ... -> " << short_num(orbit.back());
      os << "  (" << orbit.size() << " points)\n";
    }
  }

  if (report.diagnostics.step1) {
    const auto& s1 = *report.diagnostics.step1;
    os << "diagnostics\n";
    os << "  step 1 decay: " << pf(s1.decay_pass) << "   geometric envelope at k="
       << short_num(s1.k) << ": " << pf(s1.geometric_pass);
    if (s1.first_violation) os << "  [first violation at n=" << *s1.first_violation << "]";
    os << "\n";
    if (report.diagnostics.step23) {
      const auto& s23 = *report.diagnostics.step23;
      os << "  step 2 bounded: " << pf(s23.bounded_pass) << " (diameter "
         << short_num(s23.diameter) << ")   step 3 cauchy: " << pf(s23.cauchy_pass)
         << " (final modulus " << short_num(s23.final_cauchy) << ")\n";
    }
    if (report.diagnostics.uniqueness) {
      const auto& u = *report.diagnostics.uniqueness;
      os << "  uniqueness (" << u.starts.size() << " probes): " << to_string(u.status)
         << "  max spread " << short_num(u.max_spread) << "\n";
      if (!u.note.empty()) os << "    " << u.note << "\n";
    }
    if (report.diagnostics.posthoc)
      os << "  posthoc: " << report.diagnostics.posthoc->note << "\n";
  }

  os << "conclusion: " << report.conclusion_label << "\n";
  for (const auto& r : report.conclusion_reasons) os << "  - " << r << "\n";
  return os.str();
}

}  // namespace fixcert

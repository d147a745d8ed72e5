#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "besc/chain.hpp"
#include "besc/ctl.hpp"
#include "besc/dsl.hpp"
#include "besc/encode.hpp"
#include "besc/engine.hpp"
#include "besc/sim.hpp"
#include "json.hpp"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitInconsistent = 1;
constexpr int kExitUnstable = 2;
constexpr int kExitUsage = 3;

struct RunConfig {
  std::string input;
  std::string mode = "relaxed";    // relaxed | strict
  std::string semantics = "sync";  // sync | interleave
  std::string engine = "direct";   // direct | ctl | oracle
  bool trace = false;
  std::string format = "human";  // human | json
  size_t bound = 2'000'000;
};

double ms_since(std::chrono::steady_clock::time_point t0) {
  auto dt = std::chrono::steady_clock::now() - t0;
  return std::chrono::duration<double, std::milli>(dt).count();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Counts print as exact integers while they fit, scientific beyond.
std::string format_count(double count) {
  if (count < 9.007199254740992e15 && count == std::floor(count)) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.0f", count);
    return buf;
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6e", count);
  return buf;
}

const char* stability_name(besc::engine::Stability s) {
  switch (s) {
    case besc::engine::Stability::Stable:
      return "stable";
    case besc::engine::Stability::Unstable:
      return "unstable";
    default:
      return "not_applicable";
  }
}

json trace_json(const besc::engine::Trace& t, const besc::dsl::Bes& bes) {
  json j;
  j["kind"] = t.kind == besc::engine::Trace::Kind::Conflict ? "conflict"
              : t.kind == besc::engine::Trace::Kind::Flip  ? "flip"
                                                           : "loop";
  json states = json::array();
  for (const auto& s : t.states) states.push_back(s.to_string());
  j["states"] = std::move(states);
  if (t.kind != besc::engine::Trace::Kind::Loop) {
    if (t.variable >= 0)
      j["variable"] = bes.decls[static_cast<size_t>(t.variable)].name;
    j["rules"] = t.rules;
  } else {
    j["stem_len"] = t.stem_len;
    j["loop_len"] = t.loop_len;
  }
  return j;
}

void print_trace_human(const besc::engine::Trace& t,
                       const besc::dsl::Bes& bes) {
  if (t.kind != besc::engine::Trace::Kind::Loop) {
    const char* what = t.kind == besc::engine::Trace::Kind::Conflict
                           ? "conflicting updates of '"
                           : "value flip of '";
    std::cout << "trace (" << what
              << (t.variable >= 0
                      ? bes.decls[static_cast<size_t>(t.variable)].name
                      : "?")
              << "', rules";
    for (size_t r : t.rules) std::cout << ' ' << r;
    std::cout << "):\n";
    for (const auto& s : t.states) std::cout << "  " << s.to_string() << '\n';
  } else {
    std::cout << "trace (loop of length " << t.loop_len << " after "
              << t.stem_len << " steps):\n";
    for (size_t i = 0; i < t.states.size(); ++i) {
      std::cout << (i == t.stem_len ? "  > " : "    ")
                << t.states[i].to_string() << '\n';
    }
  }
}

int report_exit(const besc::engine::CheckReport& r) {
  if (!r.consistent) return kExitInconsistent;
  if (r.strict && !(r.strict->category2_ok && r.strict->category3_ok))
    return kExitInconsistent;
  if (r.stable == besc::engine::Stability::Unstable) return kExitUnstable;
  return kExitOk;
}

besc::engine::CheckReport run_ctl_engine(const besc::dsl::Bes& bes,
                                         const RunConfig& cfg) {
  using clock = std::chrono::steady_clock;
  besc::engine::CheckReport report;
  auto t_total = clock::now();

  auto t0 = clock::now();
  auto ts = besc::encode::build_ts(bes);
  report.timings.build_ms = ms_since(t0);

  auto [frontiers, hit] = besc::engine::reach_frontiers(ts, std::nullopt);
  report.reachable_count = ts.count_states(frontiers.reach);
  report.frontier_depth = frontiers.depth();

  t0 = clock::now();
  report.consistent =
      besc::ctl::check_within(ts, besc::ctl::consistency_formula(ts),
                              frontiers.reach);
  report.timings.consistency_ms = ms_since(t0);

  if (report.consistent) {
    if (cfg.mode == "strict") {
      t0 = clock::now();
      bool ok = besc::ctl::check_within(ts, besc::ctl::strict_formula(ts),
                                        frontiers.reach);
      report.timings.strict_ms = ms_since(t0);
      besc::engine::StrictResult sr;
      // The formula bundles both categories; split them for the report.
      if (!ok) {
        auto detail = besc::engine::check_strict(ts, frontiers);
        sr = detail;
      }
      report.strict = sr;
    }
    t0 = clock::now();
    bool stable = besc::ctl::check_within(
        ts, besc::ctl::stability_formula(ts), frontiers.reach);
    report.timings.stability_ms = ms_since(t0);
    report.stable = stable ? besc::engine::Stability::Stable
                           : besc::engine::Stability::Unstable;
  } else {
    report.stable = besc::engine::Stability::NotApplicable;
  }
  report.timings.total_ms = ms_since(t_total);
  return report;
}

besc::engine::CheckReport run_oracle_engine(const besc::dsl::Bes& bes,
                                            const RunConfig& cfg) {
  using clock = std::chrono::steady_clock;
  besc::engine::CheckReport report;
  auto t_total = clock::now();

  auto t0 = clock::now();
  auto graph = besc::sim::explicit_reach(bes, cfg.bound);
  report.timings.build_ms = ms_since(t0);

  report.reachable_count = static_cast<double>(graph.states.size());
  report.frontier_depth = graph.layers.empty() ? 0 : graph.layers.size() - 1;

  t0 = clock::now();
  auto verdicts = besc::sim::oracle_check(bes, graph);
  report.timings.consistency_ms = ms_since(t0);

  report.consistent = verdicts.consistent;
  if (verdicts.consistent) {
    report.stable = *verdicts.stable ? besc::engine::Stability::Stable
                                     : besc::engine::Stability::Unstable;
    if (cfg.mode == "strict") {
      besc::engine::StrictResult sr;
      for (size_t v = 0; v < bes.decls.size(); ++v) {
        bool known = bes.decls[v].kind == besc::dsl::VarKind::Known;
        bool flips = false;
        for (uint32_t id = 0; id < graph.states.size() && !flips; ++id) {
          besc::dsl::Tri from = graph.states[id].values[v];
          if (from == besc::dsl::Tri::Unknown) continue;
          for (uint32_t t : graph.successors[id])
            flips = flips || (graph.states[t].values[v] != from);
        }
        if (!flips) continue;
        if (known && sr.category2_ok) {
          sr.category2_ok = false;
          sr.cat2_variable = static_cast<int>(v);
        } else if (!known && sr.category3_ok) {
          sr.category3_ok = false;
          sr.cat3_variable = static_cast<int>(v);
        }
      }
      report.strict = sr;
    }
  } else {
    report.stable = besc::engine::Stability::NotApplicable;
    if (verdicts.first_conflict) {
      report.conflict_variable = verdicts.first_conflict->variable;
      if (cfg.trace) {
        // Shortest run to the conflict state, rebuilt over BFS layers.
        std::vector<uint32_t> layer_of(graph.states.size(), 0);
        for (size_t l = 0; l < graph.layers.size(); ++l) {
          for (uint32_t id : graph.layers[l])
            layer_of[id] = static_cast<uint32_t>(l);
        }
        uint32_t target = graph.index.at(verdicts.first_conflict->state);
        std::vector<std::vector<uint32_t>> preds(graph.states.size());
        for (uint32_t id = 0; id < graph.states.size(); ++id) {
          for (uint32_t t : graph.successors[id]) preds[t].push_back(id);
        }
        besc::engine::Trace trace;
        trace.kind = besc::engine::Trace::Kind::Conflict;
        trace.variable = verdicts.first_conflict->variable;
        trace.rules = verdicts.first_conflict->rules;
        std::vector<uint32_t> rev{target};
        while (layer_of[rev.back()] > 0) {
          uint32_t want = layer_of[rev.back()] - 1;
          uint32_t best = UINT32_MAX;
          for (uint32_t p : preds[rev.back()]) {
            if (layer_of[p] != want) continue;
            if (best == UINT32_MAX || graph.states[p] < graph.states[best])
              best = p;
          }
          rev.push_back(best);
        }
        for (auto it = rev.rbegin(); it != rev.rend(); ++it)
          trace.states.push_back(graph.states[*it]);
        report.traces.push_back(std::move(trace));
      }
    }
  }
  report.timings.total_ms = ms_since(t_total);
  return report;
}

int cmd_check_sync(const besc::dsl::Bes& bes, const RunConfig& cfg,
                   double parse_ms) {
  besc::engine::CheckReport report;
  if (cfg.engine == "direct") {
    besc::engine::CheckOptions options;
    options.strict = cfg.mode == "strict";
    options.want_traces = cfg.trace;
    report = besc::engine::full_check(bes, options);
  } else if (cfg.engine == "ctl") {
    report = run_ctl_engine(bes, cfg);
  } else {
    report = run_oracle_engine(bes, cfg);
  }

  if (cfg.format == "json") {
    json j;
    j["file"] = cfg.input;
    j["mode"] = cfg.mode;
    j["semantics"] = cfg.semantics;
    j["engine"] = cfg.engine;
    j["verdicts"]["consistent"] = report.consistent;
    j["verdicts"]["stable"] = stability_name(report.stable);
    if (report.strict) {
      j["verdicts"]["category2_ok"] = report.strict->category2_ok;
      j["verdicts"]["category3_ok"] = report.strict->category3_ok;
    }
    if (report.conflict_variable)
      j["conflict"]["variable"] =
          bes.decls[static_cast<size_t>(*report.conflict_variable)].name;
    if (report.conflict_layer) j["conflict"]["layer"] = *report.conflict_layer;
    j["reachable_count"] = format_count(report.reachable_count);
    j["frontier_depth"] = report.frontier_depth;
    json traces = json::array();
    for (const auto& t : report.traces) traces.push_back(trace_json(t, bes));
    j["traces"] = std::move(traces);
    j["timings_ms"]["parse"] = parse_ms;
    j["timings_ms"]["build"] = report.timings.build_ms;
    j["timings_ms"]["consistency"] = report.timings.consistency_ms;
    j["timings_ms"]["strict"] = report.timings.strict_ms;
    j["timings_ms"]["stability"] = report.timings.stability_ms;
    j["timings_ms"]["traces"] = report.timings.traces_ms;
    j["timings_ms"]["total"] = report.timings.total_ms;
    std::cout << j.dump(2) << '\n';
  } else {
    std::cout << "file:            " << cfg.input << '\n';
    std::cout << "mode:            " << cfg.mode << '\n';
    std::cout << "engine:          " << cfg.engine << '\n';
    std::cout << "consistent:      " << (report.consistent ? "yes" : "no");
    if (report.conflict_variable)
      std::cout << "  (conflicting updates of '"
                << bes.decls[static_cast<size_t>(*report.conflict_variable)]
                       .name
                << "' at depth " << *report.conflict_layer << ")";
    std::cout << '\n';
    if (report.strict) {
      std::cout << "known flips:     "
                << (report.strict->category2_ok ? "none" : "present") << '\n';
      std::cout << "unknown flips:   "
                << (report.strict->category3_ok ? "none" : "present") << '\n';
    }
    std::cout << "stable:          " << stability_name(report.stable) << '\n';
    std::cout << "reachable:       " << format_count(report.reachable_count)
              << '\n';
    std::cout << "frontier depth:  " << report.frontier_depth << '\n';
    for (const auto& t : report.traces) print_trace_human(t, bes);
    std::printf("timings: parse %.3f ms, build %.3f ms, consistency %.3f ms, "
                "stability %.3f ms, traces %.3f ms, total %.3f ms\n",
                parse_ms, report.timings.build_ms,
                report.timings.consistency_ms, report.timings.stability_ms,
                report.timings.traces_ms, report.timings.total_ms);
  }
  return report_exit(report);
}

int cmd_check_interleave(const besc::dsl::Bes& bes, const RunConfig& cfg,
                         double parse_ms) {
  auto t0 = std::chrono::steady_clock::now();
  auto result = besc::sim::fair_stability_check(
      bes, besc::sim::Granularity::Rule, cfg.bound);
  double check_ms = ms_since(t0);

  auto cycle_strings = [](const std::vector<besc::dsl::TriState>& cycle) {
    json arr = json::array();
    for (const auto& s : cycle) arr.push_back(s.to_string());
    return arr;
  };

  if (cfg.format == "json") {
    json j;
    j["file"] = cfg.input;
    j["mode"] = cfg.mode;
    j["semantics"] = cfg.semantics;
    j["engine"] = "oracle";
    j["verdicts"]["consistent"] = true;  // one rule per step cannot conflict
    j["verdicts"]["stable_under_fairness"] = result.stable;
    json rules = json::array();
    for (const auto& c : result.fairness) rules.push_back(c.rule);
    j["fairness"]["rules"] = std::move(rules);
    j["fairness"]["iterations"] = result.iterations;
    if (!result.unconstrained_cycle.empty())
      j["fairness"]["unconstrained_cycle"] =
          cycle_strings(result.unconstrained_cycle);
    if (!result.witness_cycle.empty())
      j["fairness"]["witness_cycle"] = cycle_strings(result.witness_cycle);
    j["timings_ms"]["parse"] = parse_ms;
    j["timings_ms"]["check"] = check_ms;
    std::cout << j.dump(2) << '\n';
  } else {
    std::cout << "file:            " << cfg.input << '\n';
    std::cout << "semantics:       interleave (one rule per step)\n";
    std::cout << "consistent:      yes\n";
    if (!result.unconstrained_cycle.empty()) {
      std::cout << "unstable cycle without fairness:\n";
      for (const auto& s : result.unconstrained_cycle)
        std::cout << "  " << s.to_string() << '\n';
    }
    std::cout << "stable under strong fairness: "
              << (result.stable ? "yes" : "no") << '\n';
    if (!result.fairness.empty()) {
      std::cout << "fairness constraints on rules:";
      for (const auto& c : result.fairness) std::cout << ' ' << c.rule;
      std::cout << '\n';
    }
    if (!result.witness_cycle.empty()) {
      std::cout << "fair unstable cycle:\n";
      for (const auto& s : result.witness_cycle)
        std::cout << "  " << s.to_string() << '\n';
    }
    std::printf("timings: parse %.3f ms, check %.3f ms\n", parse_ms, check_ms);
  }
  return result.stable ? kExitOk : kExitUnstable;
}

int cmd_check(const RunConfig& cfg) {
  auto t0 = std::chrono::steady_clock::now();
  besc::dsl::Bes bes = besc::dsl::parse_bes(read_file(cfg.input));
  double parse_ms = ms_since(t0);
  if (cfg.semantics == "interleave")
    return cmd_check_interleave(bes, cfg, parse_ms);
  return cmd_check_sync(bes, cfg, parse_ms);
}

int cmd_ctl(const std::string& path, const std::string& formula_text,
            const std::string& format) {
  besc::dsl::Bes bes = besc::dsl::parse_bes(read_file(path));
  auto ts = besc::encode::build_ts(bes);
  besc::ctl::CtlFormula f = besc::ctl::parse_ctl(ts, formula_text);
  bool holds = besc::ctl::check(ts, f);
  if (format == "json") {
    json j;
    j["file"] = path;
    j["formula"] = formula_text;
    j["holds"] = holds;
    std::cout << j.dump(2) << '\n';
  } else {
    std::cout << (holds ? "holds" : "fails")
              << " over all initial states\n";
  }
  return holds ? kExitOk : kExitInconsistent;
}

struct BenchRow {
  unsigned k, vars, bits;
  double states;
  bool consistent, stable;
  double ctl_cons_ms, ctl_stab_ms, direct_cons_ms, direct_stab_ms;
};

int cmd_bench(unsigned m, unsigned k_max, const std::string& format) {
  using clock = std::chrono::steady_clock;
  std::vector<BenchRow> rows;
  for (unsigned k = 1; k <= k_max; ++k) {
    besc::dsl::Bes bes =
        besc::dsl::parse_bes(besc::chain::gen_chain(m, k));
    auto ts = besc::encode::build_ts(bes);
    auto [frontiers, hit] = besc::engine::reach_frontiers(ts, std::nullopt);

    BenchRow row;
    row.k = k;
    row.vars = static_cast<unsigned>(bes.decls.size());
    row.bits = ts.num_state_bits;
    row.states = ts.count_states(frontiers.reach);

    auto t0 = clock::now();
    bool direct_consistent = (frontiers.reach & ts.conflict_any).is_false();
    row.direct_cons_ms = ms_since(t0);

    t0 = clock::now();
    auto stab = besc::engine::check_stability(ts, frontiers);
    row.direct_stab_ms = ms_since(t0);

    t0 = clock::now();
    bool ctl_consistent = besc::ctl::check_within(
        ts, besc::ctl::consistency_formula(ts), frontiers.reach);
    row.ctl_cons_ms = ms_since(t0);

    t0 = clock::now();
    bool ctl_stable = besc::ctl::check_within(
        ts, besc::ctl::stability_formula(ts), frontiers.reach);
    row.ctl_stab_ms = ms_since(t0);

    row.consistent = direct_consistent && ctl_consistent;
    row.stable =
        ctl_stable || stab.verdict == besc::engine::Stability::Stable;
    rows.push_back(row);
  }

  if (format == "json") {
    json arr = json::array();
    for (const auto& r : rows) {
      json j;
      j["k"] = r.k;
      j["variables"] = r.vars;
      j["bdd_variables"] = r.bits;
      j["states"] = format_count(r.states);
      j["consistent"] = r.consistent;
      j["stable"] = r.stable;
      j["ctl_consistency_ms"] = r.ctl_cons_ms;
      j["ctl_stability_ms"] = r.ctl_stab_ms;
      j["direct_consistency_ms"] = r.direct_cons_ms;
      j["direct_stability_ms"] = r.direct_stab_ms;
      arr.push_back(std::move(j));
    }
    std::cout << arr.dump(2) << '\n';
  } else {
    std::printf("%-10s %-14s %-12s %-12s %-12s %-12s\n", "vars(bits)",
                "states", "ctl cons", "ctl stab", "direct cons",
                "direct stab");
    for (const auto& r : rows) {
      char label[32];
      std::snprintf(label, sizeof(label), "%u (%u)", r.vars, r.bits);
      std::printf("%-10s %-14s %-12.3f %-12.3f %-12.3f %-12.3f\n", label,
                  format_count(r.states).c_str(), r.ctl_cons_ms,
                  r.ctl_stab_ms, r.direct_cons_ms, r.direct_stab_ms);
    }
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"consistency and stability checker for rule evolution systems"};
  app.require_subcommand(1);

  RunConfig cfg;
  auto* check = app.add_subcommand("check", "check a system");
  check->add_option("file", cfg.input, "input model")->required();
  check->add_option("--mode", cfg.mode, "relaxed | strict")
      ->check(CLI::IsMember({"relaxed", "strict"}));
  auto* semantics_opt =
      check->add_option("--semantics", cfg.semantics, "sync | interleave")
          ->check(CLI::IsMember({"sync", "interleave"}));
  auto* engine_opt =
      check->add_option("--engine", cfg.engine, "direct | ctl | oracle")
          ->check(CLI::IsMember({"direct", "ctl", "oracle"}));
  check->add_flag("--trace", cfg.trace, "emit counterexample traces");
  check->add_option("--format", cfg.format, "human | json")
      ->check(CLI::IsMember({"human", "json"}));
  check->add_option("--bound", cfg.bound, "explicit-state bound");

  std::string ctl_file, ctl_formula, ctl_format = "human";
  auto* ctl = app.add_subcommand("ctl", "evaluate a CTL formula");
  ctl->add_option("file", ctl_file, "input model")->required();
  ctl->add_option("formula", ctl_formula, "CTL formula")->required();
  ctl->add_option("--format", ctl_format, "human | json")
      ->check(CLI::IsMember({"human", "json"}));

  unsigned gen_m = 32, gen_k = 1;
  auto* gen = app.add_subcommand("gen-chain", "emit a ring benchmark model");
  gen->add_option("--m", gen_m, "ring length")->required();
  gen->add_option("--k", gen_k, "number of replica rings")->required();

  unsigned bench_m = 32, bench_kmax = 5;
  std::string bench_format = "human";
  auto* bench =
      app.add_subcommand("bench", "direct vs CTL-formula timing comparison");
  bench->add_option("--m", bench_m, "ring length (default 32)");
  bench->add_option("--k-max", bench_kmax, "largest replica count");
  bench->add_option("--format", bench_format, "human | json")
      ->check(CLI::IsMember({"human", "json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (check->parsed()) {
      if (cfg.semantics == "interleave") {
        if (cfg.mode == "strict") {
          std::cerr << "error: strict mode applies to sync semantics only\n";
          return kExitUsage;
        }
        if (engine_opt->count() > 0 && cfg.engine != "oracle") {
          std::cerr << "error: interleave semantics requires the oracle "
                       "engine\n";
          return kExitUsage;
        }
        cfg.engine = "oracle";
      }
      (void)semantics_opt;
      return cmd_check(cfg);
    }
    if (ctl->parsed()) return cmd_ctl(ctl_file, ctl_formula, ctl_format);
    if (gen->parsed()) {
      std::cout << besc::chain::gen_chain(gen_m, gen_k);
      return kExitOk;
    }
    if (bench->parsed()) return cmd_bench(bench_m, bench_kmax, bench_format);
  } catch (const besc::dsl::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

// Command-line front end. Kept in a header so tests can drive run() in-process.
//
// Exit codes: 0 success, 1 domain error (structured JSON on stderr),
// 2 usage error (bad flags, unreadable or malformed input files).
#pragma once

#include <algorithm>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include <nlohmann/json.hpp>

#include "icm/icm.hpp"
#include "icm/io.hpp"

namespace icm::cli {

using nlohmann::json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Globals {
  std::string out;
  unsigned long long seed = 0;
  bool quiet = false;
  std::string log_level = "warning";
};

class Emitter {
 public:
  Emitter(const Globals& g, std::ostream& out, std::ostream& err) : g_(g), out_(out), err_(err) {}

  void text(const std::string& s) const {
    if (g_.out.empty()) out_ << s;
    else io::write_file(g_.out, s);
  }
  void document(const json& j) const { text(j.dump(2) + "\n"); }
  void warn(const std::string& w) const {
    if (!g_.quiet && g_.log_level != "error") err_ << json{{"warning", w}}.dump() << "\n";
  }

 private:
  const Globals& g_;
  std::ostream& out_;
  std::ostream& err_;
};

inline IncomeCirculationMatrix load_matrix(const std::string& path, std::optional<double> tolerance) {
  RawMatrix raw = io::read_raw_matrix(path);
  if (tolerance) raw.tolerance = *tolerance;
  return validate(raw);
}

inline json classification_json(const SocietyClassification& c) {
  json j;
  j["verdict"] = std::string(to_string(c.verdict));
  j["scc_count"] = c.scc_count;
  j["period"] = c.period ? json(*c.period) : json(nullptr);
  j["exponent"] = c.exponent ? json(*c.exponent) : json(nullptr);
  j["cohesiveness"] = c.cohesiveness ? json(*c.cohesiveness) : json(nullptr);
  j["nu"] = c.nu;
  j["bounds"] = {{"wielandt", c.wielandt()}, {"dulmage", c.dulmage() ? json(*c.dulmage()) : json(nullptr)}};
  return j;
}

/// Shortest witness walk for every ordered pair, agents labeled from 1.
inline json paths_table(const CirculationGraph& g) {
  json rows = json::array();
  for (std::size_t u = 0; u < g.n(); ++u)
    for (std::size_t v = 0; v < g.n(); ++v) {
      json row = {{"pair", {u + 1, v + 1}}};
      try {
        auto w = shortest_path_witness(g, AgentId{u}, AgentId{v});
        json agents = json::array();
        for (auto a : w.agents) agents.push_back(a.index + 1);
        row["path"] = agents;
        row["length"] = w.length;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::Unreachable) throw;
        row["path"] = nullptr;
        row["length"] = nullptr;
      }
      rows.push_back(row);
    }
  return rows;
}

inline std::string edges_csv(const CirculationGraph& g) {
  std::string s = "src,dst\n";
  for (auto [u, v] : g.edges()) s += std::to_string(u + 1) + "," + std::to_string(v + 1) + "\n";
  return s;
}

inline std::pair<long, long> parse_window(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw UsageError("--window expects a:b");
  try {
    return {std::stol(text.substr(0, colon)), std::stol(text.substr(colon + 1))};
  } catch (const std::exception&) {
    throw UsageError("--window expects integers a:b");
  }
}

inline json bound_json(const BoundSummary& b) {
  return {{"k0", b.k0}, {"cohesiveness", b.cohesiveness}, {"g", b.g},
          {"beta", b.beta}, {"gamma0", b.gamma0}, {"rate", b.rate}};
}

inline std::string optional_number(const std::vector<double>& v, std::size_t k) {
  return k < v.size() ? io::format_number(v[k]) : std::string();
}

struct SupportArgs {
  std::string matrix, wealth, partition, csv;
  std::optional<double> tolerance;
  std::size_t h0 = 0, l0 = 0;
  double epsilon = 0.0;
  std::optional<std::size_t> horizon;
  std::optional<long> t0;
  std::optional<double> sigma;
  std::size_t seeds = 1;
  double recovery_threshold = 0.01;
  double smallness_ratio = 0.1;
};

inline int run_support(const SupportArgs& a, const Globals& g, const Emitter& em) {
  const auto f = load_matrix(a.matrix, a.tolerance);
  const auto x0 = io::read_wealth(a.wealth);
  if (x0.size() != f.n()) fail(ErrorKind::DimensionMismatch, "wealth vector size differs from matrix");
  const SupportEvent ev{a.t0.value_or(x0.time()), AgentId{a.h0}, AgentId{a.l0}, a.epsilon};
  SupportOptions opts;
  opts.horizon = a.horizon;
  opts.recovery_threshold = a.recovery_threshold;
  opts.smallness_ratio = a.smallness_ratio;

  PartitionConfig pcfg = a.partition.empty() ? PartitionConfig{} : io::read_partition(a.partition);
  const auto part = make_partition(f, x0, pcfg);

  std::vector<std::pair<unsigned long long, SupportExperimentResult>> runs;
  if (a.sigma) {
    if (a.seeds == 0) throw UsageError("--seeds must be >= 1");
    for (std::size_t s = 0; s < a.seeds; ++s) {
      PerturbationSpec spec{*a.sigma, g.seed + s, 16};
      runs.emplace_back(spec.seed, perturbed_evolve(f, x0, spec, ev, opts));
    }
  } else {
    runs.emplace_back(g.seed, support_experiment(f, x0, ev, opts));
  }

  const bool multi = runs.size() > 1;
  std::string csv = multi ? "seed,k,deviation,bound,h_group_delta,l_group_delta\n"
                          : "k,deviation,bound,h_group_delta,l_group_delta\n";
  json seeds = json::array();
  for (const auto& [seed, r] : runs) {
    const auto hd = recovery_rate(r, part.H.empty() ? std::vector<std::size_t>{a.h0} : part.H);
    const auto ld = recovery_rate(r, part.L.empty() ? std::vector<std::size_t>{a.l0} : part.L);
    for (std::size_t k = 0; k < r.deviation.size(); ++k) {
      if (multi) csv += std::to_string(seed) + ",";
      csv += std::to_string(k) + "," + io::format_number(r.deviation[k]) + "," + optional_number(r.bound, k) + "," +
             io::format_number(hd[k]) + "," + io::format_number(ld[k]) + "\n";
    }
    for (const auto& w : r.warnings) em.warn(w);
    json s = {{"seed", seed},
              {"recovery_k", r.recovery_k ? json(*r.recovery_k) : json(nullptr)},
              {"final_deviation", r.deviation.back()},
              {"max_base_drift", r.max_base_drift()}};
    seeds.push_back(s);
  }
  const auto& first = runs.front().second;
  json summary = {{"h0", a.h0},
                  {"l0", a.l0},
                  {"epsilon", a.epsilon},
                  {"t0", ev.t0},
                  {"horizon", first.horizon()},
                  {"sigma", a.sigma.value_or(0.0)},
                  {"recovery_threshold", a.recovery_threshold},
                  {"recovery_k", first.recovery_k ? json(*first.recovery_k) : json(nullptr)},
                  {"bound", first.bound_info ? bound_json(*first.bound_info) : json(nullptr)},
                  {"H", part.H},
                  {"L", part.L},
                  {"warnings", first.warnings}};
  if (multi) summary["runs"] = seeds;
  else summary["max_base_drift"] = first.max_base_drift();
  if (!a.csv.empty()) io::write_file(a.csv, csv);
  em.document(summary);
  return 0;
}

struct ReportArgs {
  std::string matrix, wealth, csv;
  std::optional<double> tolerance;
  std::optional<std::size_t> h0, l0, horizon;
  double epsilon = 1e-3;
};

inline int run_report(const ReportArgs& a, const Emitter& em) {
  const auto f = load_matrix(a.matrix, a.tolerance);
  const auto cls = classify(f);
  json doc;
  doc["schema"] = 1;
  doc["n"] = f.n();
  doc["classification"] = classification_json(cls);
  json notices = json::array();

  std::optional<WealthVector> x0;
  if (!a.wealth.empty()) {
    x0 = io::read_wealth(a.wealth);
    if (x0->size() != f.n()) fail(ErrorKind::DimensionMismatch, "wealth vector size differs from matrix");
  }
  std::size_t h0 = a.h0.value_or(0), l0 = a.l0.value_or(f.n() - 1);
  if (x0) {
    const auto order = wealth_order(*x0);
    if (!a.h0) h0 = order.front();
    if (!a.l0) l0 = order.back();
  }
  if (h0 >= f.n() || l0 >= f.n()) fail(ErrorKind::IndexOutOfRange, "h0/l0 outside the economy");

  if (cls.verdict != Verdict::Cohesive) {
    notices.push_back("generosity and convergence bound omitted: society is " + std::string(to_string(cls.verdict)));
  } else if (h0 == l0) {
    notices.push_back("convergence bound omitted: h0 == l0");
  } else {
    const auto profile = generosity_profile(f, cls);
    const ConvergenceBound bound(profile, f, AgentId{h0}, AgentId{l0}, a.epsilon);
    std::size_t horizon = 0;
    if (a.horizon) {
      horizon = *a.horizon;
    } else {
      const auto k = bound.steps_to_reach(0.01 * a.epsilon);
      horizon = static_cast<std::size_t>(std::min<unsigned long long>(k, 100000));
      if (k > 100000) notices.push_back("bound curve truncated at 100000 steps");
    }
    doc["k0"] = profile.k0;
    doc["cohesiveness"] = profile.cohesiveness();
    doc["alpha"] = profile.alpha;
    doc["g"] = profile.g;
    doc["beta"] = bound.beta();
    doc["gamma0"] = bound.gamma0();
    doc["h0"] = h0;
    doc["l0"] = l0;
    doc["epsilon"] = a.epsilon;
    const auto measured = deviation_curve(f, AgentId{h0}, AgentId{l0}, a.epsilon, horizon);
    json curve = json::array();
    std::string csv = "k,bound,measured\n";
    for (std::size_t k = 0; k <= horizon; ++k) {
      curve.push_back(json::array({k, bound.at(k)}));
      csv += std::to_string(k) + "," + io::format_number(bound.at(k)) + "," + io::format_number(measured[k]) + "\n";
    }
    doc["bound_curve"] = std::move(curve);
    if (!a.csv.empty()) io::write_file(a.csv, csv);

    if (x0) {
      SupportOptions opts;
      opts.horizon = horizon;
      const SupportEvent ev{x0->time(), AgentId{h0}, AgentId{l0}, a.epsilon};
      try {
        const auto r = support_experiment(f, *x0, ev, opts);
        doc["support"] = {{"t0", ev.t0},
                          {"horizon", r.horizon()},
                          {"recovery_k", r.recovery_k ? json(*r.recovery_k) : json(nullptr)},
                          {"final_deviation", r.deviation.back()},
                          {"max_base_drift", r.max_base_drift()},
                          {"warnings", r.warnings}};
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::InsufficientDonorWealth) throw;
        notices.push_back(std::string("support experiment omitted: ") + e.what());
      }
    }
  }
  if (cls.verdict == Verdict::Fragmented && x0) {
    const auto part = make_partition(f, *x0);
    doc["blocks"] = {{"H", part.H}, {"L", part.L}, {"f12_mass", part.F12.mass()}, {"f21_mass", part.F21.mass()}};
  }
  doc["notices"] = notices;
  em.document(doc);
  return 0;
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Income circulation matrix analysis"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--out", g.out, "Write the primary output here instead of stdout");
  app.add_option("--seed", g.seed, "Base random seed")->capture_default_str();
  app.add_flag("--quiet", g.quiet, "Suppress warnings on stderr");
  app.add_option("--log-level", g.log_level, "error | warning")
      ->check(CLI::IsMember({"error", "warning"}))
      ->capture_default_str();

  std::string matrix_path, wealth_path, transactions_path, window, edges_path, csv_path, partition_path, profile;
  std::vector<std::string> matrix_paths;
  std::optional<double> tolerance;
  bool average = false, with_paths = false, limit = false;
  std::optional<unsigned long long> cap, power_k;
  std::size_t steps = 0, agents = 0;

  auto* build = app.add_subcommand("build", "Estimate a matrix from a transaction log");
  build->add_option("--transactions", transactions_path, "Transaction CSV (t,payer,payee,amount)")->required()->check(CLI::ExistingFile);
  build->add_option("--wealth", wealth_path, "Wealth CSV (agent,wealth or agent,wealth_<t>...)")->required()->check(CLI::ExistingFile);
  build->add_option("--window", window, "Steps a:b to estimate");
  build->add_flag("--average", average, "Average the per-step matrices of the window");
  build->add_option("--tolerance", tolerance, "Validation tolerance");

  auto* validate_cmd = app.add_subcommand("validate", "Check that a matrix is column-stochastic");
  validate_cmd->add_option("--matrix", matrix_path)->required()->check(CLI::ExistingFile);
  validate_cmd->add_option("--tolerance", tolerance);

  auto* classify_cmd = app.add_subcommand("classify", "Fragmented / whole-periodic / cohesive");
  classify_cmd->add_option("--matrix", matrix_path)->required()->check(CLI::ExistingFile);
  classify_cmd->add_option("--tolerance", tolerance);
  classify_cmd->add_option("--exponent-cap", cap, "Abort the exponent search above this");
  classify_cmd->add_option("--edges", edges_path, "Write the edge list (src,dst, agents from 1) here");
  classify_cmd->add_flag("--paths", with_paths, "Include a shortest witness path for every pair");

  auto* exponent_cmd = app.add_subcommand("exponent", "Degrees of business separation k0");
  exponent_cmd->add_option("--matrix", matrix_path)->required()->check(CLI::ExistingFile);
  exponent_cmd->add_option("--tolerance", tolerance);
  exponent_cmd->add_option("--cap", cap, "Abort the search above this");

  auto* simulate = app.add_subcommand("simulate", "Evolve a wealth vector; CSV trajectory");
  simulate->add_option("--matrix", matrix_paths, "Matrix file(s); several are applied cyclically")->required()->check(CLI::ExistingFile);
  simulate->add_option("--wealth", wealth_path)->required()->check(CLI::ExistingFile);
  simulate->add_option("--steps", steps)->required();
  simulate->add_option("--tolerance", tolerance);

  SupportArgs sa;
  auto* support = app.add_subcommand("support", "Epsilon-support experiment");
  support->add_option("--matrix", sa.matrix)->required()->check(CLI::ExistingFile);
  support->add_option("--wealth", sa.wealth)->required()->check(CLI::ExistingFile);
  support->add_option("--h0", sa.h0, "Donor (0-based)")->required();
  support->add_option("--l0", sa.l0, "Recipient (0-based)")->required();
  support->add_option("--epsilon", sa.epsilon)->required();
  support->add_option("--horizon", sa.horizon, "Steps after t0 (default: from the bound)");
  support->add_option("--t0", sa.t0, "Support time (default: wealth time)");
  support->add_option("--sigma", sa.sigma, "Gaussian perturbation level");
  support->add_option("--seeds", sa.seeds, "Number of perturbed runs")->capture_default_str();
  support->add_option("--partition", sa.partition, "Partition config JSON")->check(CLI::ExistingFile);
  support->add_option("--recovery-threshold", sa.recovery_threshold)->capture_default_str();
  support->add_option("--smallness-ratio", sa.smallness_ratio)->capture_default_str();
  support->add_option("--csv", sa.csv, "Write k,deviation,bound,h_group_delta,l_group_delta here");
  support->add_option("--tolerance", sa.tolerance);

  auto* hoarder = app.add_subcommand("hoarder", "Cash-hoarder block analysis of the last agent");
  hoarder->add_option("--matrix", matrix_path)->required()->check(CLI::ExistingFile);
  hoarder->add_option("--tolerance", tolerance);
  hoarder->add_option("--k", power_k, "Compare the closed-form F^k with a direct power");
  hoarder->add_flag("--limit", limit, "Report lim F^k");

  ReportArgs ra;
  auto* report = app.add_subcommand("report", "Classification, generosity and bound in one document");
  report->add_option("--matrix", ra.matrix)->required()->check(CLI::ExistingFile);
  report->add_option("--wealth", ra.wealth)->check(CLI::ExistingFile);
  report->add_option("--h0", ra.h0);
  report->add_option("--l0", ra.l0);
  report->add_option("--epsilon", ra.epsilon)->capture_default_str();
  report->add_option("--horizon", ra.horizon);
  report->add_option("--csv", ra.csv, "Write k,bound,measured here");
  report->add_option("--tolerance", ra.tolerance);

  auto* synth = app.add_subcommand("synthesize", "Generate a demo economy (matrix JSON with wealth)");
  synth->add_option("--profile", profile, "cohesive-random | ring | two-class | hoarder")->required();
  synth->add_option("--agents", agents)->required();
  synth->add_option("--wealth-out", wealth_path, "Also write the wealth vector here");

  auto usage = [&](const std::string& msg) {
    err << json{{"error", "Usage"}, {"message", msg}}.dump() << "\n";
    return 2;
  };

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return 0;
    }
    return usage(e.what());
  }

  const Emitter em(g, out, err);
  try {
    if (*build) {
      const auto tx = io::parse_transactions_csv(io::read_file(transactions_path));
      auto table = io::parse_wealth_csv(io::read_file(wealth_path));
      long a = 0, b = 0;
      if (!window.empty()) {
        std::tie(a, b) = parse_window(window);
      } else if (!tx.empty()) {
        auto [lo, hi] = std::minmax_element(tx.begin(), tx.end(),
                                            [](const auto& x, const auto& y) { return x.time < y.time; });
        a = lo->time;
        b = hi->time;
      } else if (table.by_step.size() == 1) {
        a = b = table.by_step.begin()->first;
      }
      if (b < a) throw UsageError("--window end precedes start");
      if (b > a && !average) throw UsageError("window spans several steps; pass --average");
      std::size_t n = 0;
      if (table.single) {
        n = table.single->size();
        if (b > a) fail(ErrorKind::MissingWealth, "multi-step windows need wealth_<t> columns for every step");
        table.by_step.emplace(a, WealthVector::make({table.single->values().begin(), table.single->values().end()}, a));
      } else if (!table.by_step.empty()) {
        n = table.by_step.begin()->second.size();
      }
      if (n == 0) fail(ErrorKind::InvalidDimension, "wealth CSV lists no agents");
      const double tol = tolerance.value_or(kDefaultTolerance);
      const auto mats = estimate_window(tx, table.by_step, n, {a, b}, tol);
      em.document(io::matrix_to_json(mats.size() == 1 ? mats.front() : average_icm(mats)));
    } else if (*validate_cmd) {
      const auto f = load_matrix(matrix_path, tolerance);
      em.document({{"valid", true}, {"n", f.n()}, {"nnz", f.nnz()}, {"tolerance", f.tolerance()},
                   {"nu", build_graph(f).self_loops()}});
    } else if (*classify_cmd) {
      const auto f = load_matrix(matrix_path, tolerance);
      const auto graph = build_graph(f);
      ExponentOptions eo;
      eo.cap = cap;
      json j = classification_json(classify(graph, eo));
      if (with_paths) j["paths"] = paths_table(graph);
      if (!edges_path.empty()) io::write_file(edges_path, edges_csv(graph));
      em.document(j);
    } else if (*exponent_cmd) {
      const auto f = load_matrix(matrix_path, tolerance);
      const auto graph = build_graph(f);
      ExponentOptions eo;
      eo.cap = cap;
      const auto k0 = exponent(graph, eo);
      const auto dm = dulmage_mendelsohn_bound(graph.n(), graph.self_loops());
      em.document({{"exponent", k0},
                   {"cohesiveness", 1.0 / static_cast<double>(k0)},
                   {"nu", graph.self_loops()},
                   {"bounds", {{"wielandt", wielandt_bound(graph.n())}, {"dulmage", dm ? json(*dm) : json(nullptr)}}}});
    } else if (*simulate) {
      std::vector<IncomeCirculationMatrix> mats;
      for (const auto& p : matrix_paths) mats.push_back(load_matrix(p, tolerance));
      const auto x0 = io::read_wealth(wealth_path);
      std::vector<IncomeCirculationMatrix> schedule;
      schedule.reserve(steps);
      for (std::size_t k = 0; k < steps; ++k) schedule.push_back(mats[k % mats.size()]);
      auto traj = evolve(schedule, x0);
      for (std::size_t k = 0; k < traj.matrix_ids.size(); ++k) traj.matrix_ids[k] %= mats.size();
      em.text(io::trajectory_csv(traj));
    } else if (*support) {
      return run_support(sa, g, em);
    } else if (*hoarder) {
      const auto f = load_matrix(matrix_path, tolerance);
      const auto dec = hoarder_decompose(f);
      json j;
      j["n"] = f.n();
      j["pure_cash_hoarder"] = dec.pure_cash_hoarder;
      json f11 = json::array();
      for (std::size_t i = 0; i < dec.F11.size(); ++i) {
        auto r = dec.F11.row(i);
        f11.push_back(std::vector<double>(r.begin(), r.end()));
      }
      j["blocks"] = {{"F11", f11}, {"b", dec.b}, {"c", dec.c}, {"d", dec.d}};
      if (power_k) {
        const auto closed = hoarder_power_closed_form(dec, *power_k);
        const auto direct = matrix_power(f, *power_k);
        j["power_check"] = {{"k", *power_k}, {"max_abs_deviation", max_abs_diff(closed, direct)}};
      }
      if (limit) {
        // Every column of the limit should put all of its mass on the hoarder.
        const auto lim = hoarder_limit(dec);
        double gap = 0.0;
        for (double v : lim.absorption) gap = std::max(gap, std::abs(v - 1.0));
        j["limit"] = {{"row", lim.absorption},
                      {"max_absorption_gap", gap},
                      {"spectral_radius_estimate", lim.spectral_radius_estimate}};
      }
      em.document(j);
    } else if (*report) {
      return run_report(ra, em);
    } else if (*synth) {
      auto eco = synthesize_economy(agents, profile, g.seed);
      if (!wealth_path.empty()) io::write_file(wealth_path, io::wealth_to_json(eco.wealth).dump(2) + "\n");
      em.document(io::matrix_to_json(eco.matrix));
    }
  } catch (const UsageError& e) {
    return usage(e.what());
  } catch (const Error& e) {
    const json j = {{"error", std::string(to_string(e.kind()))}, {"message", e.what()}};
    err << j.dump() << "\n";
    return e.kind() == ErrorKind::ParseError ? 2 : 1;
  }
  return 0;
}

}  // namespace icm::cli

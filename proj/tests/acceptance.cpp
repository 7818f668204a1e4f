// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "icm/icm.hpp"
#include "oracles.hpp"

using namespace icm;

namespace {

struct Verdict_ {
  bool ok = true;
  std::string detail;
};

IncomeCirculationMatrix fex() { return validate({3, kDefaultTolerance, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 0, 1.0}}}); }

// Max over steps of |M(t+1) - M(t)| / M(t).
double step_drift(const Trajectory& t) {
  double worst = 0.0;
  for (std::size_t k = 1; k < t.states.size(); ++k) {
    const double before = t.states[k - 1].monetary_base();
    if (before > 0.0) worst = std::max(worst, std::abs(t.states[k].monetary_base() - before) / before);
  }
  return worst;
}

std::size_t argmax(const WealthVector& x) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < x.size(); ++i)
    if (x[i] > x[best]) best = i;
  return best;
}

std::size_t argmin(const WealthVector& x) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < x.size(); ++i)
    if (x[i] < x[best]) best = i;
  return best;
}

// Drift figures collected by criteria 6-8 for the conservation suite.
double g_drift = 0.0;
std::size_t g_trajectories = 0;

void note_drift(double d) {
  g_drift = std::max(g_drift, d);
  ++g_trajectories;
}

Verdict_ table_of_paths() {
  // Lengths listed for each ordered pair in the published path table (agents 1-based).
  struct Row {
    std::size_t i, j;
    unsigned long long first, second;
  };
  const Row table[] = {{1, 1, 3, 6}, {1, 2, 1, 4}, {1, 3, 2, 5}, {2, 1, 2, 5}, {2, 2, 3, 6},
                       {2, 3, 1, 4}, {3, 1, 1, 4}, {3, 2, 2, 5}, {3, 3, 3, 6}};
  const auto g = build_graph(fex());
  Verdict_ v;
  for (const auto& r : table) {
    const AgentId u{r.i - 1}, w{r.j - 1};
    for (unsigned long long k = 1; k <= 6; ++k) {
      const bool expected = k == r.first || k == r.second;
      if (paths_of_length(g, u, w, k) != expected) {
        v.ok = false;
        v.detail += "(" + std::to_string(r.i) + "," + std::to_string(r.j) + ") k=" + std::to_string(k) + " ";
      }
    }
    const auto witness = shortest_path_witness(g, u, w);
    if (witness.length != r.first) {
      v.ok = false;
      v.detail += "shortest(" + std::to_string(r.i) + "," + std::to_string(r.j) + ")=" + std::to_string(witness.length) + " ";
    }
  }
  if (v.ok) v.detail = "9 pairs x 6 lengths, 9 shortest witnesses";
  return v;
}

Verdict_ periodicity() {
  const auto c = classify(fex());
  const bool cube = matrix_power(fex(), 3) == DenseMatrix::identity(3);
  Verdict_ v;
  v.ok = c.verdict == Verdict::WholePeriodic && c.period == 3u && cube;
  v.detail = std::string("verdict=") + std::string(to_string(c.verdict)) +
             " period=" + (c.period ? std::to_string(*c.period) : "none") + " F^3==I:" + (cube ? "yes" : "no");
  return v;
}

Verdict_ primitivity_sufficiency() {
  std::mt19937_64 rng(20240301);
  std::uniform_int_distribution<std::size_t> size(3, 30), diag(1, 3);
  std::uniform_real_distribution<double> density(0.0, 0.15);
  int cohesive = 0, within = 0;
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = size(rng);
    const auto pat = oracle::random_strong_pattern(n, density(rng), diag(rng), rng);
    if (!oracle::strongly_connected(pat)) return {false, "generator produced a non-strong pattern"};
    const auto f = oracle::from_dense(oracle::weigh(pat, rng));
    const auto c = classify(f);
    if (c.verdict != Verdict::Cohesive) continue;
    ++cohesive;
    if (*c.exponent <= 2 * n - c.nu - 1 && *c.exponent <= (n - 1) * (n - 1) + 1) ++within;
  }
  return {cohesive == 200 && within == 200,
          "cohesive " + std::to_string(cohesive) + "/200, within both bounds " + std::to_string(within) + "/200"};
}

Verdict_ exponent_oracle() {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<std::size_t> size(2, 12), diag(0, 1);
  std::uniform_real_distribution<double> density(0.0, 0.3);
  int tested = 0, agree = 0;
  while (tested < 100) {
    const std::size_t n = size(rng);
    const auto pat = oracle::random_strong_pattern(n, density(rng), diag(rng), rng);
    const auto brute = oracle::brute_exponent(pat, (n - 1) * (n - 1) + 1);
    if (brute == 0) continue;  // periodic pattern; not a primitive instance
    ++tested;
    if (exponent(oracle::from_dense(oracle::weigh(pat, rng))) == brute) ++agree;
  }
  return {agree == 100, std::to_string(agree) + "/100 exact matches"};
}

Verdict_ contraction() {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<std::size_t> size(2, 20);
  int holds = 0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = size(rng);
    const auto g = oracle::random_positive_stochastic(n, rng);
    double gen = 0.0;
    for (const auto& row : g) gen += *std::min_element(row.begin(), row.end());
    for (int r = 0; r < 10; ++r) {
      const auto u = oracle::random_zero_sum(n, rng);
      if (oracle::l1(oracle::mat_vec(g, u)) <= (1.0 - gen) * oracle::l1(u) + 1e-12) ++holds;
    }
  }
  return {holds == 10000, std::to_string(holds) + "/10000 trials"};
}

Verdict_ main_bound() {
  int ok = 0;
  std::size_t longest = 0;
  std::string failures;
  for (unsigned long long seed = 0; seed < 50; ++seed) {
    const std::size_t n = 3 + seed % 28;
    const auto eco = synthesize_economy(n, EconomyProfile::CohesiveRandom, 1000 + seed);
    const std::size_t h0 = argmax(eco.wealth), l0 = argmin(eco.wealth);
    const double eps = 0.01 * eco.wealth[l0];
    try {
      const auto r = support_experiment(eco.matrix, eco.wealth, {0, AgentId{h0}, AgentId{l0}, eps});
      note_drift(step_drift(r.baseline));
      note_drift(step_drift(r.supported));
      longest = std::max(longest, r.deviation.size() - 1);
      bool below = r.bound.size() == r.deviation.size();
      // Re-derive d_k from the two trajectories and check it against the bound.
      for (std::size_t k = 0; below && k < r.deviation.size(); ++k) {
        double d = 0.0;
        for (std::size_t i = 0; i < n; ++i) d += std::abs(r.supported.states[k][i] - r.baseline.states[k][i]);
        below = d <= r.bound[k] + 1e-9 && r.deviation[k] <= r.bound[k] + 1e-9;
      }
      if (below && r.recovery_k) ++ok;
      else failures += std::to_string(seed) + " ";
    } catch (const Error& e) {
      failures += std::to_string(seed) + "(" + e.what() + ") ";
    }
  }
  return {ok == 50, std::to_string(ok) + "/50 economies below the bound and recovered; longest horizon " +
                        std::to_string(longest) + (failures.empty() ? "" : "; failed: " + failures)};
}

Verdict_ hoarder_closed_form() {
  int ok = 0;
  double worst_power = 0.0, worst_limit = 0.0, worst_absorb = 0.0;
  for (unsigned long long seed = 0; seed < 50; ++seed) {
    const std::size_t n = 2 + seed % 19;
    const auto eco = synthesize_economy(n, EconomyProfile::Hoarder, 500 + seed);
    const auto dec = hoarder_decompose(eco.matrix);
    if (!dec.pure_cash_hoarder) continue;
    double dp = 0.0;
    for (unsigned long long k = 1; k <= 64; ++k)
      dp = std::max(dp, max_abs_diff(hoarder_power_closed_form(dec, k), matrix_power(eco.matrix, k)));
    const auto lim = hoarder_limit(dec);
    const double dl = max_abs_diff(lim.matrix, matrix_power(eco.matrix, 4096));
    double da = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      double column = 0.0;
      for (std::size_t i = 0; i < n; ++i) column += lim.matrix(i, j);
      da = std::max({da, std::abs(lim.matrix(n - 1, j) - 1.0), std::abs(column - 1.0)});
    }
    worst_power = std::max(worst_power, dp);
    worst_limit = std::max(worst_limit, dl);
    worst_absorb = std::max(worst_absorb, da);
    if (dp <= 1e-9 && dl <= 1e-6 && da <= 1e-9) ++ok;
  }
  char buf[200];
  std::snprintf(buf, sizeof buf, "%d/50 economies; max |closed-F^k| %.2e, max |limit-F^4096| %.2e, max absorption gap %.2e",
                ok, worst_power, worst_limit, worst_absorb);
  return {ok == 50, buf};
}

Verdict_ fragmented() {
  int ok = 0, total = 0;
  std::string detail;
  for (FragmentKind want : {FragmentKind::PoorAbsorb, FragmentKind::WealthyAbsorb}) {
    double worst_share = 1.0;
    std::size_t slowest = 0;
    for (unsigned long long seed = 0; seed < 5; ++seed) {
      ++total;
      SynthesisOptions o;
      (want == FragmentKind::PoorAbsorb ? o.f21_density : o.f12_density) = 0.2;
      const auto eco = synthesize_economy(10 + 5 * seed, EconomyProfile::TwoClass, 300 + seed, o);
      const auto part = make_partition(eco.matrix, eco.wealth, {.h_frac = 0.1, .l_frac = o.poor_frac});
      const auto d = fragmented_asymptotics(eco.matrix, part, eco.wealth, {.horizon = 100000, .stop_share = 0.999});
      note_drift(d.max_base_drift);
      const double share = want == FragmentKind::PoorAbsorb ? d.lower_share : d.upper_share;
      worst_share = std::min(worst_share, share);
      slowest = std::max(slowest, d.steps);
      if (d.kind == want && share > 0.999 && classify(eco.matrix).verdict == Verdict::Fragmented) ++ok;
    }
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s: min share %.6f, slowest %zu steps; ", std::string(to_string(want)).c_str(),
                  worst_share, slowest);
    detail += buf;
  }
  return {ok == total, std::to_string(ok) + "/" + std::to_string(total) + " runs; " + detail};
}

Verdict_ conservation() {
  // Perturbed runs on a fixed cohesive economy, common random numbers across baseline and support.
  const auto eco = synthesize_economy(12, EconomyProfile::CohesiveRandom, 4242);
  const std::size_t h0 = argmax(eco.wealth), l0 = argmin(eco.wealth);
  const double eps = 0.01 * eco.wealth[l0];
  const SupportEvent ev{0, AgentId{h0}, AgentId{l0}, eps};
  const ConvergenceBound nominal(generosity_profile(eco.matrix), eco.matrix, AgentId{h0}, AgentId{l0}, eps);
  SupportOptions opts;
  opts.horizon = 4 * nominal.steps_to_reach(0.01 * eps);
  int recovered = 0;
  double perturbed_drift = 0.0;
  for (unsigned long long seed = 0; seed < 20; ++seed) {
    const auto r = perturbed_evolve(eco.matrix, eco.wealth, {0.01, seed, 16}, ev, opts);
    perturbed_drift = std::max({perturbed_drift, step_drift(r.baseline), step_drift(r.supported)});
    g_trajectories += 2;
    if (r.recovery_k) ++recovered;
  }
  const double drift = std::max(g_drift, perturbed_drift);
  char buf[220];
  std::snprintf(buf, sizeof buf, "max relative drift %.2e over %zu trajectories; perturbed recovery %d/20 (horizon %zu)",
                drift, g_trajectories, recovered, *opts.horizon);
  return {drift <= 1e-12 && recovered == 20 && g_trajectories > 0, buf};
}

Verdict_ ingestion() {
  double worst = 0.0;
  int cases = 0;
  const EconomyProfile profiles[] = {EconomyProfile::CohesiveRandom, EconomyProfile::TwoClass, EconomyProfile::Hoarder,
                                     EconomyProfile::Ring};
  for (unsigned long long seed = 0; seed < 40; ++seed) {
    const std::size_t n = 2 + seed % 19;
    const auto eco = synthesize_economy(n, profiles[seed % 4], 700 + seed);
    const auto tx = synthesize_transactions(eco.matrix, eco.wealth, static_cast<long>(seed));
    const auto back = estimate_icm(tx, eco.wealth, static_cast<long>(seed));
    worst = std::max(worst, max_abs_diff(back.to_dense(), eco.matrix.to_dense()));
    ++cases;
  }
  const auto idle = estimate_icm({}, WealthVector::make({3, 1, 4, 1, 5}), 0);
  std::map<long, WealthVector> none;
  const auto window = estimate_window({}, none, 4, {0, 3});
  bool identity = idle.to_dense() == DenseMatrix::identity(5);
  for (const auto& m : window) identity = identity && m.to_dense() == DenseMatrix::identity(4);
  char buf[160];
  std::snprintf(buf, sizeof buf, "%d round trips, max entry error %.2e; empty steps give I: %s", cases, worst,
                identity ? "yes" : "no");
  return {worst <= 1e-12 && identity, buf};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    double limit_seconds;
    std::function<Verdict_()> run;
  };
  const std::vector<Criterion> criteria{
      {"1 path table of the three-agent cycle", 1, table_of_paths},
      {"2 periodicity of the three-agent cycle", 1, periodicity},
      {"3 one saver makes a whole society cohesive", 30, primitivity_sufficiency},
      {"4 exponent equals brute-force oracle", 10, exponent_oracle},
      {"5 l1 contraction by generosity", 10, contraction},
      {"6 support deviation under the generosity bound", 60, main_bound},
      {"7 cash-hoarder closed form and limit", 30, hoarder_closed_form},
      {"8 fragmented two-class absorption", 30, fragmented},
      {"9 monetary base conservation and perturbed recovery", 60, conservation},
      {"10 transaction round trip and idle steps", 5, ingestion},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Verdict_ v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs < c.limit_seconds;
    const bool pass = v.ok && in_time;
    failed += !pass;
    std::printf("[%s] criterion %s: %s (%.3fs, limit %.0fs%s)\n", pass ? "PASS" : "FAIL", c.name, v.detail.c_str(), secs,
                c.limit_seconds, in_time ? "" : ", too slow");
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}

// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "fhmm/analysis.hpp"
#include "fhmm/inference.hpp"
#include "fhmm/simulate.hpp"
#include "fhmm/training.hpp"
#include "fhmm/trie.hpp"
#include "oracle.hpp"

using namespace fhmm;
using fhmm::testing::relative_error;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

// ---------------------------------------------------------------------------

Outcome oracle_equivalence() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(20240101);
  double worst = 0.0;
  for (int inst = 0; inst < 200; ++inst) {
    const std::size_t k = 1 + inst % 3, n = 1 + (inst / 3) % 6;
    const FounderHMM m = testing::random_model(k, n, rng);
    const auto g = testing::random_genotype(n, rng, 0.15);
    const auto oracle = testing::enumerate(m, g);
    worst = std::max(worst, relative_error(std::exp(total_log_likelihood(m, g)), oracle.probability));
    const auto table = genotype_posteriors(m, g);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t x = 0; x < 3; ++x) {
        const double p = std::exp(table.log_marginal[i]) * table.q[i][x];
        worst = std::max(worst, relative_error(p, oracle.substitution[i][x]));
      }
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-9 && secs < 60.0, fmt("200 instances, max relative error %.3g, %.2fs", worst, secs)};
}

Outcome collapse_correctness() {
  std::mt19937_64 rng(77);
  double worst_block = 0.0, worst_ll = 0.0;
  int instances = 0;
  for (std::size_t k = 1; k <= 4; ++k)
    for (std::size_t n : {1, 2, 7, 20, 50}) {
      for (int rep = 0; rep < 3; ++rep) {
        const FounderHMM m = testing::random_model(k, n, rng);
        const auto g = testing::random_genotype(n, rng, 0.1);
        const auto fast = forward_backward(m, g);
        const auto slow_f = testing::naive_forward(m, g);
        const auto slow_b = testing::naive_backward(m, g);
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t c = 0; c < k * k; ++c) {
            worst_block = std::max(worst_block, std::abs(fast.forward.matrix(i)[c] - slow_f.blocks[i][c]));
            // Backward blocks: the last one is all ones on both sides, earlier ones sum to 1.
            worst_block = std::max(worst_block, std::abs(fast.backward.matrix(i)[c] - slow_b.blocks[i][c]));
          }
        worst_ll = std::max(worst_ll, relative_error(fast.forward.log_likelihood, slow_f.log_likelihood));
        worst_ll = std::max(worst_ll, relative_error(fast.backward.log_likelihood, slow_b.log_likelihood));
        ++instances;
      }
    }
  return {worst_block <= 1e-12 && worst_ll <= 1e-12,
          fmt("%d instances, max block difference %.3g, max log-likelihood relative error %.3g", instances,
              worst_block, worst_ll)};
}

Outcome trie_equivalence() {
  std::mt19937_64 rng(4242);
  double worst = 0.0;
  for (int c = 0; c < 50; ++c) {
    const std::size_t k = 1 + c % 4, n = 1 + c % 25, m = 1 + (c * 13) % 40;
    const FounderHMM model = testing::random_model(k, n, rng, c % 5 == 0);
    GenotypeCorpus corpus = testing::random_genotypes(m, n, rng, 0.05);
    // Shared prefixes of varying length.
    for (std::size_t s = 1; s < m; ++s) {
      const std::size_t keep = std::uniform_int_distribution<std::size_t>(0, n)(rng);
      const std::size_t from = std::uniform_int_distribution<std::size_t>(0, s - 1)(rng);
      for (std::size_t i = 0; i < keep; ++i) corpus[s].symbols[i] = corpus[from].symbols[i];
    }
    BatchOptions blocks;
    blocks.block_loci = 1 + c % 5;
    for (const auto& options : {BatchOptions{}, blocks}) {
      const auto batch = batched_posteriors(model, corpus, options);
      for (std::size_t s = 0; s < m; ++s) {
        const auto single = infer_sample(model, corpus[s]);
        const auto& b = batch.samples[s];
        if (b.zero_locus != single.zero_locus) worst = std::max(worst, 1.0);
        if (std::isfinite(single.log_likelihood))
          worst = std::max(worst, relative_error(b.log_likelihood, single.log_likelihood));
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t x = 0; x < 3; ++x)
            worst = std::max(worst, std::abs(b.table.q[i][x] - single.table.q[i][x]));
      }
    }
  }

  GenotypeCorpus figure;
  for (const char* row : {"11122", "12102", "12202", "11222", "12102", "12100", "21211", "11111", "11111", "11122"})
    figure.push_back(testing::G(row));
  const auto stats = batched_posteriors(testing::random_model(2, 5, rng), figure).stats;
  const bool counts = stats.forward_evaluations == 23 && stats.naive_evaluations == 50 && stats.distinct_genotypes == 7;
  return {worst <= 1e-12 && counts,
          fmt("50 corpora, max difference %.3g; example corpus %zu forward evaluations vs %zu naive, %zu distinct",
              worst, stats.forward_evaluations, stats.naive_evaluations, stats.distinct_genotypes)};
}

bool stochastic(const FounderHMM& m) {
  const std::size_t k = m.founders();
  double s = 0.0;
  for (double v : m.initial()) {
    if (!(v >= 0.0)) return false;
    s += v;
  }
  if (std::abs(s - 1.0) > 1e-9) return false;
  for (std::size_t i = 0; i + 1 < m.loci(); ++i)
    for (std::size_t a = 0; a < k; ++a) {
      double row = 0.0;
      for (std::size_t b = 0; b < k; ++b) {
        if (!(m.transition(i, a, b) >= 0.0)) return false;
        row += m.transition(i, a, b);
      }
      if (std::abs(row - 1.0) > 1e-9) return false;
    }
  return std::all_of(m.emissions().begin(), m.emissions().end(), [](double e) { return e >= 0.0 && e <= 1.0; });
}

Outcome em_monotonicity() {
  std::mt19937_64 rng(909);
  int bad_runs = 0, invalid = 0;
  double worst_drop = 0.0;
  std::size_t iterations = 0;
  for (int run = 0; run < 100; ++run) {
    const std::size_t k = 1 + run % 5, n = 1 + (run * 7) % 30, m = 1 + (run * 11) % 40;
    const HaplotypePanel panel = run % 2 ? testing::random_panel(m, n, rng)
                                         : testing::sample_panel(testing::random_model(k, n, rng), m, rng);
    TrainConfig cfg;
    cfg.founders = k;
    cfg.max_iterations = 60;
    cfg.tolerance = 1e-10;
    cfg.seed = static_cast<std::uint64_t>(run);
    const auto r = train_founder_hmm(panel, cfg, [&](std::size_t, const FounderHMM& model) {
      if (!stochastic(model)) ++invalid;
    });
    iterations += r.report.iterations_run;
    bool ok = true;
    for (std::size_t t = 1; t < r.report.loglik_trace.size(); ++t) {
      const double drop = r.report.loglik_trace[t - 1] - r.report.loglik_trace[t];
      worst_drop = std::max(worst_drop, drop);
      if (drop > 1e-8) ok = false;
    }
    if (!ok) ++bad_runs;
  }
  return {bad_runs == 0 && invalid == 0,
          fmt("100 runs, %zu iterations, %d non-monotone runs (largest drop %.3g), %d invalid models", iterations,
              bad_runs, worst_drop, invalid)};
}

Outcome scaling() {
  const auto t0 = Clock::now();
  BenchConfig c;
  c.repetitions = 5;
  const BenchResult r = run_scaling_bench(c);
  const double secs = seconds_since(t0);
  const bool pass = std::abs(r.loci_fit.exponent - 1.0) <= 0.25 && std::abs(r.samples_fit.exponent - 1.0) <= 0.25 &&
                    r.founders_fit.exponent <= 3.3 && secs < 600.0;
  return {pass, fmt("exponents: loci %.3f, samples %.3f, founders %.3f; %.1fs", r.loci_fit.exponent,
                    r.samples_fit.exponent, r.founders_fit.exponent, secs)};
}

Outcome pipeline_direction() {
  const auto t0 = Clock::now();
  int wins = 0;
  std::size_t tp = 0, flagged = 0, injected = 0, ref_tp = 0, ref_flagged = 0;
  std::string rows;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    SimConfig c;
    c.founder_count = 5;
    c.loci = 300;
    c.sample_count = 100;
    c.reference_count = 200;
    c.error_rate = 0.01;
    c.missing_rate = 0.01;
    c.mask_fraction = 0.1;
    c.seed = seed;
    const SimData d = simulate(c);

    PipelineParams p;
    p.threshold = 1e3;
    p.impute.train.founders = 5;
    p.impute.train.seed = seed;
    p.impute.threads = 0;
    p.typed_train = p.impute.train;
    p.typed_train.threads = 0;
    p.mode = PipelineMode::Imp;
    const auto imp = evaluate(run_pipeline(d.reference, d.observed, d.map, p).imputation, d.truth);
    p.mode = PipelineMode::EdcMdrImp;
    const auto full = run_pipeline(d.reference, d.observed, d.map, p);
    const auto edc = evaluate(full.imputation, d.truth);
    if (edc.discordance_rate <= imp.discordance_rate) ++wins;
    const auto score = score_detection(full.errors, d);
    tp += score.true_positives;
    flagged += score.flagged;
    injected += score.injected;
    rows += fmt(" %.4f/%.4f", imp.discordance_rate, edc.discordance_rate);

    // Reference-only detection model, reported for comparison.
    TrainConfig t = p.typed_train;
    const auto typed = d.map.typed_indices();
    const auto model = train_founder_hmm(restrict_loci(d.reference, typed), t).model;
    const auto ref_score = score_detection(detect_errors(model, d.observed, d.map.subset(typed).ids(), 1e3), d);
    ref_tp += ref_score.true_positives;
    ref_flagged += ref_score.flagged;
  }
  const double precision = flagged ? static_cast<double>(tp) / static_cast<double>(flagged) : 0.0;
  const double recall = injected ? static_cast<double>(tp) / static_cast<double>(injected) : 0.0;
  const double ref_precision = ref_flagged ? static_cast<double>(ref_tp) / static_cast<double>(ref_flagged) : 0.0;
  return {wins >= 8 && precision >= 0.5,
          fmt("EDC+MDR+IMP <= IMP in %d/10 seeds (IMP/EDC:%s); detection-stage precision %.3f, recall %.3f; "
              "reference-only model precision %.3f; %.1fs",
              wins, rows.c_str(), precision, recall, ref_precision, seconds_since(t0))};
}

Outcome panel_trend() {
  const auto t0 = Clock::now();
  const std::vector<std::size_t> panels{30, 60, 120, 240};
  const int replicates = 8;
  std::vector<double> mean(panels.size(), 0.0);
  for (int rep = 1; rep <= replicates; ++rep) {
    SweepConfig s;
    s.sim.loci = 300;
    s.sim.sample_count = 200;
    s.sim.mask_fraction = 0.1;
    s.sim.seed = static_cast<std::uint64_t>(rep);
    s.train.seed = static_cast<std::uint64_t>(rep);
    s.founders = {7};
    s.panel_sizes = panels;
    s.repetitions = 1;
    s.threads = 0;
    const auto rows = sweep(s);
    for (std::size_t p = 0; p < panels.size(); ++p) {
      if (rows[p].failed) return {false, "sweep cell failed: " + rows[p].error};
      mean[p] += rows[p].eval.discordance_rate / replicates;
    }
  }
  bool pass = true;
  for (std::size_t p = 1; p < panels.size(); ++p) pass = pass && mean[p] <= mean[p - 1] + 0.005;
  return {pass, fmt("K=7 mean discordance over %d datasets: 30: %.4f, 60: %.4f, 120: %.4f, 240: %.4f; %.1fs",
                    replicates, mean[0], mean[1], mean[2], mean[3], seconds_since(t0))};
}

// Invariants ----------------------------------------------------------------

int run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "fhmm");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return cli::run(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

/// Runs a seeded simulate/train/pipeline chain serially into `dir`.
bool cli_chain(const std::filesystem::path& dir) {
  const std::string d = dir.string();
  return run_cli({"simulate", "--seed", "7", "--loci", "80", "--samples", "30", "--reference", "60", "--error-rate",
                  "0.01", "--missing-rate", "0.01", "--mask-fraction", "0.1", "--out-dir", d, "--threads", "1",
                  "--log", d + "/sim.log"}) == 0 &&
         run_cli({"train", "--panel", d + "/reference.hap", "-K", "4", "--seed", "3", "-o", d + "/model",
                  "--threads", "1", "--log", d + "/train.log"}) == 0 &&
         run_cli({"detect", "--model", d + "/model", "--genotypes", d + "/truth.gen", "-o", d + "/report.tsv",
                  "--threads", "1", "--log", d + "/detect.log"}) == 0 &&
         run_cli({"pipeline", "--mode", "edc-mdr-imp", "--panel", d + "/reference.hap", "--genotypes",
                  d + "/observed.gen", "--map", d + "/loci.map", "-K", "4", "--max-iterations", "20", "-o",
                  d + "/imputed.tsv", "--stages", d + "/stages.tsv", "--threads", "1", "--log",
                  d + "/pipeline.log"}) == 0;
}

Outcome invariants() {
  std::mt19937_64 rng(31337);
  double worst_sum = 0.0, worst_swap = 0.0, worst_missing = 0.0, min_ratio = kInfiniteRatio;
  for (int inst = 0; inst < 60; ++inst) {
    const std::size_t k = 1 + inst % 5, n = 1 + (inst * 17) % 200;
    const FounderHMM m = testing::random_model(k, n, rng);
    const auto g = testing::random_genotype(n, rng, 0.1);
    const auto fb = forward_backward(m, g);
    for (std::size_t i = 0; i < n; ++i) {
      const auto f = fb.forward.matrix(i), b = fb.backward.matrix(i);
      for (std::size_t a = 0; a < k; ++a)
        for (std::size_t c = 0; c < k; ++c) {
          worst_swap = std::max(worst_swap, std::abs(f[a * k + c] - f[c * k + a]));
          worst_swap = std::max(worst_swap, std::abs(b[a * k + c] - b[c * k + a]));
        }
    }
    const auto table = genotype_posteriors(m, g);
    for (const auto& q : table.q) worst_sum = std::max(worst_sum, std::abs(q[0] + q[1] + q[2] - 1.0));

    const std::size_t i = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
    // Sum in log space relative to the marginal to avoid underflow on long chains.
    const double marginal = total_log_likelihood(m, substitute(g, i, Genotype::Missing));
    double sum = 0.0;
    for (auto x : kCalledGenotypes) sum += std::exp(total_log_likelihood(m, substitute(g, i, x)) - marginal);
    worst_missing = std::max(worst_missing, std::abs(sum - 1.0));
  }
  for (int c = 0; c < 10; ++c) {
    const std::size_t k = 2 + c % 4, n = 5 + c * 7;
    const FounderHMM m = testing::random_model(k, n, rng);
    const auto corpus = testing::random_genotypes(20, n, rng, 0.05);
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < n; ++i) ids.push_back("L" + std::to_string(i));
    for (const auto& e : detect_errors(m, corpus, ids).entries) min_ratio = std::min(min_ratio, e.ratio);
  }

  namespace fs = std::filesystem;
  const fs::path root = fs::temp_directory_path() / "fhmm_acceptance";
  fs::remove_all(root);
  // The echoed configuration names input paths, so both runs use the same directory.
  bool identical = cli_chain(root / "run");
  if (identical) fs::copy(root / "run", root / "first");
  identical = identical && cli_chain(root / "run");
  if (identical) {
    for (const char* f : {"truth.gen", "observed.gen", "reference.hap", "loci.map", "errors.tsv", "model",
                          "report.tsv", "imputed.tsv", "stages.tsv"}) {
      const std::string first = slurp(root / "first" / f);
      identical = identical && !first.empty() && first == slurp(root / "run" / f);
    }
  }
  fs::remove_all(root);

  const bool pass = worst_sum <= 1e-9 && min_ratio >= 1.0 && worst_swap <= 1e-12 && worst_missing <= 1e-10 && identical;
  return {pass, fmt("posterior sums off by %.3g; smallest ratio %.17g; swap asymmetry %.3g; missing identity off by "
                    "%.3g; reruns %s",
                    worst_sum, min_ratio, worst_swap, worst_missing, identical ? "byte-identical" : "DIFFER")};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {"oracle equivalence", oracle_equivalence},   {"collapsed vs naive recurrences", collapse_correctness},
      {"trie equivalence", trie_equivalence},       {"EM monotonicity", em_monotonicity},
      {"runtime scaling", scaling},                 {"pipeline direction", pipeline_direction},
      {"panel-size trend", panel_trend},            {"invariant suite", invariants},
  };
  int failed = 0;
  for (std::size_t c = 0; c < criteria.size(); ++c) {
    Outcome o;
    try {
      o = criteria[c].run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %zu %s: %s\n", o.pass ? "PASS" : "FAIL", c + 1, criteria[c].name, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed ? 1 : 0;
}

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fhmm/analysis.hpp"
#include "fhmm/genotype.hpp"

namespace fhmm {

struct SimConfig {
  std::size_t founder_count = 8;
  /// Supplied founders; when empty, founders are drawn at random with
  /// per-locus minor-allele frequency uniform in [maf_min, maf_max].
  HaplotypePanel founders;
  double maf_min = 0.05;
  double maf_max = 0.5;
  /// Per-interval probability of switching to a different founder.
  double switch_rate = 0.05;
  std::size_t loci = 200;
  std::size_t sample_count = 100;
  std::size_t reference_count = 120;
  double error_rate = 0.0;
  double missing_rate = 0.0;
  /// Fraction of loci relabeled untyped; mask_count overrides it.
  double mask_fraction = 0.0;
  std::optional<std::size_t> mask_count;
  std::uint64_t seed = 1;

  void validate() const;
  /// Number of loci the masking channel relabels untyped.
  std::size_t masked_loci() const;
};

struct InjectedEvent {
  std::size_t sample = 0;
  /// Index into the full locus map.
  std::size_t locus = 0;
  Genotype truth = Genotype::Missing;
  Genotype observed = Genotype::Missing;
};

/// Ground truth and observations. Channels apply in a fixed order: errors,
/// then missingness, then masking. Event lists cover all loci, including
/// those later masked.
struct SimData {
  HaplotypePanel founders;
  /// Two per sample, in sample order.
  HaplotypePanel truth_haplotypes;
  /// Full-locus genotypes.
  GenotypeCorpus truth;
  /// Typed loci only, after errors and missingness.
  GenotypeCorpus observed;
  LocusMap map;
  HaplotypePanel reference;
  std::vector<InjectedEvent> errors;
  std::vector<InjectedEvent> missing;
  std::vector<std::size_t> masked;
};

/// Deterministic in config (including seed). Throws InputError for invalid
/// rates or shapes.
SimData simulate(const SimConfig& config);

struct EvalReport {
  std::size_t scored = 0;
  std::size_t discordant = 0;
  double discordance_rate = 0.0;
  /// confusion[truth][call] over called genotypes.
  std::array<std::array<std::size_t, 3>, 3> confusion{};
  /// Calls left missing (counted as discordant).
  std::size_t missing_calls = 0;
};

/// Imputation calls against full-locus truth, aligned by sample id and
/// locus index.
EvalReport evaluate(const ImputationResult& calls, const GenotypeCorpus& truth);

/// Completed corpus against truth of the same shape; every symbol is scored.
EvalReport evaluate(const GenotypeCorpus& calls, const GenotypeCorpus& truth);

struct DetectionScore {
  std::size_t injected = 0;
  std::size_t flagged = 0;
  std::size_t true_positives = 0;
  double precision = 0.0;
  double recall = 0.0;
};

/// Scores an error report over the typed corpus of `data` against the
/// injected errors that survived masking.
DetectionScore score_detection(const ErrorReport& report, const SimData& data);

// ---------------------------------------------------------------------------
// Parameter sweeps

struct SweepConfig {
  SimConfig sim;
  std::vector<std::size_t> founders{7};
  std::vector<std::size_t> panel_sizes{120};
  std::vector<std::size_t> flanks{10};
  std::vector<PipelineMode> modes{PipelineMode::Imp};
  TrainConfig train;
  double threshold = kDefaultErrorThreshold;
  std::size_t repetitions = 3;
  /// Cells run concurrently; timings then include contention.
  std::size_t threads = 1;
};

struct SweepRow {
  std::size_t founders = 0;
  std::size_t panel_size = 0;
  std::size_t flank = 0;
  PipelineMode mode = PipelineMode::Imp;
  EvalReport eval;
  /// Median wall time over repetitions.
  double seconds = 0.0;
  bool failed = false;
  std::string error;
};

/// One simulated dataset (reference panel sized to the largest panel) is
/// shared by all cells; a cell with panel size P trains on the first P
/// reference haplotypes with training seed derived from the cell index.
std::vector<SweepRow> sweep(const SweepConfig& config);

// ---------------------------------------------------------------------------
// Runtime scaling

struct ScalingPoint {
  double x = 0.0;
  double seconds = 0.0;
};

struct ScalingFit {
  double exponent = 0.0;
  double intercept = 0.0;
};

/// Least-squares fit of log(seconds) = intercept + exponent * log(x).
ScalingFit fit_loglog(const std::vector<ScalingPoint>& points);

struct BenchConfig {
  std::vector<std::size_t> loci_values{250, 500, 1000, 2000};
  std::vector<std::size_t> sample_values{60, 120, 240, 480};
  std::vector<std::size_t> founder_values{3, 5, 7, 9, 11, 13, 15};
  std::size_t loci = 200;
  std::size_t samples = 100;
  std::size_t founders = 5;
  std::size_t repetitions = 3;
  bool use_trie = true;
  std::uint64_t seed = 1;
};

struct BenchResult {
  std::vector<ScalingPoint> by_loci;
  std::vector<ScalingPoint> by_samples;
  std::vector<ScalingPoint> by_founders;
  ScalingFit loci_fit;
  ScalingFit samples_fit;
  ScalingFit founders_fit;
};

/// Times batched_posteriors over random distinct genotypes under a random
/// model, varying one of (loci, samples, founders) at a time.
BenchResult run_scaling_bench(const BenchConfig& config);

/// Median wall time of `repetitions` calls of fn.
double median_seconds(std::size_t repetitions, const std::function<void()>& fn);

/// Uniformly random called genotypes (no missing), one row per sample.
GenotypeCorpus random_corpus(std::size_t samples, std::size_t loci, std::uint64_t seed);

}  // namespace fhmm

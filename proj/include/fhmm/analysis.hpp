#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "fhmm/founder_hmm.hpp"
#include "fhmm/genotype.hpp"
#include "fhmm/inference.hpp"
#include "fhmm/training.hpp"
#include "fhmm/trie.hpp"

namespace fhmm {

inline constexpr double kDefaultErrorThreshold = 1e3;
inline constexpr double kInfiniteRatio = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Error detection and correction

struct ErrorEntry {
  std::size_t sample = 0;
  std::size_t locus = 0;
  std::string sample_id;
  std::string locus_id;
  Genotype observed = Genotype::Missing;
  /// max_x P(g[g_i <- x]) / P(g); +inf when the observation is impossible.
  double ratio = 1.0;
  bool flagged = false;
  Genotype suggested = Genotype::Missing;
};

struct ErrorReport {
  double threshold = kDefaultErrorThreshold;
  /// One entry per non-missing symbol, ordered by (sample, locus).
  std::vector<ErrorEntry> entries;

  std::size_t flagged_count() const;
};

/// Likelihood-ratio test at every called genotype. `locus_ids` names the
/// model's loci. Ties in the argmax keep the observed symbol.
ErrorReport detect_errors(const FounderHMM& model, const GenotypeCorpus& corpus,
                          const std::vector<std::string>& locus_ids, double threshold = kDefaultErrorThreshold,
                          const BatchOptions& batch = {});

struct CorrectionResult {
  GenotypeCorpus corpus;
  std::size_t changes = 0;
};

/// Replaces flagged symbols by their suggestion. Throws InputError when the
/// report does not describe this corpus.
CorrectionResult correct_errors(const GenotypeCorpus& corpus, const ErrorReport& report);

// ---------------------------------------------------------------------------
// Missing-data recovery

struct Fill {
  std::size_t sample = 0;
  std::size_t locus = 0;
  Genotype value = Genotype::Missing;
  /// Posterior of the filled value; 0 when the sample has probability zero.
  double confidence = 0.0;
};

struct RecoveryResult {
  GenotypeCorpus corpus;
  std::vector<Fill> fills;
};

/// Fills every missing symbol with the argmax of its posterior triple from
/// a single posterior pass (ties go to the smaller genotype code).
RecoveryResult recover_missing(const FounderHMM& model, const GenotypeCorpus& corpus,
                               const BatchOptions& batch = {});

// ---------------------------------------------------------------------------
// Imputation of untyped loci

struct WindowSpec {
  /// Typed loci taken on each side of the untyped target.
  std::size_t flank = 10;
};

/// A local model span: typed flanks around one run of untyped loci that
/// share the same flanks. All indices refer to the full locus map.
struct Window {
  std::vector<std::size_t> loci;
  std::vector<std::size_t> targets;
};

/// Groups untyped loci by their flanking typed loci. Each side takes up to
/// `flank` nearest typed loci; a side near a chromosome end keeps what is
/// available. Throws InputError when a target has no typed locus at all.
std::vector<Window> plan_windows(const LocusMap& map, const WindowSpec& spec);

struct ImputeOptions {
  WindowSpec window;
  TrainConfig train;
  /// Local models use train with max_iterations replaced by this value.
  std::size_t window_max_iterations = 50;
  BatchOptions batch;
  /// Windows processed concurrently; 0 uses available parallelism.
  std::size_t threads = 1;
};

struct ImputationEntry {
  std::size_t sample = 0;
  /// Index into the full locus map.
  std::size_t locus = 0;
  EmissionTriple q{};
  Genotype call = Genotype::HomMajor;
  double confidence = 0.0;
};

struct ImputationStats {
  std::size_t windows = 0;
  std::size_t targets = 0;
  std::size_t forward_evaluations = 0;
  std::size_t backward_evaluations = 0;
  std::size_t naive_evaluations = 0;
  std::size_t zero_probability_samples = 0;
};

struct ImputationResult {
  std::vector<std::string> sample_ids;
  std::vector<std::string> locus_ids;
  /// Ordered by (target locus, sample).
  std::vector<ImputationEntry> entries;
  ImputationStats stats;
};

/// Trains the local model of `window` on the reference panel (full-map
/// haplotypes) restricted to the window loci.
FounderHMM window_model(const HaplotypePanel& reference, const Window& window, const ImputeOptions& options);

/// Genotype posteriors at every untyped locus of `map`. `typed_corpus` holds
/// the typed loci only, in map order; `reference` covers every locus.
ImputationResult impute_untyped(const HaplotypePanel& reference, const GenotypeCorpus& typed_corpus,
                                const LocusMap& map, const ImputeOptions& options);

/// argmax over a posterior triple, ties to the smaller code.
Genotype argmax_call(const EmissionTriple& q) noexcept;

// ---------------------------------------------------------------------------
// Haplotype-pair decoding

struct PhasedPair {
  HaplotypeSequence first;
  HaplotypeSequence second;
  std::vector<std::size_t> founders_first;
  std::vector<std::size_t> founders_second;
  /// log of the joint probability of the decoded founder-pair path and g.
  double log_probability = kNegInf;
};

/// Most probable founder-pair path (max-product form of the collapsed
/// recurrences), then the most probable allele pair per locus consistent
/// with g. The pair is ordered so that first <= second lexicographically.
/// Throws ZeroProbabilityError for an impossible genotype.
PhasedPair phase_decode(const FounderHMM& model, const MultilocusGenotype& g);

// ---------------------------------------------------------------------------
// Composed flows

enum class PipelineMode { Imp, EdcMdrImp };

struct StageReport {
  std::string name;
  double seconds = 0.0;
  std::size_t changes = 0;
  /// samples x loci touched by the stage.
  std::size_t locus_evaluations = 0;
};

struct PipelineParams {
  PipelineMode mode = PipelineMode::Imp;
  ImputeOptions impute;
  /// Whole-chromosome model over typed loci used by the repair stages.
  TrainConfig typed_train;
  double threshold = kDefaultErrorThreshold;
};

struct PipelineResult {
  ImputationResult imputation;
  std::vector<StageReport> stages;
  /// Typed corpus handed to imputation (repaired in EdcMdrImp mode).
  GenotypeCorpus typed_corpus;
  ErrorReport errors;
  std::vector<Fill> fills;
};

PipelineResult run_pipeline(const HaplotypePanel& reference, const GenotypeCorpus& typed_corpus, const LocusMap& map,
                            const PipelineParams& params);

}  // namespace fhmm

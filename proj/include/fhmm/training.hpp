#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "fhmm/founder_hmm.hpp"
#include "fhmm/genotype.hpp"

namespace fhmm {

struct TrainConfig {
  std::size_t founders = 7;
  std::size_t max_iterations = 100;
  /// Stop when (L_t - L_{t-1}) / |L_{t-1}| falls below this.
  double tolerance = 1e-5;
  std::uint64_t seed = 1;
  /// Added to every expected-count cell before normalizing.
  double pseudocount = 1e-6;
  /// E-step workers; 0 uses available parallelism. Output does not depend on it.
  std::size_t threads = 1;

  void validate() const;
};

struct TrainReport {
  std::size_t iterations_run = 0;
  /// Total panel log-likelihood of the parameters entering each iteration,
  /// followed by that of the returned model.
  std::vector<double> loglik_trace;
  bool converged = false;
};

/// Called with (iteration, model) after every M-step.
using TrainObserver = std::function<void(std::size_t, const FounderHMM&)>;

struct TrainResult {
  FounderHMM model;
  TrainReport report;
};

/// Baum-Welch estimation of a single founder chain from complete
/// haplotypes. Identical haplotypes are pooled and the panel is put in a
/// canonical order first, so the result does not depend on panel order.
/// Throws InputError for an empty or ragged panel.
TrainResult train_founder_hmm(const HaplotypePanel& panel, const TrainConfig& config,
                              const TrainObserver& observer = {});

/// Seeded starting point used by train_founder_hmm.
FounderHMM initial_model(std::size_t founders, std::size_t loci, std::uint64_t seed);

/// log P(h) under the single-chain model; -inf if h is impossible.
double loglik_haplotype(const FounderHMM& model, const HaplotypeSequence& h);

}  // namespace fhmm

#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "fhmm/founder_hmm.hpp"
#include "fhmm/genotype.hpp"

namespace fhmm {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Scaled forward matrices F^i[f][f'] = P(g_0..g_{i-1}, f_i, f'_i).
///
/// Block i is F^i divided by its running normalizer, so each block sums to 1
/// (or is all zero past a zero-probability locus). scale_factors[i] is the
/// entry sum of the unnormalized block i given block i-1, and log_prefix[i]
/// is the sum of their logs, so F^i = matrix(i) * exp(log_prefix[i]).
struct ForwardResult {
  std::size_t founders = 0;
  std::size_t loci = 0;
  std::vector<double> matrices;
  std::vector<double> scale_factors;
  std::vector<double> log_prefix;
  /// sum_{f,f'} F^{n-1} E^{n-1}(g_{n-1}) on the scaled last block.
  double terminal_mass = 0.0;
  double log_likelihood = kNegInf;
  /// First locus whose observation makes the genotype impossible.
  std::optional<std::size_t> zero_locus;

  std::span<const double> matrix(std::size_t i) const {
    return {matrices.data() + i * founders * founders, founders * founders};
  }
};

/// Scaled backward matrices B^i[f][f'] = P(g_{i+1}..g_{n-1} | f_i, f'_i).
/// The last block is all ones with scale factor 1; earlier blocks are
/// normalized to sum 1 and B^i = matrix(i) * exp(log_suffix[i]).
struct BackwardResult {
  std::size_t founders = 0;
  std::size_t loci = 0;
  std::vector<double> matrices;
  std::vector<double> scale_factors;
  std::vector<double> log_suffix;
  /// sum_{f,f'} pi_f pi_f' E^0(g_0) B^0 on the scaled first block.
  double initial_mass = 0.0;
  double log_likelihood = kNegInf;
  std::optional<std::size_t> zero_locus;

  std::span<const double> matrix(std::size_t i) const {
    return {matrices.data() + i * founders * founders, founders * founders};
  }
};

struct ForwardBackwardResult {
  ForwardResult forward;
  BackwardResult backward;
  double log_likelihood = kNegInf;
};

/// Per-locus genotype posteriors: q[i][x] is P(g[g_i <- x]) renormalized
/// over x, and log_marginal[i] = log sum_x P(g[g_i <- x]), i.e. the log
/// probability of g with locus i marginalized.
struct PosteriorTable {
  std::vector<EmissionTriple> q;
  std::vector<double> log_marginal;

  std::size_t size() const noexcept { return q.size(); }
  /// log P(g[g_i <- x]); -inf when that substitution is impossible.
  double log_substitution(std::size_t i, Genotype x) const;
};

/// Inference output for one sample that may have probability zero. When
/// zero_locus is set, loci whose marginal vanishes carry q = (0,0,0) and
/// log_marginal = -inf.
struct SampleInference {
  double log_likelihood = kNegInf;
  PosteriorTable table;
  std::optional<std::size_t> zero_locus;
};

/// Forward pass using the collapsed O(nK^3) recurrences. Throws InputError
/// on length mismatch and ZeroProbabilityError when g is impossible.
ForwardResult forward(const FounderHMM& model, const MultilocusGenotype& g);

/// Mirror of forward(); the last block is the all-ones matrix.
BackwardResult backward(const FounderHMM& model, const MultilocusGenotype& g);

ForwardBackwardResult forward_backward(const FounderHMM& model, const MultilocusGenotype& g);

/// log P(g); -inf for zero-probability genotypes. Missing loci are
/// marginalized.
double total_log_likelihood(const FounderHMM& model, const MultilocusGenotype& g);

/// All single-locus substitution probabilities in one forward-backward
/// sweep. Throws ZeroProbabilityError naming the first locus whose
/// marginal is zero.
PosteriorTable genotype_posteriors(const FounderHMM& model, const MultilocusGenotype& g);

/// Non-throwing counterpart of genotype_posteriors() used by batch callers.
SampleInference infer_sample(const FounderHMM& model, const MultilocusGenotype& g);

namespace detail {

ForwardResult forward_pass(const FounderHMM& model, const MultilocusGenotype& g);
BackwardResult backward_pass(const FounderHMM& model, const MultilocusGenotype& g);

/// Combines scaled forward and backward blocks at one locus into the
/// posterior row. Shared with the trie engine.
void posterior_row(std::span<const double> f, double log_f, std::span<const double> b, double log_b,
                   std::span<const double> p, std::size_t k, EmissionTriple& q, double& log_marginal);

}  // namespace detail

}  // namespace fhmm

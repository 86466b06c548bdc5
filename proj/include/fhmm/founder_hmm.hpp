#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "fhmm/genotype.hpp"

namespace fhmm {

/// Probability of each called genotype (0, 1, 2) given a founder pair.
using EmissionTriple = std::array<double, 3>;

/// Locus-indexed founder chain shared by both haplotypes of an individual.
///
/// Storage is linear-space and row-major:
///  - initial[f]                      P(f_1 = f)
///  - transition(i, a, b)             P(f_{i+1} = b | f_i = a), i in [0, n-1)
///  - emission(i, f)                  P(h_i = 1 | f_i = f)
///
/// The constructor validates stochasticity (tolerance 1e-9) and throws
/// InputError on violation. Instances are immutable.
class FounderHMM {
 public:
  static constexpr double kStochasticTolerance = 1e-9;

  FounderHMM(std::size_t founders, std::size_t loci, std::vector<double> initial,
             std::vector<double> transitions, std::vector<double> emissions);

  std::size_t founders() const noexcept { return k_; }
  std::size_t loci() const noexcept { return n_; }

  double initial(std::size_t f) const { return initial_[f]; }
  double transition(std::size_t i, std::size_t from, std::size_t to) const {
    return transitions_[(i * k_ + from) * k_ + to];
  }
  double emission(std::size_t i, std::size_t f) const { return emissions_[i * k_ + f]; }

  std::span<const double> initial() const noexcept { return initial_; }
  /// K x K row-major matrix of the interval between locus i and i+1.
  std::span<const double> transition_matrix(std::size_t i) const {
    return {transitions_.data() + i * k_ * k_, k_ * k_};
  }
  /// Minor-allele probabilities for every founder at locus i.
  std::span<const double> emission_row(std::size_t i) const { return {emissions_.data() + i * k_, k_}; }

  const std::vector<double>& initial_vector() const noexcept { return initial_; }
  const std::vector<double>& transitions() const noexcept { return transitions_; }
  const std::vector<double>& emissions() const noexcept { return emissions_; }

  bool operator==(const FounderHMM&) const = default;

 private:
  std::size_t k_;
  std::size_t n_;
  std::vector<double> initial_;
  std::vector<double> transitions_;
  std::vector<double> emissions_;
};

/// Genotype distribution at locus i for the founder pair (f, f'):
/// sum over h + h' = x of P(h | f) P(h' | f'). Throws std::out_of_range on
/// bad indices.
EmissionTriple emission_table(const FounderHMM& model, std::size_t i, std::size_t f, std::size_t f2);

/// Same quantity from the two minor-allele probabilities.
constexpr EmissionTriple emission_triple(double p, double p2) noexcept {
  return {(1.0 - p) * (1.0 - p2), p * (1.0 - p2) + (1.0 - p) * p2, p * p2};
}

/// Model over the loci of `indices` (increasing). Transitions across skipped
/// loci are the products of the intervening matrices.
FounderHMM restrict_model(const FounderHMM& model, const std::vector<std::size_t>& indices);

/// The same joint distribution over founder paths read right-to-left: the
/// initial distribution is the last-locus marginal and each transition is the
/// time-reversed kernel of the forward chain.
FounderHMM reverse_model(const FounderHMM& model);

}  // namespace fhmm

#include "fhmm/founder_hmm.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "fhmm/errors.hpp"

namespace fhmm {
namespace {

void check_distribution(std::span<const double> p, const std::string& what) {
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw InputError(what + " has a negative or non-finite entry");
    sum += v;
  }
  if (std::abs(sum - 1.0) > FounderHMM::kStochasticTolerance) {
    throw InputError(what + " sums to " + std::to_string(sum) + ", expected 1");
  }
}

}  // namespace

FounderHMM::FounderHMM(std::size_t founders, std::size_t loci, std::vector<double> initial,
                       std::vector<double> transitions, std::vector<double> emissions)
    : k_(founders),
      n_(loci),
      initial_(std::move(initial)),
      transitions_(std::move(transitions)),
      emissions_(std::move(emissions)) {
  if (k_ < 1) throw InputError("founder count must be at least 1");
  if (n_ < 1) throw InputError("locus count must be at least 1");
  if (initial_.size() != k_) throw InputError("initial distribution must have K entries");
  if (transitions_.size() != (n_ - 1) * k_ * k_) throw InputError("expected (n-1) K x K transition matrices");
  if (emissions_.size() != n_ * k_) throw InputError("expected n x K emission probabilities");

  check_distribution(initial_, "initial distribution");
  for (std::size_t i = 0; i + 1 < n_; ++i) {
    for (std::size_t a = 0; a < k_; ++a) {
      check_distribution({transitions_.data() + (i * k_ + a) * k_, k_},
                         "transition row " + std::to_string(a) + " of interval " + std::to_string(i));
    }
  }
  for (std::size_t j = 0; j < emissions_.size(); ++j) {
    double e = emissions_[j];
    if (!(e >= 0.0 && e <= 1.0)) {
      throw InputError("emission probability at locus " + std::to_string(j / k_) + " founder " +
                       std::to_string(j % k_) + " outside [0,1]");
    }
  }
}

EmissionTriple emission_table(const FounderHMM& model, std::size_t i, std::size_t f, std::size_t f2) {
  if (i >= model.loci()) throw std::out_of_range("locus index " + std::to_string(i) + " out of range");
  if (f >= model.founders() || f2 >= model.founders()) {
    throw std::out_of_range("founder index out of range");
  }
  return emission_triple(model.emission(i, f), model.emission(i, f2));
}

FounderHMM restrict_model(const FounderHMM& model, const std::vector<std::size_t>& indices) {
  const std::size_t k = model.founders();
  if (indices.empty()) throw InputError("cannot restrict a model to zero loci");
  for (std::size_t j = 0; j < indices.size(); ++j) {
    if (indices[j] >= model.loci() || (j > 0 && indices[j] <= indices[j - 1])) {
      throw InputError("restriction indices must be increasing and in range");
    }
  }

  // Marginal of the first kept locus becomes the new initial distribution.
  std::vector<double> initial(model.initial().begin(), model.initial().end());
  for (std::size_t i = 0; i < indices.front(); ++i) {
    std::vector<double> next(k, 0.0);
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t b = 0; b < k; ++b) next[b] += initial[a] * model.transition(i, a, b);
    initial = std::move(next);
  }

  std::vector<double> transitions;
  transitions.reserve((indices.size() - 1) * k * k);
  for (std::size_t j = 0; j + 1 < indices.size(); ++j) {
    std::vector<double> prod(k * k, 0.0);
    for (std::size_t a = 0; a < k; ++a) prod[a * k + a] = 1.0;
    for (std::size_t i = indices[j]; i < indices[j + 1]; ++i) {
      std::vector<double> next(k * k, 0.0);
      for (std::size_t a = 0; a < k; ++a)
        for (std::size_t c = 0; c < k; ++c) {
          double v = prod[a * k + c];
          if (v == 0.0) continue;
          for (std::size_t b = 0; b < k; ++b) next[a * k + b] += v * model.transition(i, c, b);
        }
      prod = std::move(next);
    }
    transitions.insert(transitions.end(), prod.begin(), prod.end());
  }

  std::vector<double> emissions;
  emissions.reserve(indices.size() * k);
  for (std::size_t i : indices) {
    auto row = model.emission_row(i);
    emissions.insert(emissions.end(), row.begin(), row.end());
  }
  return FounderHMM(k, indices.size(), std::move(initial), std::move(transitions), std::move(emissions));
}

FounderHMM reverse_model(const FounderHMM& model) {
  const std::size_t k = model.founders();
  const std::size_t n = model.loci();

  std::vector<std::vector<double>> marginal(n, std::vector<double>(k, 0.0));
  marginal[0].assign(model.initial().begin(), model.initial().end());
  for (std::size_t i = 0; i + 1 < n; ++i)
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t b = 0; b < k; ++b) marginal[i + 1][b] += marginal[i][a] * model.transition(i, a, b);

  std::vector<double> transitions;
  transitions.reserve((n - 1) * k * k);
  // Reversed interval j joins original loci n-1-j (from) and n-2-j (to).
  for (std::size_t j = 0; j + 1 < n; ++j) {
    const std::size_t i = n - 2 - j;
    for (std::size_t b = 0; b < k; ++b) {
      const double mb = marginal[i + 1][b];
      for (std::size_t a = 0; a < k; ++a) {
        transitions.push_back(mb > 0.0 ? marginal[i][a] * model.transition(i, a, b) / mb
                                       : 1.0 / static_cast<double>(k));
      }
    }
  }

  std::vector<double> emissions;
  emissions.reserve(n * k);
  for (std::size_t j = 0; j < n; ++j) {
    auto row = model.emission_row(n - 1 - j);
    emissions.insert(emissions.end(), row.begin(), row.end());
  }
  return FounderHMM(k, n, marginal[n - 1], std::move(transitions), std::move(emissions));
}

}  // namespace fhmm

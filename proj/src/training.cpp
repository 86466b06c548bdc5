#include "fhmm/training.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <string>

#include "fhmm/errors.hpp"
#include "fhmm/inference.hpp"
#include "fhmm/parallel.hpp"

namespace fhmm {

void TrainConfig::validate() const {
  if (founders < 1) throw InputError("founder count must be at least 1");
  if (max_iterations < 1) throw InputError("max_iterations must be at least 1");
  if (!(tolerance >= 0.0)) throw InputError("tolerance must be non-negative");
  if (!(pseudocount >= 0.0)) throw InputError("pseudocount must be non-negative");
}

namespace {

struct WeightedHaplotype {
  std::vector<std::uint8_t> alleles;
  double weight = 0.0;
};

std::vector<WeightedHaplotype> pool_panel(const HaplotypePanel& panel) {
  std::map<std::vector<std::uint8_t>, double> pooled;
  for (const auto& h : panel) {
    std::vector<std::uint8_t> a(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) a[i] = static_cast<std::uint8_t>(code(h[i]));
    pooled[std::move(a)] += 1.0;
  }
  std::vector<WeightedHaplotype> out;
  out.reserve(pooled.size());
  for (auto& [alleles, w] : pooled) out.push_back({alleles, w});
  return out;
}

struct Counts {
  std::vector<double> initial;
  std::vector<double> transitions;
  std::vector<double> emit_minor;
  std::vector<double> emit_total;
  double loglik = 0.0;

  Counts(std::size_t k, std::size_t n)
      : initial(k, 0.0), transitions((n - 1) * k * k, 0.0), emit_minor(n * k, 0.0), emit_total(n * k, 0.0) {}

  void add(const Counts& o) {
    auto acc = [](std::vector<double>& a, const std::vector<double>& b) {
      for (std::size_t j = 0; j < a.size(); ++j) a[j] += b[j];
    };
    acc(initial, o.initial);
    acc(transitions, o.transitions);
    acc(emit_minor, o.emit_minor);
    acc(emit_total, o.emit_total);
    loglik += o.loglik;
  }
};

inline double emit(const FounderHMM& m, std::size_t i, std::size_t f, std::uint8_t allele) {
  const double p = m.emission(i, f);
  return allele ? p : 1.0 - p;
}

/// Scaled single-chain forward. alpha is n x K; returns log P(h).
double chain_forward(const FounderHMM& m, const std::uint8_t* h, std::vector<double>& alpha,
                     std::vector<double>& scale) {
  const std::size_t k = m.founders();
  const std::size_t n = m.loci();
  double ll = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double* cur = alpha.data() + i * k;
    if (i == 0) {
      for (std::size_t f = 0; f < k; ++f) cur[f] = m.initial(f) * emit(m, 0, f, h[0]);
    } else {
      const double* prev = alpha.data() + (i - 1) * k;
      std::fill(cur, cur + k, 0.0);
      for (std::size_t a = 0; a < k; ++a) {
        if (prev[a] == 0.0) continue;
        for (std::size_t b = 0; b < k; ++b) cur[b] += prev[a] * m.transition(i - 1, a, b);
      }
      for (std::size_t b = 0; b < k; ++b) cur[b] *= emit(m, i, b, h[i]);
    }
    double c = 0.0;
    for (std::size_t f = 0; f < k; ++f) c += cur[f];
    scale[i] = c;
    if (c == 0.0) return kNegInf;
    for (std::size_t f = 0; f < k; ++f) cur[f] /= c;
    ll += std::log(c);
  }
  return ll;
}

void accumulate(const FounderHMM& m, const WeightedHaplotype& wh, Counts& counts, std::vector<double>& alpha,
                std::vector<double>& beta, std::vector<double>& scale, std::vector<double>& tmp) {
  const std::size_t k = m.founders();
  const std::size_t n = m.loci();
  const std::uint8_t* h = wh.alleles.data();
  const double ll = chain_forward(m, h, alpha, scale);
  if (ll == kNegInf) {
    counts.loglik = kNegInf;
    return;
  }
  counts.loglik += wh.weight * ll;

  std::fill(beta.begin() + static_cast<std::ptrdiff_t>((n - 1) * k), beta.end(), 1.0);
  for (std::size_t i = n - 1; i-- > 0;) {
    // tmp[b] = e_{i+1}(b) beta_{i+1}(b) / c_{i+1}
    for (std::size_t b = 0; b < k; ++b) tmp[b] = emit(m, i + 1, b, h[i + 1]) * beta[(i + 1) * k + b] / scale[i + 1];
    const double* alpha_i = alpha.data() + i * k;
    double* trans = counts.transitions.data() + i * k * k;
    for (std::size_t a = 0; a < k; ++a) {
      double acc = 0.0;
      for (std::size_t b = 0; b < k; ++b) {
        const double t = m.transition(i, a, b) * tmp[b];
        acc += t;
        trans[a * k + b] += wh.weight * alpha_i[a] * t;
      }
      beta[i * k + a] = acc;
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t f = 0; f < k; ++f) {
      const double gamma = wh.weight * alpha[i * k + f] * beta[i * k + f];
      counts.emit_total[i * k + f] += gamma;
      if (h[i]) counts.emit_minor[i * k + f] += gamma;
      if (i == 0) counts.initial[f] += gamma;
    }
  }
}

Counts expectation(const FounderHMM& m, const std::vector<WeightedHaplotype>& pool, std::size_t threads) {
  const std::size_t k = m.founders();
  const std::size_t n = m.loci();
  // Fixed chunking keeps the summation order independent of the thread count.
  const std::size_t chunk = std::max<std::size_t>(32, (pool.size() + 63) / 64);
  const std::size_t chunks = (pool.size() + chunk - 1) / chunk;
  std::vector<Counts> partial(chunks, Counts(k, n));
  parallel_for(chunks, threads, [&](std::size_t c) {
    std::vector<double> alpha(n * k), beta(n * k), scale(n), tmp(k);
    const std::size_t end = std::min(pool.size(), (c + 1) * chunk);
    for (std::size_t j = c * chunk; j < end; ++j) accumulate(m, pool[j], partial[c], alpha, beta, scale, tmp);
  });
  Counts total(k, n);
  for (const auto& p : partial) total.add(p);
  return total;
}

void normalize_into(const double* counts, const double* previous, std::size_t size, double pseudocount,
                    std::vector<double>& out) {
  double denom = 0.0;
  for (std::size_t j = 0; j < size; ++j) denom += counts[j] + pseudocount;
  if (!(denom > 0.0)) {
    out.insert(out.end(), previous, previous + size);
    return;
  }
  for (std::size_t j = 0; j < size; ++j) out.push_back((counts[j] + pseudocount) / denom);
}

FounderHMM maximization(const FounderHMM& m, const Counts& counts, double pc) {
  const std::size_t k = m.founders();
  const std::size_t n = m.loci();
  std::vector<double> initial, transitions, emissions;
  initial.reserve(k);
  transitions.reserve((n - 1) * k * k);
  emissions.reserve(n * k);
  normalize_into(counts.initial.data(), m.initial().data(), k, pc, initial);
  for (std::size_t r = 0; r < (n - 1) * k; ++r) {
    normalize_into(counts.transitions.data() + r * k, m.transitions().data() + r * k, k, pc, transitions);
  }
  for (std::size_t j = 0; j < n * k; ++j) {
    const double den = counts.emit_total[j] + 2.0 * pc;
    emissions.push_back(den > 0.0 ? std::clamp((counts.emit_minor[j] + pc) / den, 0.0, 1.0) : m.emissions()[j]);
  }
  return FounderHMM(k, n, std::move(initial), std::move(transitions), std::move(emissions));
}

double relative_improvement(double current, double previous) {
  if (current == previous) return 0.0;
  return (current - previous) / std::max(std::abs(previous), 1e-300);
}

}  // namespace

FounderHMM initial_model(std::size_t founders, std::size_t loci, std::uint64_t seed) {
  if (founders < 1 || loci < 1) throw InputError("model needs at least one founder and one locus");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(-0.05, 0.05);
  std::uniform_real_distribution<double> emission(0.1, 0.9);

  auto jittered_uniform = [&](std::vector<double>& out) {
    std::vector<double> row(founders);
    double total = 0.0;
    for (auto& v : row) total += (v = 1.0 + jitter(rng));
    for (double v : row) out.push_back(v / total);
  };

  std::vector<double> initial, transitions, emissions;
  jittered_uniform(initial);
  for (std::size_t r = 0; r < (loci - 1) * founders; ++r) jittered_uniform(transitions);
  for (std::size_t j = 0; j < loci * founders; ++j) emissions.push_back(emission(rng));
  return FounderHMM(founders, loci, std::move(initial), std::move(transitions), std::move(emissions));
}

TrainResult train_founder_hmm(const HaplotypePanel& panel, const TrainConfig& config,
                              const TrainObserver& observer) {
  config.validate();
  if (panel.empty()) throw InputError("training panel is empty");
  const std::size_t n = panel.front().size();
  if (n < 1) throw InputError("training haplotypes must cover at least one locus");
  check_panel_shape(panel, n);

  const auto pool = pool_panel(panel);
  FounderHMM model = initial_model(config.founders, n, config.seed);
  TrainReport report;

  for (std::size_t it = 0; it < config.max_iterations; ++it) {
    const Counts counts = expectation(model, pool, config.threads);
    report.loglik_trace.push_back(counts.loglik);
    if (it > 0 && relative_improvement(counts.loglik, report.loglik_trace[it - 1]) < config.tolerance) {
      report.converged = true;
      break;
    }
    model = maximization(model, counts, config.pseudocount);
    report.iterations_run = it + 1;
    if (observer) observer(it, model);
  }

  if (!report.converged) {
    const double ll = expectation(model, pool, config.threads).loglik;
    report.converged = relative_improvement(ll, report.loglik_trace.back()) < config.tolerance;
    report.loglik_trace.push_back(ll);
  }
  return {std::move(model), std::move(report)};
}

double loglik_haplotype(const FounderHMM& model, const HaplotypeSequence& h) {
  if (h.size() != model.loci()) {
    throw InputError("haplotype '" + h.id + "' has " + std::to_string(h.size()) + " loci but the model has " +
                     std::to_string(model.loci()));
  }
  std::vector<std::uint8_t> a(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) a[i] = static_cast<std::uint8_t>(code(h[i]));
  std::vector<double> alpha(model.loci() * model.founders()), scale(model.loci());
  return chain_forward(model, a.data(), alpha, scale);
}

}  // namespace fhmm

#include "fhmm/inference.hpp"

#include <cmath>
#include <string>

#include "fhmm/errors.hpp"
#include "kernels.hpp"

namespace fhmm {
namespace {

void check_length(const FounderHMM& model, const MultilocusGenotype& g) {
  if (g.size() != model.loci()) {
    throw InputError("genotype '" + g.sample_id + "' has " + std::to_string(g.size()) +
                     " loci but the model has " + std::to_string(model.loci()));
  }
}

[[noreturn]] void throw_zero(const MultilocusGenotype& g, std::size_t locus) {
  throw ZeroProbabilityError(locus, "genotype '" + g.sample_id + "' has probability zero (locus " +
                                        std::to_string(locus) + ")");
}

}  // namespace

double PosteriorTable::log_substitution(std::size_t i, Genotype x) const {
  const double v = q.at(i)[static_cast<std::size_t>(code(x))];
  if (v <= 0.0) return kNegInf;
  return log_marginal[i] + std::log(v);
}

namespace detail {

ForwardResult forward_pass(const FounderHMM& model, const MultilocusGenotype& g) {
  check_length(model, g);
  const std::size_t k = model.founders();
  const std::size_t n = model.loci();
  const std::size_t kk = k * k;

  ForwardResult r;
  r.founders = k;
  r.loci = n;
  r.matrices.assign(n * kk, 0.0);
  r.scale_factors.assign(n, 0.0);
  r.log_prefix.assign(n, 0.0);
  std::vector<double> fe(kk), c(kk);

  double* f0 = r.matrices.data();
  const double c0 = initial_pair(model, f0);
  normalize(f0, kk, c0);
  r.scale_factors[0] = c0;
  r.log_prefix[0] = std::log(c0);

  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double total = forward_advance(model, i, r.matrices.data() + i * kk, g[i], fe.data(), c.data(),
                                         r.matrices.data() + (i + 1) * kk);
    r.scale_factors[i + 1] = total;
    r.log_prefix[i + 1] = r.log_prefix[i] + std::log(total);
    if (total == 0.0 && !r.zero_locus) r.zero_locus = i;
  }

  r.terminal_mass = emitted_mass(model, n - 1, r.matrices.data() + (n - 1) * kk, g[n - 1], fe.data());
  if (r.terminal_mass == 0.0 && !r.zero_locus) r.zero_locus = n - 1;
  r.log_likelihood = r.log_prefix[n - 1] + std::log(r.terminal_mass);
  return r;
}

BackwardResult backward_pass(const FounderHMM& model, const MultilocusGenotype& g) {
  check_length(model, g);
  const std::size_t k = model.founders();
  const std::size_t n = model.loci();
  const std::size_t kk = k * k;

  BackwardResult r;
  r.founders = k;
  r.loci = n;
  r.matrices.assign(n * kk, 0.0);
  r.scale_factors.assign(n, 1.0);
  r.log_suffix.assign(n, 0.0);
  std::vector<double> be(kk), d(kk);

  double* last = r.matrices.data() + (n - 1) * kk;
  for (std::size_t j = 0; j < kk; ++j) last[j] = 1.0;

  for (std::size_t i = n - 1; i-- > 0;) {
    const double total = backward_advance(model, i, r.matrices.data() + (i + 1) * kk, g[i + 1], be.data(),
                                          d.data(), r.matrices.data() + i * kk);
    r.scale_factors[i] = total;
    r.log_suffix[i] = r.log_suffix[i + 1] + std::log(total);
    if (total == 0.0 && !r.zero_locus) r.zero_locus = i + 1;
  }

  std::vector<double> prior(kk);
  initial_pair(model, prior.data());
  for (std::size_t j = 0; j < kk; ++j) prior[j] *= r.matrices[j];
  r.initial_mass = emitted_mass(model, 0, prior.data(), g[0], be.data());
  if (r.initial_mass == 0.0 && !r.zero_locus) r.zero_locus = 0;
  r.log_likelihood = r.log_suffix[0] + std::log(r.initial_mass);
  return r;
}

void posterior_row(std::span<const double> f, double log_f, std::span<const double> b, double log_b,
                   std::span<const double> p, std::size_t k, EmissionTriple& q, double& log_marginal) {
  const auto s = combine_locus(f.data(), b.data(), p, k);
  const double total = s[0] + s[1] + s[2];
  if (total > 0.0) {
    for (std::size_t x = 0; x < 3; ++x) q[x] = s[x] / total;
    log_marginal = log_f + log_b + std::log(total);
  } else {
    q = {0.0, 0.0, 0.0};
    log_marginal = kNegInf;
  }
}

}  // namespace detail

ForwardResult forward(const FounderHMM& model, const MultilocusGenotype& g) {
  ForwardResult r = detail::forward_pass(model, g);
  if (r.zero_locus) throw_zero(g, *r.zero_locus);
  return r;
}

BackwardResult backward(const FounderHMM& model, const MultilocusGenotype& g) {
  BackwardResult r = detail::backward_pass(model, g);
  if (r.zero_locus) throw_zero(g, *r.zero_locus);
  return r;
}

ForwardBackwardResult forward_backward(const FounderHMM& model, const MultilocusGenotype& g) {
  ForwardBackwardResult r{forward(model, g), backward(model, g), kNegInf};
  r.log_likelihood = r.forward.log_likelihood;
  return r;
}

double total_log_likelihood(const FounderHMM& model, const MultilocusGenotype& g) {
  return detail::forward_pass(model, g).log_likelihood;
}

SampleInference infer_sample(const FounderHMM& model, const MultilocusGenotype& g) {
  const ForwardResult fw = detail::forward_pass(model, g);
  const BackwardResult bw = detail::backward_pass(model, g);
  const std::size_t n = model.loci();
  const std::size_t k = model.founders();

  SampleInference out;
  out.log_likelihood = fw.log_likelihood;
  out.zero_locus = fw.zero_locus;
  out.table.q.resize(n);
  out.table.log_marginal.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    detail::posterior_row(fw.matrix(i), fw.log_prefix[i], bw.matrix(i), bw.log_suffix[i], model.emission_row(i),
                          k, out.table.q[i], out.table.log_marginal[i]);
  }
  return out;
}

PosteriorTable genotype_posteriors(const FounderHMM& model, const MultilocusGenotype& g) {
  SampleInference s = infer_sample(model, g);
  for (std::size_t i = 0; i < s.table.size(); ++i) {
    if (s.table.log_marginal[i] == kNegInf) throw_zero(g, s.zero_locus.value_or(i));
  }
  return std::move(s.table);
}

}  // namespace fhmm

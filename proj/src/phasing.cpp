#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>

#include "fhmm/analysis.hpp"
#include "fhmm/errors.hpp"
#include "kernels.hpp"

namespace fhmm {
namespace {

/// Most probable allele pair for founders with minor-allele probabilities
/// p and p2, restricted to pairs summing to g unless g is missing.
std::pair<Allele, Allele> best_alleles(double p, double p2, Genotype g) {
  double best = -1.0;
  std::pair<Allele, Allele> out{Allele::Major, Allele::Major};
  for (int h = 0; h < 2; ++h) {
    for (int h2 = 0; h2 < 2; ++h2) {
      if (!is_missing(g) && h + h2 != code(g)) continue;
      const double score = (h ? p : 1.0 - p) * (h2 ? p2 : 1.0 - p2);
      if (score > best) {
        best = score;
        out = {static_cast<Allele>(h), static_cast<Allele>(h2)};
      }
    }
  }
  return out;
}

}  // namespace

PhasedPair phase_decode(const FounderHMM& model, const MultilocusGenotype& g) {
  if (g.size() != model.loci()) {
    throw InputError("genotype '" + g.sample_id + "' has " + std::to_string(g.size()) + " loci but the model has " +
                     std::to_string(model.loci()));
  }
  const std::size_t k = model.founders();
  const std::size_t kk = k * k;
  const std::size_t n = model.loci();

  // back_outer[i][b][b'] = argmax a for V^{i+1}; back_inner[i][a][b'] = argmax a'.
  std::vector<std::uint32_t> back_outer((n - 1) * kk), back_inner((n - 1) * kk);
  std::vector<double> v(kk), w(kk), c(kk), next(kk);
  detail::initial_pair(model, v.data());
  auto rescale = [&](std::vector<double>& m) {
    double mx = 0.0;
    for (double x : m) mx = std::max(mx, x);
    if (mx > 0.0) {
      for (double& x : m) x /= mx;
    }
    return mx;
  };
  double log_scale = std::log(rescale(v));

  for (std::size_t i = 0; i + 1 < n; ++i) {
    detail::apply_emission(v, model.emission_row(i), g[i], k, w.data());
    const auto t = model.transition_matrix(i);
    std::uint32_t* inner = back_inner.data() + i * kk;
    std::uint32_t* outer = back_outer.data() + i * kk;
    for (std::size_t a = 0; a < k; ++a) {
      for (std::size_t b2 = 0; b2 < k; ++b2) {
        double best = -1.0;
        std::uint32_t arg = 0;
        for (std::size_t a2 = 0; a2 < k; ++a2) {
          const double s = w[a * k + a2] * t[a2 * k + b2];
          if (s > best) {
            best = s;
            arg = static_cast<std::uint32_t>(a2);
          }
        }
        c[a * k + b2] = best;
        inner[a * k + b2] = arg;
      }
    }
    for (std::size_t b = 0; b < k; ++b) {
      for (std::size_t b2 = 0; b2 < k; ++b2) {
        double best = -1.0;
        std::uint32_t arg = 0;
        for (std::size_t a = 0; a < k; ++a) {
          const double s = t[a * k + b] * c[a * k + b2];
          if (s > best) {
            best = s;
            arg = static_cast<std::uint32_t>(a);
          }
        }
        next[b * k + b2] = best;
        outer[b * k + b2] = arg;
      }
    }
    v.swap(next);
    const double mx = rescale(v);
    if (mx == 0.0) throw ZeroProbabilityError(i, "genotype '" + g.sample_id + "' has probability zero");
    log_scale += std::log(mx);
  }

  detail::apply_emission(v, model.emission_row(n - 1), g[n - 1], k, w.data());
  std::size_t best = 0;
  for (std::size_t j = 1; j < kk; ++j)
    if (w[j] > w[best]) best = j;
  if (w[best] == 0.0) throw ZeroProbabilityError(n - 1, "genotype '" + g.sample_id + "' has probability zero");

  PhasedPair out;
  out.log_probability = log_scale + std::log(w[best]);
  out.founders_first.resize(n);
  out.founders_second.resize(n);
  std::size_t f = best / k, f2 = best % k;
  for (std::size_t i = n; i-- > 0;) {
    out.founders_first[i] = f;
    out.founders_second[i] = f2;
    if (i == 0) break;
    const std::size_t a = back_outer[(i - 1) * kk + f * k + f2];
    const std::size_t a2 = back_inner[(i - 1) * kk + a * k + f2];
    f = a;
    f2 = a2;
  }

  out.first.id = g.sample_id + ".1";
  out.second.id = g.sample_id + ".2";
  out.first.alleles.resize(n);
  out.second.alleles.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto [h, h2] = best_alleles(model.emission(i, out.founders_first[i]),
                                      model.emission(i, out.founders_second[i]), g[i]);
    out.first.alleles[i] = h;
    out.second.alleles[i] = h2;
  }
  if (out.second.alleles < out.first.alleles) {
    std::swap(out.first.alleles, out.second.alleles);
    std::swap(out.founders_first, out.founders_second);
  }
  return out;
}

}  // namespace fhmm

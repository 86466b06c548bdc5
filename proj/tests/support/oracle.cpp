#include "oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace fhmm::testing {
namespace {

std::vector<double> random_distribution(std::size_t k, std::mt19937_64& rng, bool sparse) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> p(k);
  double total = 0.0;
  for (auto& v : p) {
    v = u(rng) + 1e-3;
    if (sparse && k > 1 && u(rng) < 0.2) v = 0.0;
    total += v;
  }
  if (total == 0.0) {
    p[0] = 1.0;
    total = 1.0;
  }
  for (auto& v : p) v /= total;
  return p;
}

double emission_of(const FounderHMM& m, std::size_t i, std::size_t f, std::size_t f2, Genotype g) {
  if (is_missing(g)) return 1.0;
  return emission_triple(m.emission(i, f), m.emission(i, f2))[code(g)];
}

double log_of_sum(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return std::log(s);
}

}  // namespace

MultilocusGenotype G(const std::string& symbols, const std::string& id) {
  MultilocusGenotype g{id, {}};
  for (char c : symbols) g.symbols.push_back(genotype_from_char(c).value());
  return g;
}

HaplotypeSequence H(const std::string& alleles, const std::string& id) {
  HaplotypeSequence h{id, {}};
  for (char c : alleles) h.alleles.push_back(allele_from_char(c).value());
  return h;
}

FounderHMM stationary_model(std::size_t k, std::vector<double> initial, const std::vector<double>& transition,
                            std::vector<double> emissions) {
  const std::size_t n = emissions.size() / k;
  std::vector<double> t;
  for (std::size_t i = 0; i + 1 < n; ++i) t.insert(t.end(), transition.begin(), transition.end());
  return FounderHMM(k, n, std::move(initial), std::move(t), std::move(emissions));
}

FounderHMM random_model(std::size_t k, std::size_t n, std::mt19937_64& rng, bool sparse) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> initial = random_distribution(k, rng, sparse);
  std::vector<double> transitions;
  for (std::size_t r = 0; r < (n - 1) * k; ++r) {
    auto row = random_distribution(k, rng, sparse);
    transitions.insert(transitions.end(), row.begin(), row.end());
  }
  std::vector<double> emissions(n * k);
  for (auto& e : emissions) {
    e = u(rng);
    if (sparse) {
      const double c = u(rng);
      if (c < 0.1) e = 0.0;
      else if (c < 0.2) e = 1.0;
    }
  }
  return FounderHMM(k, n, std::move(initial), std::move(transitions), std::move(emissions));
}

MultilocusGenotype random_genotype(std::size_t n, std::mt19937_64& rng, double missing, const std::string& id) {
  std::uniform_int_distribution<int> sym(0, 2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  MultilocusGenotype g{id, {}};
  for (std::size_t i = 0; i < n; ++i) {
    const int s = sym(rng);
    g.symbols.push_back(u(rng) < missing ? Genotype::Missing : genotype_from_code(s));
  }
  return g;
}

GenotypeCorpus random_genotypes(std::size_t m, std::size_t n, std::mt19937_64& rng, double missing) {
  GenotypeCorpus c;
  for (std::size_t s = 0; s < m; ++s) c.push_back(random_genotype(n, rng, missing, "s" + std::to_string(s)));
  return c;
}

HaplotypePanel random_panel(std::size_t m, std::size_t n, std::mt19937_64& rng) {
  std::bernoulli_distribution b(0.5);
  HaplotypePanel p;
  for (std::size_t s = 0; s < m; ++s) {
    HaplotypeSequence h{"h" + std::to_string(s), {}};
    for (std::size_t i = 0; i < n; ++i) h.alleles.push_back(b(rng) ? Allele::Minor : Allele::Major);
    p.push_back(std::move(h));
  }
  return p;
}

namespace {

std::vector<Allele> sample_chain(const FounderHMM& model, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::size_t k = model.founders();
  auto draw = [&](auto&& weight) {
    double r = u(rng), acc = 0.0;
    for (std::size_t f = 0; f < k; ++f) {
      acc += weight(f);
      if (r < acc) return f;
    }
    return k - 1;
  };
  std::vector<Allele> out;
  std::size_t f = draw([&](std::size_t x) { return model.initial(x); });
  for (std::size_t i = 0; i < model.loci(); ++i) {
    if (i > 0) f = draw([&](std::size_t x) { return model.transition(i - 1, f, x); });
    out.push_back(u(rng) < model.emission(i, f) ? Allele::Minor : Allele::Major);
  }
  return out;
}

}  // namespace

HaplotypePanel sample_panel(const FounderHMM& model, std::size_t m, std::mt19937_64& rng) {
  HaplotypePanel p;
  for (std::size_t s = 0; s < m; ++s) p.push_back({"h" + std::to_string(s), sample_chain(model, rng)});
  return p;
}

GenotypeCorpus sample_corpus(const FounderHMM& model, std::size_t m, std::mt19937_64& rng) {
  GenotypeCorpus c;
  for (std::size_t s = 0; s < m; ++s) {
    HaplotypeSequence a{"a", sample_chain(model, rng)}, b{"b", sample_chain(model, rng)};
    c.push_back(combine(a, b, "s" + std::to_string(s)));
  }
  return c;
}

Enumeration enumerate(const FounderHMM& model, const MultilocusGenotype& g) {
  const std::size_t k = model.founders(), n = model.loci();
  std::size_t paths = 1;
  for (std::size_t i = 0; i < n; ++i) paths *= k;

  // Path probabilities and founder sequences of a single chain.
  std::vector<std::vector<std::size_t>> seq(paths, std::vector<std::size_t>(n));
  std::vector<double> weight(paths);
  for (std::size_t p = 0; p < paths; ++p) {
    std::size_t rest = p;
    for (std::size_t i = 0; i < n; ++i) {
      seq[p][i] = rest % k;
      rest /= k;
    }
    double w = model.initial(seq[p][0]);
    for (std::size_t i = 1; i < n; ++i) w *= model.transition(i - 1, seq[p][i - 1], seq[p][i]);
    weight[p] = w;
  }

  Enumeration out;
  out.substitution.assign(n, {0.0, 0.0, 0.0});
  std::vector<double> e(n), prefix(n + 1), suffix(n + 1);
  for (std::size_t a = 0; a < paths; ++a) {
    if (weight[a] == 0.0) continue;
    for (std::size_t b = 0; b < paths; ++b) {
      const double w = weight[a] * weight[b];
      if (w == 0.0) continue;
      for (std::size_t i = 0; i < n; ++i) e[i] = emission_of(model, i, seq[a][i], seq[b][i], g[i]);
      prefix[0] = 1.0;
      for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] * e[i];
      suffix[n] = 1.0;
      for (std::size_t i = n; i-- > 0;) suffix[i] = suffix[i + 1] * e[i];
      const double joint = w * prefix[n];
      out.probability += joint;
      out.max_joint = std::max(out.max_joint, joint);
      for (std::size_t i = 0; i < n; ++i) {
        const double rest = w * prefix[i] * suffix[i + 1];
        if (rest == 0.0) continue;
        const auto t = emission_triple(model.emission(i, seq[a][i]), model.emission(i, seq[b][i]));
        for (int x = 0; x < 3; ++x) out.substitution[i][x] += rest * t[x];
      }
    }
  }
  return out;
}

double enumerate_haplotype(const FounderHMM& model, const HaplotypeSequence& h) {
  const std::size_t k = model.founders(), n = model.loci();
  std::size_t paths = 1;
  for (std::size_t i = 0; i < n; ++i) paths *= k;
  double total = 0.0;
  for (std::size_t p = 0; p < paths; ++p) {
    std::size_t rest = p, prev = 0;
    double w = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t f = rest % k;
      rest /= k;
      w *= i == 0 ? model.initial(f) : model.transition(i - 1, prev, f);
      const double e = model.emission(i, f);
      w *= h[i] == Allele::Minor ? e : 1.0 - e;
      prev = f;
    }
    total += w;
  }
  return total;
}

NaivePass naive_forward(const FounderHMM& model, const MultilocusGenotype& g) {
  const std::size_t k = model.founders(), n = model.loci();
  NaivePass out;
  std::vector<double> f(k * k);
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = 0; b < k; ++b) f[a * k + b] = model.initial(a) * model.initial(b);
  double log_scale = 0.0;
  auto push = [&](std::vector<double> block) {
    double s = 0.0;
    for (double v : block) s += v;
    if (s > 0.0) {
      for (auto& v : block) v /= s;
      log_scale += std::log(s);
    } else {
      log_scale = -std::numeric_limits<double>::infinity();
    }
    out.blocks.push_back(std::move(block));
  };
  push(f);
  for (std::size_t i = 1; i < n; ++i) {
    const auto& prev = out.blocks.back();
    std::vector<double> next(k * k, 0.0);
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t b = 0; b < k; ++b) {
        double s = 0.0;
        for (std::size_t c = 0; c < k; ++c)
          for (std::size_t d = 0; d < k; ++d) {
            s += prev[c * k + d] * model.transition(i - 1, c, a) * model.transition(i - 1, d, b) *
                 emission_of(model, i - 1, c, d, g[i - 1]);
          }
        next[a * k + b] = s;
      }
    push(std::move(next));
  }
  std::vector<double> last(k * k);
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = 0; b < k; ++b) last[a * k + b] = out.blocks.back()[a * k + b] * emission_of(model, n - 1, a, b, g[n - 1]);
  out.log_likelihood = log_scale + log_of_sum(last);
  return out;
}

NaivePass naive_backward(const FounderHMM& model, const MultilocusGenotype& g) {
  const std::size_t k = model.founders(), n = model.loci();
  NaivePass out;
  out.blocks.assign(n, std::vector<double>(k * k, 0.0));
  out.blocks[n - 1].assign(k * k, 1.0);
  double log_scale = 0.0;
  for (std::size_t i = n - 1; i-- > 0;) {
    const auto& next = out.blocks[i + 1];
    auto& cur = out.blocks[i];
    double s = 0.0;
    for (std::size_t c = 0; c < k; ++c)
      for (std::size_t d = 0; d < k; ++d) {
        double v = 0.0;
        for (std::size_t a = 0; a < k; ++a)
          for (std::size_t b = 0; b < k; ++b) {
            v += model.transition(i, c, a) * model.transition(i, d, b) * emission_of(model, i + 1, a, b, g[i + 1]) *
                 next[a * k + b];
          }
        cur[c * k + d] = v;
        s += v;
      }
    if (s > 0.0) {
      for (auto& v : cur) v /= s;
      log_scale += std::log(s);
    } else {
      log_scale = -std::numeric_limits<double>::infinity();
    }
  }
  std::vector<double> first(k * k);
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = 0; b < k; ++b) {
      first[a * k + b] = model.initial(a) * model.initial(b) * emission_of(model, 0, a, b, g[0]) * out.blocks[0][a * k + b];
    }
  out.log_likelihood = log_scale + log_of_sum(first);
  return out;
}

double relative_error(double a, double b) {
  if (a == b) return 0.0;
  const double scale = std::max(std::abs(a), std::abs(b));
  return std::abs(a - b) / scale;
}

}  // namespace fhmm::testing

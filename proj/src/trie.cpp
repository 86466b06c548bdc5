#include "fhmm/trie.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "fhmm/errors.hpp"
#include "fhmm/parallel.hpp"
#include "kernels.hpp"

namespace fhmm {
namespace {

constexpr std::size_t kNoSlot = std::numeric_limits<std::size_t>::max();

template <typename Visit>
void preorder(const GenotypeTrie& trie, Visit&& visit) {
  std::vector<std::int32_t> stack{0};
  while (!stack.empty()) {
    const std::int32_t v = stack.back();
    stack.pop_back();
    visit(static_cast<std::size_t>(v));
    const auto& children = trie.node(static_cast<std::size_t>(v)).children;
    for (std::size_t s = children.size(); s-- > 0;) {
      if (children[s] != GenotypeTrie::kNone) stack.push_back(children[s]);
    }
  }
}

}  // namespace

GenotypeTrie::GenotypeTrie(const GenotypeCorpus& corpus, bool reversed) : reversed_(reversed) {
  if (corpus.empty()) throw InputError("cannot build a trie over an empty corpus");
  loci_ = corpus.front().size();
  check_corpus_shape(corpus, loci_);

  nodes_.emplace_back();
  leaf_of_sample_.resize(corpus.size());
  for (std::size_t s = 0; s < corpus.size(); ++s) {
    const auto& symbols = corpus[s].symbols;
    std::size_t v = 0;
    ++nodes_[0].count;
    for (std::size_t d = 0; d < loci_; ++d) {
      const Genotype sym = reversed_ ? symbols[loci_ - 1 - d] : symbols[d];
      const auto slot = static_cast<std::size_t>(code(sym));
      std::int32_t child = nodes_[v].children[slot];
      if (child == kNone) {
        child = static_cast<std::int32_t>(nodes_.size());
        Node node;
        node.symbol = sym;
        node.depth = static_cast<std::uint32_t>(d + 1);
        node.parent = static_cast<std::int32_t>(v);
        nodes_.push_back(node);
        nodes_[v].children[slot] = child;
      }
      v = static_cast<std::size_t>(child);
      ++nodes_[v].count;
    }
    leaf_of_sample_[s] = v;
  }

  leaf_slot_.assign(nodes_.size(), kNoSlot);
  preorder(*this, [&](std::size_t v) {
    if (nodes_[v].depth == loci_) {
      leaf_slot_[v] = leaves_.size();
      leaves_.push_back(v);
    }
  });
  leaf_samples_.resize(leaves_.size());
  for (std::size_t s = 0; s < corpus.size(); ++s) leaf_samples_[leaf_slot_[leaf_of_sample_[s]]].push_back(s);
}

std::vector<std::size_t> GenotypeTrie::depth_counts() const {
  std::vector<std::size_t> counts(loci_, 0);
  for (std::size_t v = 1; v < nodes_.size(); ++v) ++counts[nodes_[v].depth - 1];
  return counts;
}

const std::vector<std::size_t>& GenotypeTrie::samples_at(std::size_t leaf) const {
  const std::size_t slot = leaf < leaf_slot_.size() ? leaf_slot_[leaf] : kNoSlot;
  if (slot == kNoSlot) throw std::out_of_range("node " + std::to_string(leaf) + " is not a leaf");
  return leaf_samples_[slot];
}

std::vector<std::size_t> GenotypeTrie::samples_through(std::size_t node) const {
  std::vector<std::size_t> out;
  std::vector<std::size_t> stack{node};
  while (!stack.empty()) {
    const std::size_t v = stack.back();
    stack.pop_back();
    if (leaf_slot_[v] != kNoSlot) {
      const auto& s = leaf_samples_[leaf_slot_[v]];
      out.insert(out.end(), s.begin(), s.end());
    }
    for (std::int32_t c : nodes_[v].children)
      if (c != kNone) stack.push_back(static_cast<std::size_t>(c));
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Genotype> GenotypeTrie::spell(std::size_t node) const {
  std::vector<Genotype> out(nodes_.at(node).depth);
  for (std::size_t v = node; v != 0; v = static_cast<std::size_t>(nodes_[v].parent)) {
    out[nodes_[v].depth - 1] = nodes_[v].symbol;
  }
  return out;
}

GenotypeTrie build_trie(const GenotypeCorpus& corpus) { return GenotypeTrie(corpus, false); }
GenotypeTrie reversed_trie(const GenotypeCorpus& corpus) { return GenotypeTrie(corpus, true); }

namespace {

BatchPosteriorResult naive_posteriors(const FounderHMM& model, const GenotypeCorpus& corpus,
                                      const BatchOptions& options) {
  BatchPosteriorResult out;
  out.samples.resize(corpus.size());
  parallel_for(corpus.size(), options.threads,
               [&](std::size_t s) { out.samples[s] = infer_sample(model, corpus[s]); });
  const std::size_t n = model.loci();
  out.stats.samples = corpus.size();
  out.stats.distinct_genotypes = corpus.size();
  out.stats.forward_evaluations = corpus.size() * n;
  out.stats.backward_evaluations = corpus.size() * n;
  out.stats.naive_evaluations = corpus.size() * n;
  return out;
}

/// Backward blocks per reversed-trie node: every node in full mode, only
/// block-end loci in checkpoint mode. Log suffix sums are kept for all nodes.
struct BackwardCache {
  std::size_t kk = 0;
  std::size_t block = 0;  // 0 = full caching
  std::vector<std::size_t> slot;
  std::vector<double> blocks;
  std::vector<double> log_suffix;

  const double* at(std::size_t node) const { return blocks.data() + slot[node] * kk; }
};

bool is_checkpoint(std::size_t locus, std::size_t n, std::size_t block) {
  return block == 0 || locus == n - 1 || (locus + 1) % block == 0;
}

BackwardCache backward_over_trie(const FounderHMM& model, const GenotypeTrie& rev, std::size_t block,
                                 BatchStats& stats) {
  const std::size_t k = model.founders();
  const std::size_t kk = k * k;
  const std::size_t n = model.loci();

  BackwardCache cache;
  cache.kk = kk;
  cache.block = block;
  cache.slot.assign(rev.nodes().size(), kNoSlot);
  cache.log_suffix.assign(rev.nodes().size(), 0.0);
  std::size_t slots = 0;
  for (std::size_t v = 0; v < rev.nodes().size(); ++v) {
    const std::size_t depth = rev.node(v).depth;
    if (depth < n && is_checkpoint(n - 1 - depth, n, block)) cache.slot[v] = slots++;
  }
  cache.blocks.assign(slots * kk, 0.0);

  // Path stack: stack[d] is the scaled block at reversed depth d (locus n-1-d).
  std::vector<double> stack(n * kk, 0.0);
  std::vector<double> be(kk), d(kk), prior(kk);
  for (std::size_t j = 0; j < kk; ++j) stack[j] = 1.0;
  detail::initial_pair(model, prior.data());

  preorder(rev, [&](std::size_t v) {
    const auto& node = rev.node(v);
    const std::size_t depth = node.depth;
    if (depth > 0) {
      const std::size_t parent = static_cast<std::size_t>(node.parent);
      ++stats.backward_evaluations;
      if (depth < n) {
        const std::size_t locus = n - 1 - depth;
        const double total = detail::backward_advance(model, locus, stack.data() + (depth - 1) * kk, node.symbol,
                                                      be.data(), d.data(), stack.data() + depth * kk);
        cache.log_suffix[v] = cache.log_suffix[parent] + std::log(total);
      } else {
        // Leaf: the symbol at locus 0 closes the backward recursion.
        cache.log_suffix[v] = cache.log_suffix[parent];
      }
    }
    if (cache.slot[v] != kNoSlot) {
      std::copy_n(stack.data() + depth * kk, kk, cache.blocks.data() + cache.slot[v] * kk);
    }
  });
  return cache;
}

BatchPosteriorResult trie_posteriors(const FounderHMM& model, const GenotypeCorpus& corpus,
                                     const BatchOptions& options) {
  const std::size_t k = model.founders();
  const std::size_t kk = k * k;
  const std::size_t n = model.loci();

  const GenotypeTrie prefix = build_trie(corpus);
  const GenotypeTrie rev = reversed_trie(corpus);

  BatchPosteriorResult out;
  out.samples.resize(corpus.size());
  out.stats.samples = corpus.size();
  out.stats.distinct_genotypes = prefix.distinct_count();
  out.stats.naive_evaluations = corpus.size() * n;

  std::size_t block = options.block_loci;
  if (block == 0) {
    const double full_bytes = static_cast<double>(rev.nodes().size()) * static_cast<double>(kk) * sizeof(double);
    if (full_bytes > static_cast<double>(options.cache_budget_bytes)) {
      block = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n)))));
    }
  }
  if (block >= n) block = 0;
  out.stats.block_loci = block;

  const BackwardCache cache = backward_over_trie(model, rev, block, out.stats);

  std::vector<double> fstack(n * kk, 0.0);
  std::vector<double> log_f(n, 0.0);
  std::vector<std::optional<std::size_t>> zero(n + 1);
  std::vector<Genotype> symbols(n, Genotype::Missing);
  std::vector<double> fe(kk), c(kk), be(kk), d(kk);
  std::vector<double> scratch(block == 0 ? 0 : block * kk);
  std::vector<std::size_t> rpath(n + 1);

  const double c0 = detail::initial_pair(model, fstack.data());
  detail::normalize(fstack.data(), kk, c0);
  log_f[0] = std::log(c0);

  preorder(prefix, [&](std::size_t v) {
    const auto& node = prefix.node(v);
    const std::size_t depth = node.depth;
    if (depth == 0) return;
    ++out.stats.forward_evaluations;
    const std::size_t locus = depth - 1;
    symbols[locus] = node.symbol;
    if (depth < n) {
      const double total = detail::forward_advance(model, locus, fstack.data() + locus * kk, node.symbol, fe.data(),
                                                   c.data(), fstack.data() + depth * kk);
      log_f[depth] = log_f[locus] + std::log(total);
      zero[depth] = zero[locus];
      if (total == 0.0 && !zero[depth]) zero[depth] = locus;
      return;
    }

    // Leaf: one distinct genotype; finish forward and join with its backward path.
    const double terminal = detail::emitted_mass(model, n - 1, fstack.data() + (n - 1) * kk, node.symbol, fe.data());
    std::optional<std::size_t> zero_locus = zero[n - 1];
    if (terminal == 0.0 && !zero_locus) zero_locus = n - 1;

    const auto& members = prefix.samples_at(v);
    std::size_t r = rev.leaf_of_sample(members.front());
    for (;;) {
      rpath[rev.node(r).depth] = r;
      if (r == 0) break;
      r = static_cast<std::size_t>(rev.node(r).parent);
    }

    SampleInference result;
    result.log_likelihood = log_f[n - 1] + std::log(terminal);
    result.zero_locus = zero_locus;
    result.table.q.resize(n);
    result.table.log_marginal.resize(n);
    auto emit_row = [&](std::size_t i, const double* b) {
      detail::posterior_row({fstack.data() + i * kk, kk}, log_f[i], {b, kk}, cache.log_suffix[rpath[n - 1 - i]],
                            model.emission_row(i), k, result.table.q[i], result.table.log_marginal[i]);
    };

    if (block == 0) {
      for (std::size_t i = 0; i < n; ++i) emit_row(i, cache.at(rpath[n - 1 - i]));
    } else {
      for (std::size_t start = 0; start < n; start += block) {
        const std::size_t end = std::min(start + block, n) - 1;
        std::copy_n(cache.at(rpath[n - 1 - end]), kk, scratch.data() + (end - start) * kk);
        for (std::size_t i = end; i-- > start;) {
          detail::backward_advance(model, i, scratch.data() + (i + 1 - start) * kk, symbols[i + 1], be.data(),
                                   d.data(), scratch.data() + (i - start) * kk);
          ++out.stats.backward_recomputations;
        }
        for (std::size_t i = start; i <= end; ++i) emit_row(i, scratch.data() + (i - start) * kk);
      }
    }

    if (result.zero_locus) out.zero_probability.insert(out.zero_probability.end(), members.begin(), members.end());
    for (std::size_t s : members) out.samples[s] = result;
  });

  std::sort(out.zero_probability.begin(), out.zero_probability.end());
  return out;
}

}  // namespace

BatchPosteriorResult batched_posteriors(const FounderHMM& model, const GenotypeCorpus& corpus,
                                        const BatchOptions& options) {
  check_corpus_shape(corpus, model.loci());
  if (corpus.empty()) return {};
  if (!options.use_trie) {
    BatchPosteriorResult out = naive_posteriors(model, corpus, options);
    for (std::size_t s = 0; s < out.samples.size(); ++s)
      if (out.samples[s].zero_locus) out.zero_probability.push_back(s);
    return out;
  }
  return trie_posteriors(model, corpus, options);
}

}  // namespace fhmm

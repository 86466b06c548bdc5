#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "fhmm/founder_hmm.hpp"
#include "fhmm/genotype.hpp"
#include "fhmm/inference.hpp"

namespace fhmm {

/// Prefix tree over a genotype corpus. Missing is an ordinary fourth branch
/// symbol. Node 0 is the root (depth 0); every other node holds the symbol
/// read at depth-1 (or at n-depth for a reversed trie). Children are kept in
/// symbol order, so the structure does not depend on corpus order.
class GenotypeTrie {
 public:
  static constexpr std::int32_t kNone = -1;

  struct Node {
    Genotype symbol = Genotype::Missing;
    std::uint32_t depth = 0;
    std::int32_t parent = kNone;
    std::array<std::int32_t, 4> children{kNone, kNone, kNone, kNone};
    /// Number of corpus samples whose path passes through this node.
    std::uint32_t count = 0;
  };

  GenotypeTrie(const GenotypeCorpus& corpus, bool reversed);

  bool reversed() const noexcept { return reversed_; }
  std::size_t loci() const noexcept { return loci_; }
  std::size_t sample_count() const noexcept { return leaf_of_sample_.size(); }

  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  const Node& node(std::size_t id) const { return nodes_[id]; }

  /// Non-root nodes; equals the number of distinct prefixes in the corpus.
  std::size_t node_count() const noexcept { return nodes_.size() - 1; }
  /// Element d-1 is the node count at depth d, for d = 1..n.
  std::vector<std::size_t> depth_counts() const;
  std::size_t distinct_count() const noexcept { return leaves_.size(); }

  /// Leaves in preorder (symbol order), one per distinct genotype.
  const std::vector<std::size_t>& leaves() const noexcept { return leaves_; }
  std::size_t leaf_of_sample(std::size_t sample) const { return leaf_of_sample_[sample]; }
  /// Corpus indices ending at `leaf`, ascending.
  const std::vector<std::size_t>& samples_at(std::size_t leaf) const;
  /// Corpus indices whose path passes through `node`, ascending.
  std::vector<std::size_t> samples_through(std::size_t node) const;

  /// Symbols along the root path of `node`, in trie order.
  std::vector<Genotype> spell(std::size_t node) const;

 private:
  bool reversed_;
  std::size_t loci_ = 0;
  std::vector<Node> nodes_;
  std::vector<std::size_t> leaves_;
  std::vector<std::vector<std::size_t>> leaf_samples_;  // indexed by position in leaves_
  std::vector<std::size_t> leaf_slot_;                  // node id -> position in leaves_ (or npos)
  std::vector<std::size_t> leaf_of_sample_;
};

/// Throws InputError for an empty or ragged corpus.
GenotypeTrie build_trie(const GenotypeCorpus& corpus);
GenotypeTrie reversed_trie(const GenotypeCorpus& corpus);

struct BatchOptions {
  /// false runs independent per-sample inference (the naive path).
  bool use_trie = true;
  /// Loci per backward checkpoint block. 0 picks full caching unless the
  /// cache would exceed cache_budget_bytes.
  std::size_t block_loci = 0;
  std::size_t cache_budget_bytes = std::size_t{1} << 30;
  /// Worker threads for the naive path. 0 uses available parallelism.
  std::size_t threads = 1;
};

struct BatchStats {
  std::size_t samples = 0;
  std::size_t distinct_genotypes = 0;
  /// Locus evaluations performed; each consumes one observed symbol.
  std::size_t forward_evaluations = 0;
  std::size_t backward_evaluations = 0;
  /// Backward steps repeated inside checkpoint blocks.
  std::size_t backward_recomputations = 0;
  /// samples * loci, the cost of independent processing per direction.
  std::size_t naive_evaluations = 0;
  std::size_t block_loci = 0;

  std::size_t evaluations_avoided() const noexcept {
    return 2 * naive_evaluations - forward_evaluations - backward_evaluations - backward_recomputations;
  }
};

struct BatchPosteriorResult {
  /// Indexed like the input corpus.
  std::vector<SampleInference> samples;
  /// Corpus indices of genotypes with probability zero.
  std::vector<std::size_t> zero_probability;
  BatchStats stats;
};

/// Posterior tables for a whole corpus. With use_trie, forward blocks are
/// computed once per prefix-trie node and backward blocks once per
/// reversed-trie node; per-sample outputs are bit-identical to
/// infer_sample(). Zero-probability samples are reported, not thrown.
BatchPosteriorResult batched_posteriors(const FounderHMM& model, const GenotypeCorpus& corpus,
                                        const BatchOptions& options = {});

}  // namespace fhmm

#include <algorithm>
#include <string>

#include "fhmm/analysis.hpp"
#include "fhmm/errors.hpp"
#include "fhmm/parallel.hpp"

namespace fhmm {

std::vector<Window> plan_windows(const LocusMap& map, const WindowSpec& spec) {
  if (spec.flank < 1) throw InputError("flank must be at least 1");
  const std::vector<std::size_t> typed = map.typed_indices();

  std::vector<Window> windows;
  std::size_t t = 0;  // first typed locus to the right of the current position
  std::size_t run_start = static_cast<std::size_t>(-1);
  for (std::size_t u = 0; u < map.size(); ++u) {
    if (map[u].typed) {
      ++t;
      continue;
    }
    const std::size_t left = std::min(spec.flank, t);
    const std::size_t right = std::min(spec.flank, typed.size() - t);
    if (left == 0 && right == 0) {
      throw InputError("untyped locus '" + map[u].id + "' has no typed flanking loci");
    }
    if (!windows.empty() && run_start == t) {
      windows.back().targets.push_back(u);
      continue;
    }
    run_start = t;
    Window w;
    w.loci.assign(typed.begin() + static_cast<std::ptrdiff_t>(t - left),
                  typed.begin() + static_cast<std::ptrdiff_t>(t + right));
    w.targets.push_back(u);
    windows.push_back(std::move(w));
  }
  for (auto& w : windows) {
    w.loci.insert(w.loci.end(), w.targets.begin(), w.targets.end());
    std::sort(w.loci.begin(), w.loci.end());
  }
  return windows;
}

FounderHMM window_model(const HaplotypePanel& reference, const Window& window, const ImputeOptions& options) {
  TrainConfig config = options.train;
  config.max_iterations = options.window_max_iterations;
  config.threads = 1;
  return train_founder_hmm(restrict_loci(reference, window.loci), config).model;
}

namespace {

struct WindowOutput {
  std::vector<ImputationEntry> entries;
  BatchStats stats;
  std::size_t zero_samples = 0;
};

WindowOutput impute_window(const HaplotypePanel& reference, const GenotypeCorpus& typed_corpus,
                           const std::vector<std::size_t>& typed_column, const Window& window,
                           const ImputeOptions& options) {
  const FounderHMM model = window_model(reference, window, options);

  GenotypeCorpus local;
  local.reserve(typed_corpus.size());
  for (const auto& g : typed_corpus) {
    MultilocusGenotype w{g.sample_id, {}};
    w.symbols.reserve(window.loci.size());
    for (std::size_t locus : window.loci) {
      const std::size_t col = typed_column[locus];
      w.symbols.push_back(col == static_cast<std::size_t>(-1) ? Genotype::Missing : g[col]);
    }
    local.push_back(std::move(w));
  }

  BatchOptions batch = options.batch;
  batch.threads = 1;
  const BatchPosteriorResult posts = batched_posteriors(model, local, batch);

  WindowOutput out;
  out.stats = posts.stats;
  out.zero_samples = posts.zero_probability.size();
  for (std::size_t target : window.targets) {
    const auto pos = static_cast<std::size_t>(
        std::lower_bound(window.loci.begin(), window.loci.end(), target) - window.loci.begin());
    for (std::size_t s = 0; s < local.size(); ++s) {
      ImputationEntry e;
      e.sample = s;
      e.locus = target;
      e.q = posts.samples[s].table.q[pos];
      if (e.q[0] + e.q[1] + e.q[2] == 0.0) e.q = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
      e.call = argmax_call(e.q);
      e.confidence = e.q[static_cast<std::size_t>(code(e.call))];
      out.entries.push_back(e);
    }
  }
  return out;
}

}  // namespace

ImputationResult impute_untyped(const HaplotypePanel& reference, const GenotypeCorpus& typed_corpus,
                                const LocusMap& map, const ImputeOptions& options) {
  options.train.validate();
  if (reference.empty()) throw InputError("reference panel is empty");
  for (const auto& h : reference) {
    if (h.size() != map.size()) {
      const std::size_t missing_at = std::min(h.size(), map.size() - 1);
      throw InputError("reference haplotype '" + h.id + "' covers " + std::to_string(h.size()) + " of " +
                       std::to_string(map.size()) + " loci (locus '" + map[missing_at].id + "' absent)");
    }
  }
  const std::vector<std::size_t> typed = map.typed_indices();
  check_corpus_shape(typed_corpus, typed.size());

  std::vector<std::size_t> typed_column(map.size(), static_cast<std::size_t>(-1));
  for (std::size_t c = 0; c < typed.size(); ++c) typed_column[typed[c]] = c;

  const std::vector<Window> windows = plan_windows(map, options.window);
  std::vector<WindowOutput> outputs(windows.size());
  parallel_for(windows.size(), options.threads, [&](std::size_t w) {
    outputs[w] = impute_window(reference, typed_corpus, typed_column, windows[w], options);
  });

  ImputationResult result;
  for (const auto& g : typed_corpus) result.sample_ids.push_back(g.sample_id);
  result.locus_ids = map.ids();
  result.stats.windows = windows.size();
  for (auto& out : outputs) {
    result.entries.insert(result.entries.end(), out.entries.begin(), out.entries.end());
    result.stats.forward_evaluations += out.stats.forward_evaluations;
    result.stats.backward_evaluations += out.stats.backward_evaluations + out.stats.backward_recomputations;
    result.stats.naive_evaluations += out.stats.naive_evaluations;
    result.stats.zero_probability_samples += out.zero_samples;
  }
  for (const auto& w : windows) result.stats.targets += w.targets.size();
  return result;
}

}  // namespace fhmm

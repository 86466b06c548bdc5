#include <string>

#include "fhmm/analysis.hpp"
#include "fhmm/errors.hpp"

namespace fhmm {

std::size_t ErrorReport::flagged_count() const {
  std::size_t n = 0;
  for (const auto& e : entries) n += e.flagged ? 1 : 0;
  return n;
}

Genotype argmax_call(const EmissionTriple& q) noexcept {
  std::size_t best = 0;
  for (std::size_t x = 1; x < 3; ++x)
    if (q[x] > q[best]) best = x;
  return static_cast<Genotype>(best);
}

namespace {

Genotype suggest(const EmissionTriple& q, Genotype observed) {
  const auto obs = static_cast<std::size_t>(code(observed));
  std::size_t best = obs;
  for (std::size_t x = 0; x < 3; ++x)
    if (q[x] > q[best]) best = x;
  return static_cast<Genotype>(best);
}

}  // namespace

ErrorReport detect_errors(const FounderHMM& model, const GenotypeCorpus& corpus,
                          const std::vector<std::string>& locus_ids, double threshold, const BatchOptions& batch) {
  if (!(threshold >= 1.0)) throw InputError("error-detection threshold must be at least 1");
  if (locus_ids.size() != model.loci()) throw InputError("locus id list does not match the model");
  check_corpus_shape(corpus, model.loci());

  const BatchPosteriorResult posts = batched_posteriors(model, corpus, batch);
  ErrorReport report;
  report.threshold = threshold;
  for (std::size_t s = 0; s < corpus.size(); ++s) {
    const auto& table = posts.samples[s].table;
    for (std::size_t i = 0; i < model.loci(); ++i) {
      const Genotype obs = corpus[s][i];
      if (is_missing(obs)) continue;
      const EmissionTriple& q = table.q[i];
      ErrorEntry e;
      e.sample = s;
      e.locus = i;
      e.sample_id = corpus[s].sample_id;
      e.locus_id = locus_ids[i];
      e.observed = obs;
      e.suggested = suggest(q, obs);
      const double q_obs = q[static_cast<std::size_t>(code(obs))];
      const double q_max = q[static_cast<std::size_t>(code(e.suggested))];
      e.ratio = q_obs > 0.0 ? q_max / q_obs : kInfiniteRatio;
      e.flagged = e.ratio > threshold;
      report.entries.push_back(std::move(e));
    }
  }
  return report;
}

CorrectionResult correct_errors(const GenotypeCorpus& corpus, const ErrorReport& report) {
  CorrectionResult out{corpus, 0};
  for (const auto& e : report.entries) {
    if (e.sample >= corpus.size() || corpus[e.sample].sample_id != e.sample_id) {
      throw InputError("error report names sample '" + e.sample_id + "' which is not at position " +
                       std::to_string(e.sample) + " of the corpus");
    }
    if (e.locus >= corpus[e.sample].size() || corpus[e.sample][e.locus] != e.observed) {
      throw InputError("error report entry for sample '" + e.sample_id + "' locus '" + e.locus_id +
                       "' does not match the corpus");
    }
    if (!e.flagged || e.suggested == e.observed) continue;
    out.corpus[e.sample].symbols[e.locus] = e.suggested;
    ++out.changes;
  }
  return out;
}

RecoveryResult recover_missing(const FounderHMM& model, const GenotypeCorpus& corpus, const BatchOptions& batch) {
  check_corpus_shape(corpus, model.loci());
  RecoveryResult out{corpus, {}};
  bool any_missing = false;
  for (const auto& g : corpus)
    for (Genotype x : g.symbols) any_missing |= is_missing(x);
  if (!any_missing) return out;

  const BatchPosteriorResult posts = batched_posteriors(model, corpus, batch);
  for (std::size_t s = 0; s < corpus.size(); ++s) {
    const auto& table = posts.samples[s].table;
    for (std::size_t i = 0; i < model.loci(); ++i) {
      if (!is_missing(corpus[s][i])) continue;
      const EmissionTriple& q = table.q[i];
      const Genotype call = argmax_call(q);
      out.corpus[s].symbols[i] = call;
      out.fills.push_back({s, i, call, q[static_cast<std::size_t>(code(call))]});
    }
  }
  return out;
}

}  // namespace fhmm

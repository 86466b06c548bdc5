#include <chrono>
#include <optional>
#include <string>

#include "fhmm/analysis.hpp"
#include "fhmm/errors.hpp"
#include "fhmm/parallel.hpp"

namespace fhmm {
namespace {

class StageTimer {
 public:
  StageTimer() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

/// Runs `body`, re-raising input errors with the stage name attached.
template <typename Body>
auto in_stage(const char* name, Body&& body) {
  try {
    return body();
  } catch (const ZeroProbabilityError& e) {
    throw ZeroProbabilityError(e.locus(), std::string(name) + ": " + e.what());
  } catch (const InputError& e) {
    throw InputError(std::string(name) + ": " + e.what());
  }
}

}  // namespace

PipelineResult run_pipeline(const HaplotypePanel& reference, const GenotypeCorpus& typed_corpus, const LocusMap& map,
                            const PipelineParams& params) {
  PipelineResult result;
  result.typed_corpus = typed_corpus;
  const std::vector<std::size_t> typed = map.typed_indices();
  check_corpus_shape(typed_corpus, typed.size());

  if (params.mode == PipelineMode::EdcMdrImp) {
    if (typed.empty()) throw InputError("train-typed: the locus map has no typed loci");
    params.typed_train.validate();
    BatchOptions batch = params.impute.batch;
    batch.threads = params.impute.threads;

    // Reference haplotypes pooled with haplotypes decoded from the corpus itself.
    StageTimer train_timer;
    const FounderHMM typed_model = in_stage("train-typed", [&] {
      const HaplotypePanel ref_typed = restrict_loci(reference, typed);
      check_panel_shape(ref_typed, typed.size());
      const FounderHMM phasing_model = train_founder_hmm(ref_typed, params.typed_train).model;
      std::vector<std::optional<PhasedPair>> phased(typed_corpus.size());
      parallel_for(typed_corpus.size(), params.impute.threads, [&](std::size_t s) {
        try {
          phased[s] = phase_decode(phasing_model, typed_corpus[s]);
        } catch (const ZeroProbabilityError&) {
          // Impossible under the reference model; contributes nothing to the pool.
        }
      });
      HaplotypePanel pool = ref_typed;
      for (auto& p : phased) {
        if (!p) continue;
        pool.push_back(std::move(p->first));
        pool.push_back(std::move(p->second));
      }
      return train_founder_hmm(pool, params.typed_train).model;
    });
    result.stages.push_back({"train-typed", train_timer.seconds(), 0, typed_corpus.size() * typed.size()});

    const std::vector<std::string> typed_ids = map.subset(typed).ids();
    StageTimer detect_timer;
    in_stage("detect-correct", [&] {
      result.errors = detect_errors(typed_model, result.typed_corpus, typed_ids, params.threshold, batch);
      CorrectionResult corrected = correct_errors(result.typed_corpus, result.errors);
      result.typed_corpus = std::move(corrected.corpus);
      result.stages.push_back(
          {"detect-correct", 0.0, corrected.changes, typed_corpus.size() * typed.size()});
      return 0;
    });
    result.stages.back().seconds = detect_timer.seconds();

    StageTimer recover_timer;
    in_stage("recover", [&] {
      RecoveryResult recovered = recover_missing(typed_model, result.typed_corpus, batch);
      result.typed_corpus = std::move(recovered.corpus);
      result.fills = std::move(recovered.fills);
      result.stages.push_back({"recover", 0.0, result.fills.size(), typed_corpus.size() * typed.size()});
      return 0;
    });
    result.stages.back().seconds = recover_timer.seconds();
  }

  StageTimer impute_timer;
  result.imputation =
      in_stage("impute", [&] { return impute_untyped(reference, result.typed_corpus, map, params.impute); });
  result.stages.push_back(
      {"impute", impute_timer.seconds(), 0, typed_corpus.size() * result.imputation.stats.targets});
  return result;
}

}  // namespace fhmm

#include "fhmm/simulate.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <unordered_map>

#include "fhmm/errors.hpp"
#include "fhmm/parallel.hpp"
#include "fhmm/training.hpp"

namespace fhmm {
namespace {

bool is_rate(double r) { return r >= 0.0 && r <= 1.0; }

/// Founder-mosaic haplotype.
HaplotypeSequence mosaic(const HaplotypePanel& founders, double switch_rate, std::mt19937_64& rng, std::string id) {
  const std::size_t k = founders.size();
  const std::size_t n = founders.front().size();
  std::uniform_int_distribution<std::size_t> pick(0, k - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  HaplotypeSequence h{std::move(id), {}};
  h.alleles.reserve(n);
  std::size_t f = pick(rng);
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0 && k > 1 && unit(rng) < switch_rate) {
      std::uniform_int_distribution<std::size_t> other(0, k - 2);
      const std::size_t next = other(rng);
      f = next >= f ? next + 1 : next;
    }
    h.alleles.push_back(founders[f][i]);
  }
  return h;
}

}  // namespace

void SimConfig::validate() const {
  if (!is_rate(switch_rate) || !is_rate(error_rate) || !is_rate(missing_rate) || !is_rate(mask_fraction)) {
    throw InputError("simulation rates must lie in [0,1]");
  }
  if (!(maf_min >= 0.0 && maf_min <= maf_max && maf_max <= 1.0)) throw InputError("invalid minor-allele range");
  if (loci < 1) throw InputError("simulation needs at least one locus");
  if (founders.empty() && founder_count < 1) throw InputError("simulation needs at least one founder");
  if (!founders.empty()) check_panel_shape(founders, loci);
  if (masked_loci() > loci) throw InputError("cannot mask more loci than exist");
}

std::size_t SimConfig::masked_loci() const {
  if (mask_count) return *mask_count;
  return static_cast<std::size_t>(std::llround(mask_fraction * static_cast<double>(loci)));
}

SimData simulate(const SimConfig& config) {
  config.validate();
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::size_t n = config.loci;

  SimData data;
  if (!config.founders.empty()) {
    data.founders = config.founders;
  } else {
    std::uniform_real_distribution<double> maf(config.maf_min, config.maf_max);
    data.founders.resize(config.founder_count);
    for (std::size_t f = 0; f < config.founder_count; ++f) data.founders[f].id = "F" + std::to_string(f + 1);
    for (std::size_t i = 0; i < n; ++i) {
      const double p = maf(rng);
      for (auto& f : data.founders) f.alleles.push_back(unit(rng) < p ? Allele::Minor : Allele::Major);
    }
  }

  for (std::size_t r = 0; r < config.reference_count; ++r) {
    data.reference.push_back(mosaic(data.founders, config.switch_rate, rng, "R" + std::to_string(r + 1)));
  }
  for (std::size_t s = 0; s < config.sample_count; ++s) {
    const std::string id = "S" + std::to_string(s + 1);
    data.truth_haplotypes.push_back(mosaic(data.founders, config.switch_rate, rng, id + ".1"));
    data.truth_haplotypes.push_back(mosaic(data.founders, config.switch_rate, rng, id + ".2"));
    data.truth.push_back(combine(data.truth_haplotypes[2 * s], data.truth_haplotypes[2 * s + 1], id));
  }

  GenotypeCorpus observed = data.truth;
  std::uniform_int_distribution<int> coin(0, 1);
  for (std::size_t s = 0; s < observed.size(); ++s) {
    for (std::size_t i = 0; i < n; ++i) {
      if (unit(rng) >= config.error_rate) continue;
      const int truth = code(observed[s][i]);
      const int shift = 1 + coin(rng);
      const Genotype wrong = genotype_from_code((truth + shift) % 3);
      observed[s].symbols[i] = wrong;
      data.errors.push_back({s, i, data.truth[s][i], wrong});
    }
  }
  for (std::size_t s = 0; s < observed.size(); ++s) {
    for (std::size_t i = 0; i < n; ++i) {
      if (unit(rng) >= config.missing_rate) continue;
      data.missing.push_back({s, i, data.truth[s][i], Genotype::Missing});
      observed[s].symbols[i] = Genotype::Missing;
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  data.masked.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(config.masked_loci()));
  std::sort(data.masked.begin(), data.masked.end());

  std::vector<Locus> loci(n);
  for (std::size_t i = 0; i < n; ++i) loci[i] = {"snp" + std::to_string(i + 1), static_cast<std::int64_t>(1000 * (i + 1)), true};
  for (std::size_t i : data.masked) loci[i].typed = false;
  data.map = LocusMap(std::move(loci));
  data.observed = restrict_loci(observed, data.map.typed_indices());
  return data;
}

// ---------------------------------------------------------------------------

namespace {

void tally(EvalReport& r, Genotype truth, Genotype call) {
  ++r.scored;
  if (is_missing(call)) {
    ++r.missing_calls;
    ++r.discordant;
    return;
  }
  if (is_missing(truth)) throw InputError("truth genotypes must not be missing");
  ++r.confusion[static_cast<std::size_t>(code(truth))][static_cast<std::size_t>(code(call))];
  if (call != truth) ++r.discordant;
}

void finish(EvalReport& r) {
  r.discordance_rate = r.scored ? static_cast<double>(r.discordant) / static_cast<double>(r.scored) : 0.0;
}

}  // namespace

EvalReport evaluate(const ImputationResult& calls, const GenotypeCorpus& truth) {
  if (calls.sample_ids.size() != truth.size()) {
    throw InputError("imputation covers " + std::to_string(calls.sample_ids.size()) + " samples, truth has " +
                     std::to_string(truth.size()));
  }
  for (std::size_t s = 0; s < truth.size(); ++s) {
    if (calls.sample_ids[s] != truth[s].sample_id) {
      throw InputError("sample " + std::to_string(s) + " is '" + calls.sample_ids[s] + "' in the calls but '" +
                       truth[s].sample_id + "' in the truth");
    }
    if (truth[s].size() != calls.locus_ids.size()) {
      throw InputError("truth sample '" + truth[s].sample_id + "' does not span the locus map");
    }
  }
  EvalReport r;
  for (const auto& e : calls.entries) {
    if (e.sample >= truth.size() || e.locus >= calls.locus_ids.size()) throw InputError("call outside the truth grid");
    tally(r, truth[e.sample][e.locus], e.call);
  }
  finish(r);
  return r;
}

EvalReport evaluate(const GenotypeCorpus& calls, const GenotypeCorpus& truth) {
  if (calls.size() != truth.size()) throw InputError("calls and truth have different sample counts");
  EvalReport r;
  for (std::size_t s = 0; s < calls.size(); ++s) {
    if (calls[s].sample_id != truth[s].sample_id || calls[s].size() != truth[s].size()) {
      throw InputError("sample " + std::to_string(s) + " ('" + calls[s].sample_id + "') is not aligned with the truth");
    }
    for (std::size_t i = 0; i < calls[s].size(); ++i) tally(r, truth[s][i], calls[s][i]);
  }
  finish(r);
  return r;
}

DetectionScore score_detection(const ErrorReport& report, const SimData& data) {
  const std::vector<std::size_t> typed = data.map.typed_indices();
  std::vector<std::size_t> column(data.map.size(), static_cast<std::size_t>(-1));
  for (std::size_t c = 0; c < typed.size(); ++c) column[typed[c]] = c;

  // Missingness applied after errors can hide an injected error.
  std::vector<char> hidden(data.truth.size() * data.map.size(), 0);
  for (const auto& m : data.missing) hidden[m.sample * data.map.size() + m.locus] = 1;

  std::vector<char> injected(data.truth.size() * typed.size(), 0);
  DetectionScore score;
  for (const auto& e : data.errors) {
    if (column[e.locus] == static_cast<std::size_t>(-1) || hidden[e.sample * data.map.size() + e.locus]) continue;
    injected[e.sample * typed.size() + column[e.locus]] = 1;
    ++score.injected;
  }
  for (const auto& e : report.entries) {
    if (!e.flagged) continue;
    ++score.flagged;
    if (injected.at(e.sample * typed.size() + e.locus)) ++score.true_positives;
  }
  score.precision = score.flagged ? static_cast<double>(score.true_positives) / static_cast<double>(score.flagged) : 0.0;
  score.recall = score.injected ? static_cast<double>(score.true_positives) / static_cast<double>(score.injected) : 0.0;
  return score;
}

// ---------------------------------------------------------------------------

double median_seconds(std::size_t repetitions, const std::function<void()>& fn) {
  std::vector<double> times;
  for (std::size_t r = 0; r < std::max<std::size_t>(1, repetitions); ++r) {
    const auto start = std::chrono::steady_clock::now();
    fn();
    times.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  }
  std::sort(times.begin(), times.end());
  return times[times.size() / 2];
}

std::vector<SweepRow> sweep(const SweepConfig& config) {
  SimConfig sim = config.sim;
  for (std::size_t p : config.panel_sizes) sim.reference_count = std::max(sim.reference_count, p);
  const SimData data = simulate(sim);

  std::vector<SweepRow> rows;
  for (std::size_t k : config.founders)
    for (std::size_t p : config.panel_sizes)
      for (std::size_t f : config.flanks)
        for (PipelineMode m : config.modes) rows.push_back({k, p, f, m, {}, 0.0, false, {}});

  parallel_for(rows.size(), config.threads, [&](std::size_t cell) {
    SweepRow& row = rows[cell];
    try {
      const HaplotypePanel panel(data.reference.begin(), data.reference.begin() + static_cast<std::ptrdiff_t>(row.panel_size));
      PipelineParams params;
      params.mode = row.mode;
      params.threshold = config.threshold;
      params.typed_train = config.train;
      params.typed_train.founders = row.founders;
      params.typed_train.seed = config.train.seed + cell;
      params.typed_train.threads = 1;
      params.impute.train = params.typed_train;
      params.impute.window.flank = row.flank;
      PipelineResult result;
      row.seconds = median_seconds(config.repetitions, [&] { result = run_pipeline(panel, data.observed, data.map, params); });
      row.eval = evaluate(result.imputation, data.truth);
    } catch (const std::exception& e) {
      row.failed = true;
      row.error = e.what();
    }
  });
  return rows;
}

// ---------------------------------------------------------------------------

ScalingFit fit_loglog(const std::vector<ScalingPoint>& points) {
  if (points.size() < 2) throw InputError("a scaling fit needs at least two points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double m = static_cast<double>(points.size());
  for (const auto& p : points) {
    const double x = std::log(p.x), y = std::log(p.seconds);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  ScalingFit fit;
  fit.exponent = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  fit.intercept = (sy - fit.exponent * sx) / m;
  return fit;
}

GenotypeCorpus random_corpus(std::size_t samples, std::size_t loci, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> sym(0, 2);
  GenotypeCorpus corpus(samples);
  for (std::size_t s = 0; s < samples; ++s) {
    corpus[s].sample_id = "S" + std::to_string(s + 1);
    corpus[s].symbols.reserve(loci);
    for (std::size_t i = 0; i < loci; ++i) corpus[s].symbols.push_back(genotype_from_code(sym(rng)));
  }
  return corpus;
}

BenchResult run_scaling_bench(const BenchConfig& config) {
  BatchOptions batch;
  batch.use_trie = config.use_trie;
  auto time_point = [&](std::size_t n, std::size_t m, std::size_t k) {
    const FounderHMM model = initial_model(k, n, config.seed);
    const GenotypeCorpus corpus = random_corpus(m, n, config.seed + 1);
    return median_seconds(config.repetitions, [&] { batched_posteriors(model, corpus, batch); });
  };

  BenchResult r;
  for (std::size_t n : config.loci_values)
    r.by_loci.push_back({static_cast<double>(n), time_point(n, config.samples, config.founders)});
  for (std::size_t m : config.sample_values)
    r.by_samples.push_back({static_cast<double>(m), time_point(config.loci, m, config.founders)});
  for (std::size_t k : config.founder_values)
    r.by_founders.push_back({static_cast<double>(k), time_point(config.loci, config.samples, k)});
  r.loci_fit = fit_loglog(r.by_loci);
  r.samples_fit = fit_loglog(r.by_samples);
  r.founders_fit = fit_loglog(r.by_founders);
  return r;
}

}  // namespace fhmm

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "fhmm/analysis.hpp"
#include "fhmm/errors.hpp"
#include "fhmm/simulate.hpp"
#include "oracle.hpp"

using namespace fhmm;
using fhmm::testing::G;
using fhmm::testing::H;
using fhmm::testing::relative_error;

namespace {

std::vector<std::string> ids(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back("L" + std::to_string(i));
  return out;
}

LocusMap map_of(const std::string& pattern) {
  std::vector<Locus> loci;
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    loci.push_back({"m" + std::to_string(i), static_cast<std::int64_t>(100 * (i + 1)), pattern[i] == 't'});
  }
  return LocusMap(loci);
}

const FounderHMM& zero_at_locus_one() {
  static const FounderHMM m =
      testing::stationary_model(2, {0.4, 0.6}, {0.7, 0.3, 0.2, 0.8}, {0.3, 0.6, 0.0, 0.0, 0.5, 0.1});
  return m;
}

}  // namespace

TEST_CASE("nothing is flagged when observations are the argmax") {
  const FounderHMM m(1, 4, {1.0}, {1.0, 1.0, 1.0}, {0.1, 0.1, 0.1, 0.1});
  const auto report = detect_errors(m, {G("0000", "a")}, ids(4));
  REQUIRE(report.entries.size() == 4);
  for (const auto& e : report.entries) {
    CHECK(e.ratio == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_FALSE(e.flagged);
    CHECK(e.suggested == e.observed);
  }
  CHECK(report.flagged_count() == 0);
}

TEST_CASE("impossible observation has infinite ratio") {
  const auto report = detect_errors(zero_at_locus_one(), {G("120", "a")}, ids(3));
  const auto& e = report.entries[1];
  CHECK(std::isinf(e.ratio));
  CHECK(e.flagged);
  CHECK(e.suggested == Genotype::HomMajor);
  CHECK(e.locus_id == "L1");
  CHECK(e.sample_id == "a");
}

TEST_CASE("ratios match enumeration") {
  std::mt19937_64 rng(42);
  for (int rep = 0; rep < 10; ++rep) {
    const FounderHMM m = testing::random_model(2, 4, rng);
    auto g = testing::sample_corpus(m, 1, rng)[0];
    g.symbols[rep % 4] = genotype_from_code((code(g.symbols[rep % 4]) + 1) % 3);
    g.symbols[(rep + 2) % 4] = rep % 3 == 0 ? Genotype::Missing : g.symbols[(rep + 2) % 4];
    const auto report = detect_errors(m, {g}, ids(4), 5.0);
    const auto oracle = testing::enumerate(m, g);
    std::size_t called = 0;
    for (std::size_t i = 0; i < 4; ++i) {
      if (is_missing(g[i])) continue;
      const auto& e = report.entries[called++];
      REQUIRE(e.locus == i);
      const auto& s = oracle.substitution[i];
      const double best = std::max({s[0], s[1], s[2]});
      CHECK(relative_error(e.ratio, best / oracle.probability) < 1e-9);
      CHECK(e.ratio >= 1.0);
      CHECK(e.flagged == (e.ratio > 5.0));
    }
    CHECK(called == report.entries.size());
  }
}

TEST_CASE("threshold and shape validation") {
  const FounderHMM m(1, 2, {1.0}, {1.0}, {0.5, 0.5});
  CHECK_THROWS_AS(detect_errors(m, {G("00")}, ids(2), 0.5), InputError);
  CHECK_THROWS_AS(detect_errors(m, {G("00")}, ids(3)), InputError);
  CHECK_THROWS_AS(detect_errors(m, {G("000")}, ids(2)), InputError);
}

TEST_CASE("correction applies flagged suggestions only") {
  const GenotypeCorpus corpus{G("120", "a"), G("101", "b")};
  const auto report = detect_errors(zero_at_locus_one(), corpus, ids(3));
  const auto fixed = correct_errors(corpus, report);
  CHECK(fixed.changes == 1);
  CHECK(fixed.corpus[0].symbols == G("100").symbols);
  CHECK(fixed.corpus[1] == corpus[1]);

  ErrorReport empty;
  CHECK(correct_errors(corpus, empty).corpus == corpus);

  ErrorReport wrong = report;
  wrong.entries[1].sample_id = "zzz";
  CHECK_THROWS_AS(correct_errors(corpus, wrong), InputError);
  wrong = report;
  wrong.entries[1].observed = Genotype::Het;
  CHECK_THROWS_AS(correct_errors(corpus, wrong), InputError);
}

TEST_CASE("missing-data recovery") {
  std::mt19937_64 rng(8);
  const FounderHMM m = testing::random_model(3, 6, rng);
  const GenotypeCorpus clean{G("012012", "a")};
  const auto same = recover_missing(m, clean);
  CHECK(same.corpus == clean);
  CHECK(same.fills.empty());

  const FounderHMM minor(3, 1, {0.2, 0.3, 0.5}, {}, {0.9, 0.9, 0.9});
  const auto r = recover_missing(minor, {G("?", "a")});
  REQUIRE(r.fills.size() == 1);
  CHECK(r.fills[0].value == Genotype::HomMinor);
  CHECK(r.fills[0].confidence == doctest::Approx(0.81));
  CHECK(r.corpus[0].symbols == G("2").symbols);

  // A single fill is a fixpoint of its own posterior.
  const GenotypeCorpus holes{G("0?2?10", "a"), G("?12100", "b")};
  const auto filled = recover_missing(m, holes);
  for (const auto& f : filled.fills) {
    MultilocusGenotype one = holes[f.sample];
    one.symbols[f.locus] = f.value;
    CHECK(argmax_call(genotype_posteriors(m, one).q[f.locus]) == f.value);
  }
}

TEST_CASE("argmax ties go to the smaller code") {
  CHECK(argmax_call({0.4, 0.4, 0.2}) == Genotype::HomMajor);
  CHECK(argmax_call({0.2, 0.4, 0.4}) == Genotype::Het);
  CHECK(argmax_call({0.1, 0.2, 0.7}) == Genotype::HomMinor);
}

TEST_CASE("window planning") {
  const auto w = plan_windows(map_of("ttuttuutt"), {2});
  REQUIRE(w.size() == 2);
  CHECK(w[0].targets == std::vector<std::size_t>{2});
  CHECK(w[0].loci == std::vector<std::size_t>{0, 1, 2, 3, 4});
  CHECK(w[1].targets == std::vector<std::size_t>{5, 6});
  CHECK(w[1].loci == std::vector<std::size_t>{3, 4, 5, 6, 7, 8});

  // Chromosome ends keep what is available on each side.
  const auto edge = plan_windows(map_of("uttt"), {2});
  CHECK(edge[0].loci == std::vector<std::size_t>{0, 1, 2});
  CHECK(plan_windows(map_of("tttt"), {10}).empty());
  CHECK_THROWS_AS(plan_windows(map_of("uu"), {1}), InputError);
  CHECK_THROWS_AS(plan_windows(map_of("tu"), {0}), InputError);
}

TEST_CASE("imputation at a monomorphic locus") {
  std::mt19937_64 rng(6);
  HaplotypePanel ref = testing::random_panel(30, 7, rng);
  for (auto& h : ref) h.alleles[3] = Allele::Major;
  const LocusMap map = map_of("tttuttt");
  const GenotypeCorpus typed = restrict_loci(testing::random_genotypes(5, 7, rng), map.typed_indices());
  ImputeOptions opt;
  opt.train.founders = 3;
  const auto r = impute_untyped(ref, typed, map, opt);
  REQUIRE(r.entries.size() == 5);
  for (const auto& e : r.entries) {
    CHECK(e.locus == 3);
    CHECK(e.call == Genotype::HomMajor);
    CHECK(e.confidence >= 1.0 - 1e-6);
  }
  CHECK(r.stats.windows == 1);
  CHECK(r.stats.targets == 1);
}

TEST_CASE("imputed triples match enumeration over the window model") {
  std::mt19937_64 rng(17);
  const LocusMap map = map_of("ttuutttu");
  const FounderHMM truth = testing::random_model(2, 8, rng);
  const HaplotypePanel ref = testing::sample_panel(truth, 40, rng);
  GenotypeCorpus full = testing::sample_corpus(truth, 4, rng);
  full[1].symbols[1] = Genotype::Missing;
  const GenotypeCorpus typed = restrict_loci(full, map.typed_indices());
  ImputeOptions opt;
  opt.window.flank = 2;
  opt.train.founders = 2;
  const auto windows = plan_windows(map, opt.window);
  const auto r = impute_untyped(ref, typed, map, opt);
  CHECK(r.entries.size() == 3 * 4);

  std::vector<std::size_t> column(map.size(), 99);
  const auto t = map.typed_indices();
  for (std::size_t c = 0; c < t.size(); ++c) column[t[c]] = c;
  for (const auto& w : windows) {
    REQUIRE(w.loci.size() <= 7);
    const FounderHMM local = window_model(ref, w, opt);
    for (std::size_t s = 0; s < typed.size(); ++s) {
      MultilocusGenotype g{"w", {}};
      for (auto l : w.loci) g.symbols.push_back(map[l].typed ? typed[s][column[l]] : Genotype::Missing);
      const auto oracle = testing::enumerate(local, g);
      for (std::size_t p = 0; p < w.loci.size(); ++p) {
        if (map[w.loci[p]].typed) continue;
        const auto it = std::find_if(r.entries.begin(), r.entries.end(),
                                     [&](const ImputationEntry& e) { return e.sample == s && e.locus == w.loci[p]; });
        REQUIRE(it != r.entries.end());
        const auto& sub = oracle.substitution[p];
        const double total = sub[0] + sub[1] + sub[2];
        for (int x = 0; x < 3; ++x) CHECK(std::abs(it->q[x] - sub[x] / total) < 1e-9);
      }
    }
  }
}

TEST_CASE("imputation input checks") {
  const LocusMap map = map_of("tut");
  ImputeOptions opt;
  opt.train.founders = 2;
  CHECK_THROWS_AS(impute_untyped({}, {G("00")}, map, opt), InputError);
  CHECK_THROWS_AS(impute_untyped({H("01")}, {G("00")}, map, opt), InputError);
  CHECK_THROWS_AS(impute_untyped({H("010")}, {G("000")}, map, opt), InputError);
}

TEST_CASE("haplotype-pair decoding") {
  std::mt19937_64 rng(12);
  const FounderHMM m = testing::random_model(3, 5, rng);
  const auto hom = phase_decode(m, G("02200", "s"));
  CHECK(hom.first.alleles == hom.second.alleles);
  CHECK(to_string(hom.first.alleles) == "01100");

  const FounderHMM det = testing::stationary_model(2, {0.5, 0.5}, {0.9, 0.1, 0.1, 0.9}, {0, 1, 0, 1, 0, 1, 0, 1});
  const auto het = phase_decode(det, G("1111", "s"));
  CHECK(to_string(het.first.alleles) == "0000");
  CHECK(to_string(het.second.alleles) == "1111");

  for (int rep = 0; rep < 30; ++rep) {
    const std::size_t k = 1 + rep % 3, n = 1 + rep % 6;
    const FounderHMM model = testing::random_model(k, n, rng);
    const auto g = testing::sample_corpus(model, 1, rng)[0];
    const auto p = phase_decode(model, g);
    CHECK(relative_error(std::exp(p.log_probability), testing::enumerate(model, g).max_joint) < 1e-10);
    CHECK(combine(p.first, p.second, "x").symbols == g.symbols);
    CHECK(to_string(p.first.alleles) <= to_string(p.second.alleles));
    CHECK(p.founders_first.size() == n);
  }
  CHECK_THROWS_AS(phase_decode(zero_at_locus_one(), G("120")), ZeroProbabilityError);
}

TEST_CASE("decoding fills missing loci with a consistent pair") {
  const FounderHMM m(1, 3, {1.0}, {1.0, 1.0}, {0.9, 0.2, 0.5});
  const auto p = phase_decode(m, G("?0?"));
  CHECK(to_string(p.first.alleles).size() == 3);
  CHECK(p.first.alleles[0] == Allele::Minor);
  CHECK(p.second.alleles[0] == Allele::Minor);
}

TEST_CASE("pipeline on clean data and stage accounting") {
  SimConfig sim;
  sim.founder_count = 4;
  sim.loci = 60;
  sim.sample_count = 30;
  sim.reference_count = 80;
  sim.mask_fraction = 0.1;
  sim.seed = 5;
  const SimData data = simulate(sim);
  PipelineParams params;
  params.impute.train.founders = 4;
  params.typed_train = params.impute.train;
  params.mode = PipelineMode::Imp;
  const auto imp = run_pipeline(data.reference, data.observed, data.map, params);
  params.mode = PipelineMode::EdcMdrImp;
  const auto edc = run_pipeline(data.reference, data.observed, data.map, params);
  REQUIRE(edc.stages.size() == 4);
  CHECK(imp.stages.size() == 1);
  CHECK(edc.fills.empty());

  const std::size_t typed = data.map.typed_indices().size(), untyped = data.map.size() - typed;
  CHECK(edc.stages[1].locus_evaluations == sim.sample_count * typed);
  CHECK(edc.stages.back().locus_evaluations == sim.sample_count * untyped);
  CHECK(edc.stages.back().name == "impute");

  if (edc.stages[1].changes == 0) {
    REQUIRE(edc.imputation.entries.size() == imp.imputation.entries.size());
    for (std::size_t e = 0; e < imp.imputation.entries.size(); ++e) {
      CHECK(edc.imputation.entries[e].call == imp.imputation.entries[e].call);
    }
  }
  CHECK(edc.stages[1].changes <= sim.sample_count * typed / 100);
}

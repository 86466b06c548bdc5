#include "cli.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "fhmm/analysis.hpp"
#include "fhmm/errors.hpp"
#include "fhmm/io.hpp"
#include "fhmm/parallel.hpp"
#include "fhmm/simulate.hpp"

namespace fhmm::cli {
namespace {

using Writer = std::function<void(std::ostream&)>;

// Options that change how work is scheduled or where results go, never what
// is computed. They are left out of the echoed configuration so that, for example,
// --naive and trie runs produce identical files.
const std::vector<std::string> kExecutionOnly{"threads", "naive",     "log",  "output",      "out-dir", "fills",
                                              "stages",  "corpus-out", "plot", "timing-plot", "config",  "block-loci",
                                              "help"};

struct Shared {
  std::size_t threads = 0;
  bool naive = false;
  bool json = false;
  std::size_t block_loci = 0;
  std::string log_path;
};

class TimingLog {
 public:
  void add(std::string what, double seconds) { rows_.emplace_back(std::move(what), seconds); }

  void flush(const std::string& path) const {
    auto body = [&](std::ostream& out) {
      for (const auto& [what, s] : rows_) out << "timing\t" << what << '\t' << io::format_double(s) << '\n';
    };
    if (path.empty()) {
      body(std::cerr);
    } else {
      io::write_file_atomically(path, body);
    }
  }

 private:
  std::vector<std::pair<std::string, double>> rows_;
};

template <typename Fn>
auto timed(TimingLog& log, const std::string& what, Fn&& fn) {
  const auto start = std::chrono::steady_clock::now();
  auto finish = [&] { log.add(what, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()); };
  if constexpr (std::is_void_v<decltype(fn())>) {
    fn();
    finish();
  } else {
    auto value = fn();
    finish();
    return value;
  }
}

void emit(const std::string& path, const Writer& body) {
  if (path.empty() || path == "-") {
    body(std::cout);
    std::cout.flush();
  } else {
    io::write_file_atomically(path, body);
  }
}

std::string option_value(const CLI::Option* opt) {
  if (opt->count() > 0) {
    std::string joined;
    for (const auto& r : opt->results()) joined += (joined.empty() ? "" : ",") + r;
    if (opt->get_type_size() == 0 && joined.empty()) return "true";
    return joined;
  }
  std::string def = opt->get_default_str();
  if (opt->get_type_size() == 0 && def.empty()) return "false";
  return def;
}

/// "command=<name>" followed by "key=value" for every result-affecting option.
io::Comments effective_config(const CLI::App* sub) {
  io::Comments out{"command=" + sub->get_name()};
  for (const CLI::Option* opt : sub->get_options()) {
    std::string name = opt->get_single_name();
    if (name.empty() || std::find(kExecutionOnly.begin(), kExecutionOnly.end(), name) != kExecutionOnly.end()) {
      continue;
    }
    out.push_back(name + "=" + option_value(opt));
  }
  return out;
}

BatchOptions batch_options(const Shared& s) {
  BatchOptions b;
  b.use_trie = !s.naive;
  b.block_loci = s.block_loci;
  b.threads = resolve_threads(s.threads);
  return b;
}

/// Names for the columns of a corpus of `width` loci: typed ids when the map
/// types exactly that many loci, all ids when it has that many loci.
std::vector<std::string> locus_ids_for(std::size_t width, const std::string& map_path) {
  if (map_path.empty()) {
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < width; ++i) ids.push_back("L" + std::to_string(i + 1));
    return ids;
  }
  const LocusMap map = io::read_locus_map(map_path);
  const auto typed = map.typed_indices();
  if (typed.size() == width) return map.subset(typed).ids();
  if (map.size() == width) return map.ids();
  throw InputError(map_path + ": map has " + std::to_string(map.size()) + " loci (" + std::to_string(typed.size()) +
                   " typed), corpus has " + std::to_string(width));
}

std::size_t corpus_width(const GenotypeCorpus& corpus) { return corpus.empty() ? 0 : corpus.front().size(); }

void add_shared(CLI::App* sub, Shared& s, bool batch, bool json) {
  sub->add_option("--threads", s.threads, "Worker threads; 0 uses available parallelism, 1 is fully serial");
  sub->add_option("--log", s.log_path, "Timing log file (default: stderr)");
  if (batch) {
    sub->add_flag("--naive", s.naive, "Per-sample inference instead of the shared-prefix engine");
    sub->add_option("--block-loci", s.block_loci, "Backward cache checkpoint spacing; 0 chooses automatically");
  }
  if (json) sub->add_flag("--json", s.json, "Emit JSON records instead of tab-separated rows");
}

void add_train_options(CLI::App* sub, TrainConfig& t) {
  sub->add_option("--founders,-K", t.founders, "Number of founder haplotypes")->check(CLI::PositiveNumber);
  sub->add_option("--max-iterations", t.max_iterations, "Baum-Welch iteration cap");
  sub->add_option("--tolerance", t.tolerance, "Relative log-likelihood improvement that stops training");
  sub->add_option("--seed", t.seed, "Initialization seed");
  sub->add_option("--pseudocount", t.pseudocount, "Added to every expected count");
}

void add_sim_options(CLI::App* sub, SimConfig& c, const std::string& seed_flag) {
  sub->add_option("--sim-founders", c.founder_count, "Founders used by the generator");
  sub->add_option("--loci", c.loci, "Number of loci");
  sub->add_option("--samples", c.sample_count, "Number of genotyped samples");
  sub->add_option("--reference", c.reference_count, "Reference panel haplotypes");
  sub->add_option("--switch-rate", c.switch_rate, "Per-interval founder switch probability");
  sub->add_option("--maf-min", c.maf_min, "Lower bound of founder minor-allele frequency");
  sub->add_option("--maf-max", c.maf_max, "Upper bound of founder minor-allele frequency");
  sub->add_option("--error-rate", c.error_rate, "Per-symbol genotyping error rate");
  sub->add_option("--missing-rate", c.missing_rate, "Per-symbol missing rate");
  sub->add_option("--mask-fraction", c.mask_fraction, "Fraction of loci relabeled untyped");
  sub->add_option("--mask-count", c.mask_count, "Exact number of loci relabeled untyped");
  sub->add_option(seed_flag, c.seed, "Generator seed");
}

std::vector<std::string> event_rows(const std::vector<InjectedEvent>& events, const SimData& data) {
  std::vector<std::string> rows;
  for (const auto& e : events) {
    rows.push_back(data.truth[e.sample].sample_id + '\t' + data.map[e.locus].id + '\t' + to_char(e.truth) + '\t' +
                   to_char(e.observed));
  }
  return rows;
}

struct TrainArgs {
  std::string panel, output, typed_map;
  TrainConfig config;
  Shared shared;
};
struct ModelArgs {
  std::string model, genotypes, map, output, report, fills;
  double threshold = kDefaultErrorThreshold;
  Shared shared;
};
struct ImputeArgs {
  std::string panel, genotypes, map, output;
  ImputeOptions options;
  Shared shared;
};
struct PipelineArgs {
  ImputeArgs args;
  std::string mode = "imp";
  double threshold = kDefaultErrorThreshold;
  std::size_t typed_iterations = TrainConfig{}.max_iterations;
  std::string stages, corpus_out, report;
};
struct SimulateArgs {
  SimConfig config;
  std::string out_dir;
  Shared shared;
};
struct EvaluateArgs {
  std::string truth, calls, corpus, map, output;
  Shared shared;
};
struct SweepArgs {
  SweepConfig config;
  std::vector<std::string> modes{"imp"};
  std::string output, plot, timing_plot;
  Shared shared;
};
struct BenchArgs {
  BenchConfig config;
  std::string output;
  Shared shared;
};

struct Command {
  CLI::App* app = nullptr;
  std::function<void(const io::Comments&, TimingLog&)> run;
  const Shared* shared = nullptr;
};

class Cli {
 public:
  Cli() : app_("Factorial HMM toolkit for multilocus SNP genotypes", "fhmm") {
    app_.option_defaults()->always_capture_default();
    app_.set_config("--config", "", "INI/TOML file with [subcommand] sections; flags override it")
        ->envname(kConfigEnv);
    app_.require_subcommand(1);
    add_train();
    add_detect();
    add_correct();
    add_recover();
    add_impute();
    add_phase();
    add_pipeline();
    add_simulate();
    add_evaluate();
    add_sweep();
    add_bench();
  }

  int run(int argc, char** argv) {
    try {
      app_.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
      return app_.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
      return app_.exit(e);
    } catch (const CLI::CallForVersion& e) {
      return app_.exit(e);
    } catch (const CLI::ParseError& e) {
      app_.exit(e);
      return kInputError;
    }
    for (auto& [name, cmd] : commands_) {
      if (!cmd.app->parsed()) continue;
      TimingLog log;
      return guarded(name, [&] {
        cmd.run(effective_config(cmd.app), log);
        log.flush(cmd.shared->log_path);
      });
    }
    return kInputError;
  }

 private:
  CLI::App* add(const std::string& name, const std::string& description, Shared& shared,
                std::function<void(const io::Comments&, TimingLog&)> run) {
    CLI::App* sub = app_.add_subcommand(name, description);
    commands_[name] = {sub, std::move(run), &shared};
    return sub;
  }

  void add_train() {
    auto* sub = add("train", "Fit a founder model to a haplotype panel", train_.shared, [this](auto& cfg, auto& log) {
      HaplotypePanel panel = io::read_haplotypes(train_.panel);
      if (!train_.typed_map.empty()) {
        const LocusMap map = io::read_locus_map(train_.typed_map);
        check_panel_shape(panel, map.size());
        panel = restrict_loci(panel, map.typed_indices());
      }
      TrainConfig t = train_.config;
      t.threads = resolve_threads(train_.shared.threads);
      const TrainResult r = timed(log, "train", [&] { return train_founder_hmm(panel, t); });
      io::Comments comments = cfg;
      comments.push_back("iterations=" + std::to_string(r.report.iterations_run));
      comments.push_back(std::string("converged=") + (r.report.converged ? "true" : "false"));
      comments.push_back("loglik=" + io::format_double(r.report.loglik_trace.back()));
      emit(train_.output, [&](std::ostream& out) { io::format_model(out, r.model, comments); });
    });
    sub->add_option("--panel", train_.panel, "Haplotype panel file")->required();
    sub->add_option("--typed-map", train_.typed_map, "Train on the typed loci of this map only");
    sub->add_option("--output,-o", train_.output, "Model file (default: stdout)");
    add_train_options(sub, train_.config);
    add_shared(sub, train_.shared, false, false);
  }

  void add_detect() {
    auto* sub = add("detect", "Likelihood-ratio test at every called genotype", detect_.shared,
                    [this](auto& cfg, auto& log) {
                      const FounderHMM model = io::read_model(detect_.model);
                      const GenotypeCorpus corpus = io::read_genotypes(detect_.genotypes);
                      const auto ids = locus_ids_for(corpus_width(corpus), detect_.map);
                      const ErrorReport report = timed(log, "detect", [&] {
                        return detect_errors(model, corpus, ids, detect_.threshold, batch_options(detect_.shared));
                      });
                      emit(detect_.output,
                           [&](std::ostream& out) { io::format_error_report(out, report, detect_.shared.json, cfg); });
                    });
    sub->add_option("--model", detect_.model, "Model file")->required();
    sub->add_option("--genotypes", detect_.genotypes, "Genotype file")->required();
    sub->add_option("--map", detect_.map, "Locus map naming the corpus loci");
    sub->add_option("--threshold", detect_.threshold, "Flag when the likelihood ratio exceeds this")
        ->check(CLI::PositiveNumber);
    sub->add_option("--output,-o", detect_.output,
                    "Report: sample_id locus_id observed ratio flagged suggested (default: stdout)");
    add_shared(sub, detect_.shared, true, true);
  }

  void add_correct() {
    auto* sub = add("correct", "Apply the suggestions of an error report", correct_.shared,
                    [this](auto& cfg, auto& log) {
                      const GenotypeCorpus corpus = io::read_genotypes(correct_.genotypes);
                      const auto ids = locus_ids_for(corpus_width(corpus), correct_.map);
                      std::ifstream in(correct_.report, std::ios::binary);
                      if (!in) throw InputError(correct_.report + ": cannot open for reading");
                      const ErrorReport report = io::parse_error_report(in, correct_.report, corpus, ids);
                      const CorrectionResult r = timed(log, "correct", [&] { return correct_errors(corpus, report); });
                      io::Comments comments = cfg;
                      comments.push_back("changes=" + std::to_string(r.changes));
                      emit(correct_.output, [&](std::ostream& out) { io::format_genotypes(out, r.corpus, comments); });
                    });
    sub->add_option("--genotypes", correct_.genotypes, "Genotype file")->required();
    sub->add_option("--report", correct_.report, "Tab-separated error report from detect")->required();
    sub->add_option("--map", correct_.map, "Locus map naming the corpus loci");
    sub->add_option("--output,-o", correct_.output, "Corrected genotype file (default: stdout)");
    add_shared(sub, correct_.shared, false, false);
  }

  void add_recover() {
    auto* sub = add("recover", "Fill missing genotypes with their posterior argmax", recover_.shared,
                    [this](auto& cfg, auto& log) {
                      const FounderHMM model = io::read_model(recover_.model);
                      const GenotypeCorpus corpus = io::read_genotypes(recover_.genotypes);
                      const auto ids = locus_ids_for(corpus_width(corpus), recover_.map);
                      const RecoveryResult r = timed(
                          log, "recover", [&] { return recover_missing(model, corpus, batch_options(recover_.shared)); });
                      emit(recover_.output, [&](std::ostream& out) { io::format_genotypes(out, r.corpus, cfg); });
                      if (!recover_.fills.empty()) {
                        emit(recover_.fills, [&](std::ostream& out) {
                          io::format_fills(out, r.fills, corpus, ids, recover_.shared.json, cfg);
                        });
                      }
                    });
    sub->add_option("--model", recover_.model, "Model file")->required();
    sub->add_option("--genotypes", recover_.genotypes, "Genotype file")->required();
    sub->add_option("--map", recover_.map, "Locus map naming the corpus loci");
    sub->add_option("--output,-o", recover_.output, "Completed genotype file (default: stdout)");
    sub->add_option("--fills", recover_.fills, "Fill list: sample_id locus_id value confidence");
    add_shared(sub, recover_.shared, true, true);
  }

  void add_impute_options(CLI::App* sub, ImputeArgs& a) {
    sub->add_option("--panel", a.panel, "Reference haplotypes over every locus of the map")->required();
    sub->add_option("--genotypes", a.genotypes, "Genotypes at the typed loci, in map order")->required();
    sub->add_option("--map", a.map, "Locus map")->required();
    sub->add_option("--flank", a.options.window.flank, "Typed loci on each side of an untyped target")
        ->check(CLI::PositiveNumber);
    sub->add_option("--window-iterations", a.options.window_max_iterations, "Iteration cap for local models");
    add_train_options(sub, a.options.train);
    sub->add_option("--output,-o", a.output,
                    "Imputation: sample_id locus_id p0 p1 p2 call confidence (default: stdout)");
  }

  ImputeOptions impute_options(const ImputeArgs& a) const {
    ImputeOptions o = a.options;
    o.batch = batch_options(a.shared);
    o.batch.threads = 1;
    o.threads = resolve_threads(a.shared.threads);
    o.train.threads = 1;
    return o;
  }

  void add_impute() {
    auto* sub = add("impute", "Genotype posteriors at untyped loci from local window models", impute_.shared,
                    [this](auto& cfg, auto& log) {
                      const HaplotypePanel panel = io::read_haplotypes(impute_.panel);
                      const GenotypeCorpus corpus = io::read_genotypes(impute_.genotypes);
                      const LocusMap map = io::read_locus_map(impute_.map);
                      const ImputationResult r = timed(
                          log, "impute", [&] { return impute_untyped(panel, corpus, map, impute_options(impute_)); });
                      emit(impute_.output,
                           [&](std::ostream& out) { io::format_imputation(out, r, impute_.shared.json, cfg); });
                    });
    add_impute_options(sub, impute_);
    add_shared(sub, impute_.shared, true, true);
  }

  void add_phase() {
    auto* sub = add("phase", "Most probable haplotype pair of every sample", phase_.shared, [this](auto& cfg, auto& log) {
      const FounderHMM model = io::read_model(phase_.model);
      const GenotypeCorpus corpus = io::read_genotypes(phase_.genotypes);
      std::vector<std::optional<PhasedPair>> pairs(corpus.size());
      timed(log, "phase", [&] {
        parallel_for(corpus.size(), phase_.shared.threads,
                     [&](std::size_t s) { pairs[s] = phase_decode(model, corpus[s]); });
      });
      HaplotypePanel out_panel;
      for (std::size_t s = 0; s < corpus.size(); ++s) {
        pairs[s]->first.id = corpus[s].sample_id + ".1";
        pairs[s]->second.id = corpus[s].sample_id + ".2";
        out_panel.push_back(std::move(pairs[s]->first));
        out_panel.push_back(std::move(pairs[s]->second));
      }
      emit(phase_.output, [&](std::ostream& out) { io::format_haplotypes(out, out_panel, cfg); });
    });
    sub->add_option("--model", phase_.model, "Model file")->required();
    sub->add_option("--genotypes", phase_.genotypes, "Genotype file")->required();
    sub->add_option("--output,-o", phase_.output, "Haplotypes <sample>.1 and <sample>.2 (default: stdout)");
    add_shared(sub, phase_.shared, false, false);
  }

  void add_pipeline() {
    auto* sub = add("pipeline", "Imputation, optionally after error correction and missing-data recovery",
                    pipeline_.args.shared, [this](auto& cfg, auto& log) {
                      const HaplotypePanel panel = io::read_haplotypes(pipeline_.args.panel);
                      const GenotypeCorpus corpus = io::read_genotypes(pipeline_.args.genotypes);
                      const LocusMap map = io::read_locus_map(pipeline_.args.map);
                      PipelineParams params;
                      params.mode = io::parse_mode(pipeline_.mode);
                      params.threshold = pipeline_.threshold;
                      params.impute = impute_options(pipeline_.args);
                      params.typed_train = params.impute.train;
                      params.typed_train.max_iterations = pipeline_.typed_iterations;
                      params.typed_train.threads = resolve_threads(pipeline_.args.shared.threads);
                      params.impute.batch.threads = params.typed_train.threads;
                      const PipelineResult r = run_pipeline(panel, corpus, map, params);
                      for (const auto& s : r.stages) log.add(s.name, s.seconds);
                      const bool json = pipeline_.args.shared.json;
                      emit(pipeline_.args.output, [&](std::ostream& out) { io::format_imputation(out, r.imputation, json, cfg); });
                      if (!pipeline_.stages.empty()) {
                        emit(pipeline_.stages, [&](std::ostream& out) { io::format_stages(out, r.stages, json, false, cfg); });
                      }
                      if (!pipeline_.corpus_out.empty()) {
                        emit(pipeline_.corpus_out, [&](std::ostream& out) { io::format_genotypes(out, r.typed_corpus, cfg); });
                      }
                      if (!pipeline_.report.empty() && params.mode == PipelineMode::EdcMdrImp) {
                        emit(pipeline_.report, [&](std::ostream& out) { io::format_error_report(out, r.errors, json, cfg); });
                      }
                    });
    add_impute_options(sub, pipeline_.args);
    sub->add_option("--mode", pipeline_.mode, "imp or edc-mdr-imp")
        ->check(CLI::IsMember({"imp", "edc-mdr-imp"}));
    sub->add_option("--threshold", pipeline_.threshold, "Error-detection likelihood-ratio threshold")
        ->check(CLI::PositiveNumber);
    sub->add_option("--typed-iterations", pipeline_.typed_iterations, "Iteration cap for the typed-locus model");
    sub->add_option("--stages", pipeline_.stages, "Per-stage counts (timings go to the log)");
    sub->add_option("--corpus-out", pipeline_.corpus_out, "Typed corpus after repair");
    sub->add_option("--report", pipeline_.report, "Error report of the detection stage");
    add_shared(sub, pipeline_.args.shared, true, true);
  }

  void add_simulate() {
    auto* sub = add("simulate", "Founder-mosaic synthetic data with injected errors and masking", simulate_.shared,
                    [this](auto& cfg, auto& log) {
                      const SimData data = timed(log, "simulate", [&] { return simulate(simulate_.config); });
                      namespace fs = std::filesystem;
                      const fs::path dir(simulate_.out_dir);
                      std::error_code ec;
                      fs::create_directories(dir, ec);
                      if (ec) throw InputError(simulate_.out_dir + ": " + ec.message());
                      auto at = [&](const char* file) { return (dir / file).string(); };
                      emit(at("founders.hap"), [&](std::ostream& o) { io::format_haplotypes(o, data.founders, cfg); });
                      emit(at("truth.hap"), [&](std::ostream& o) { io::format_haplotypes(o, data.truth_haplotypes, cfg); });
                      emit(at("truth.gen"), [&](std::ostream& o) { io::format_genotypes(o, data.truth, cfg); });
                      emit(at("observed.gen"), [&](std::ostream& o) { io::format_genotypes(o, data.observed, cfg); });
                      emit(at("reference.hap"), [&](std::ostream& o) { io::format_haplotypes(o, data.reference, cfg); });
                      emit(at("loci.map"), [&](std::ostream& o) { io::format_locus_map(o, data.map, cfg); });
                      auto events = [&](const std::vector<InjectedEvent>& ev) {
                        return [&, rows = event_rows(ev, data)](std::ostream& o) {
                          for (const auto& c : cfg) o << "## " << c << '\n';
                          o << "sample_id\tlocus_id\ttruth\tobserved\n";
                          for (const auto& r : rows) o << r << '\n';
                        };
                      };
                      emit(at("errors.tsv"), events(data.errors));
                      emit(at("missing.tsv"), events(data.missing));
                    });
    add_sim_options(sub, simulate_.config, "--seed");
    sub->add_option("--out-dir", simulate_.out_dir, "Directory for the generated files")->required();
    add_shared(sub, simulate_.shared, false, false);
  }

  void add_evaluate() {
    auto* sub = add("evaluate", "Discordance of calls against the truth", evaluate_.shared, [this](auto& cfg, auto&) {
      const GenotypeCorpus truth = io::read_genotypes(evaluate_.truth);
      EvalReport report;
      if (!evaluate_.calls.empty()) {
        if (evaluate_.map.empty()) throw InputError("evaluate --calls needs --map");
        const LocusMap map = io::read_locus_map(evaluate_.map);
        std::ifstream in(evaluate_.calls, std::ios::binary);
        if (!in) throw InputError(evaluate_.calls + ": cannot open for reading");
        report = evaluate(io::parse_imputation(in, evaluate_.calls, map), truth);
      } else {
        const GenotypeCorpus calls = io::read_genotypes(evaluate_.corpus);
        GenotypeCorpus aligned = truth;
        if (!evaluate_.map.empty() && corpus_width(calls) != corpus_width(truth)) {
          aligned = restrict_loci(truth, io::read_locus_map(evaluate_.map).typed_indices());
        }
        report = evaluate(calls, aligned);
      }
      emit(evaluate_.output, [&](std::ostream& out) { io::format_eval(out, report, evaluate_.shared.json, cfg); });
    });
    sub->add_option("--truth", evaluate_.truth, "Full-locus truth genotypes")->required();
    auto* calls = sub->add_option("--calls", evaluate_.calls, "Imputation output");
    auto* corpus = sub->add_option("--corpus", evaluate_.corpus, "Completed genotype file");
    calls->excludes(corpus);
    sub->add_option("--map", evaluate_.map, "Locus map");
    sub->add_option("--output,-o", evaluate_.output, "Report (default: stdout)");
    sub->callback([calls, corpus] {
      if (calls->count() + corpus->count() == 0) throw CLI::RequiredError("--calls or --corpus");
    });
    add_shared(sub, evaluate_.shared, false, true);
  }

  void add_sweep() {
    auto* sub = add("sweep", "Grid over founders, panel sizes, flanks and modes", sweep_.shared,
                    [this](auto& cfg, auto& log) {
                      SweepConfig c = sweep_.config;
                      c.modes.clear();
                      for (const auto& m : sweep_.modes) c.modes.push_back(io::parse_mode(m));
                      c.threads = resolve_threads(sweep_.shared.threads);
                      const auto rows = sweep(c);
                      for (const auto& r : rows) {
                        log.add("cell/K=" + std::to_string(r.founders) + "/panel=" + std::to_string(r.panel_size) +
                                    "/flank=" + std::to_string(r.flank) + "/" + io::mode_name(r.mode),
                                r.seconds);
                      }
                      emit(sweep_.output, [&](std::ostream& out) { io::format_sweep_table(out, rows, false, cfg); });
                      if (!sweep_.plot.empty()) {
                        emit(sweep_.plot, [&](std::ostream& out) { io::format_sweep_plot(out, rows, false); });
                      }
                      if (!sweep_.timing_plot.empty()) {
                        emit(sweep_.timing_plot, [&](std::ostream& out) { io::format_sweep_plot(out, rows, true); });
                      }
                    });
    add_sim_options(sub, sweep_.config.sim, "--sim-seed");
    add_train_options(sub, sweep_.config.train);
    sub->add_option("--founder-grid", sweep_.config.founders, "Founder counts")->delimiter(',');
    sub->add_option("--panel-grid", sweep_.config.panel_sizes, "Training panel sizes")->delimiter(',');
    sub->add_option("--flank-grid", sweep_.config.flanks, "Flank widths")->delimiter(',');
    sub->add_option("--modes", sweep_.modes, "Pipeline modes")->delimiter(',')->check(CLI::IsMember({"imp", "edc-mdr-imp"}));
    sub->add_option("--threshold", sweep_.config.threshold, "Error-detection threshold");
    sub->add_option("--repetitions", sweep_.config.repetitions, "Timed repetitions per cell")
        ->check(CLI::PositiveNumber);
    sub->add_option("--output,-o", sweep_.output, "Table (default: stdout)");
    sub->add_option("--plot", sweep_.plot, "Plot-data series of error rates");
    sub->add_option("--timing-plot", sweep_.timing_plot, "Plot-data series including wall times");
    add_shared(sub, sweep_.shared, false, false);
  }

  void add_bench() {
    auto* sub = add("bench", "Runtime scaling of batched inference in loci, samples and founders", bench_.shared,
                    [this](auto& cfg, auto&) {
                      BenchConfig c = bench_.config;
                      c.use_trie = !bench_.shared.naive;
                      const BenchResult r = run_scaling_bench(c);
                      emit(bench_.output, [&](std::ostream& out) { io::format_bench(out, r, cfg); });
                    });
    auto& c = bench_.config;
    sub->add_option("--loci-grid", c.loci_values, "Locus counts")->delimiter(',');
    sub->add_option("--sample-grid", c.sample_values, "Sample counts")->delimiter(',');
    sub->add_option("--founder-grid", c.founder_values, "Founder counts")->delimiter(',');
    sub->add_option("--loci", c.loci, "Loci when another axis varies");
    sub->add_option("--samples", c.samples, "Samples when another axis varies");
    sub->add_option("--founders,-K", c.founders, "Founders when another axis varies");
    sub->add_option("--repetitions", c.repetitions, "Timed repetitions per point")->check(CLI::PositiveNumber);
    sub->add_option("--seed", c.seed, "Seed for the random model and corpus");
    sub->add_option("--output,-o", bench_.output, "Points and fits (default: stdout)");
    add_shared(sub, bench_.shared, true, false);
  }

  CLI::App app_;
  std::map<std::string, Command> commands_;
  TrainArgs train_;
  ModelArgs detect_, correct_, recover_, phase_;
  ImputeArgs impute_;
  PipelineArgs pipeline_;
  SimulateArgs simulate_;
  EvaluateArgs evaluate_;
  SweepArgs sweep_;
  BenchArgs bench_;
};

}  // namespace

int guarded(const std::string& command, const std::function<void()>& body) {
  try {
    body();
  } catch (const ZeroProbabilityError& e) {
    std::cerr << "fhmm " << command << ": input error: " << e.what() << '\n';
    return kInputError;
  } catch (const InputError& e) {
    std::cerr << "fhmm " << command << ": input error: " << e.what() << '\n';
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "fhmm " << command << ": internal error: " << e.what() << '\n';
    return kInternalError;
  }
  return kOk;
}

int run(int argc, char** argv) {
  try {
    Cli cli;
    return cli.run(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "fhmm: internal error: " << e.what() << '\n';
    return kInternalError;
  }
}

}  // namespace fhmm::cli

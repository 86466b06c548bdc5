#include "fhmm/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "fhmm/errors.hpp"

namespace fhmm::io {
namespace {

using nlohmann::json;

class LineReader {
 public:
  LineReader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

  /// Next non-comment, non-blank line.
  bool next(std::string& line) {
    while (std::getline(in_, line)) {
      ++number_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line.rfind("##", 0) == 0) continue;
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(std::size_t field, const std::string& why) const {
    std::ostringstream msg;
    msg << source_ << ':' << number_ << ": ";
    if (field) msg << "field " << field << ": ";
    msg << why;
    throw InputError(msg.str());
  }

  std::size_t line_number() const { return number_; }

 private:
  std::istream& in_;
  std::string source_;
  std::size_t number_ = 0;
};

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t tab = line.find('\t', start);
    out.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
    if (tab == std::string::npos) return out;
    start = tab + 1;
  }
}

template <typename T>
bool parse_number(const std::string& text, T& value) {
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  return ec == std::errc() && ptr == last;
}

double parse_real(const LineReader& r, std::size_t field, const std::string& text) {
  if (text == "inf") return std::numeric_limits<double>::infinity();
  double v = 0.0;
  if (!parse_number(text, v)) r.fail(field, "expected a number, got '" + text + "'");
  return v;
}

std::size_t parse_count(const LineReader& r, std::size_t field, const std::string& text) {
  std::size_t v = 0;
  if (!parse_number(text, v)) r.fail(field, "expected a non-negative integer, got '" + text + "'");
  return v;
}

void write_comments(std::ostream& out, const Comments& comments) {
  for (const auto& c : comments) out << "## " << c << '\n';
}

/// "#samples=<m> loci=<n>" header shared by genotype and haplotype files.
std::pair<std::size_t, std::size_t> parse_sequence_header(LineReader& r) {
  std::string line;
  if (!r.next(line)) r.fail(0, "missing '#samples=<m> loci=<n>' header");
  std::size_t m = 0, n = 0;
  std::istringstream hs(line);
  std::string a, b, extra;
  hs >> a >> b;
  if (a.rfind("#samples=", 0) != 0 || b.rfind("loci=", 0) != 0 || (hs >> extra)) {
    r.fail(0, "malformed header '" + line + "', expected '#samples=<m> loci=<n>'");
  }
  m = parse_count(r, 1, a.substr(9));
  n = parse_count(r, 2, b.substr(5));
  return {m, n};
}

/// Sample id plus the concatenation of the remaining fields.
std::pair<std::string, std::string> split_row(const LineReader& r, const std::string& line) {
  auto fields = split_tabs(line);
  if (fields.size() < 2) r.fail(0, "expected '<id>\\t<symbols>'");
  if (fields[0].empty()) r.fail(1, "empty id");
  std::string symbols;
  for (std::size_t f = 1; f < fields.size(); ++f) symbols += fields[f];
  return {fields[0], symbols};
}

template <typename Row, typename Decode>
std::vector<Row> parse_sequences(std::istream& in, const std::string& source, Decode&& decode) {
  LineReader r(in, source);
  const auto [m, n] = parse_sequence_header(r);
  std::vector<Row> rows;
  std::unordered_set<std::string> seen;
  std::string line;
  while (r.next(line)) {
    auto [id, text] = split_row(r, line);
    if (!seen.insert(id).second) r.fail(1, "duplicate id '" + id + "'");
    if (text.size() != n) {
      r.fail(2, "sample '" + id + "' has " + std::to_string(text.size()) + " symbols, header says " +
                    std::to_string(n));
    }
    rows.push_back(decode(r, std::move(id), text));
  }
  if (rows.size() != m) {
    r.fail(0, "header declares " + std::to_string(m) + " rows, found " + std::to_string(rows.size()));
  }
  return rows;
}

std::string typed_label(bool typed) { return typed ? "typed" : "untyped"; }

}  // namespace

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const char* mode_name(PipelineMode mode) noexcept {
  return mode == PipelineMode::Imp ? "imp" : "edc-mdr-imp";
}

PipelineMode parse_mode(const std::string& name) {
  if (name == "imp") return PipelineMode::Imp;
  if (name == "edc-mdr-imp") return PipelineMode::EdcMdrImp;
  throw InputError("unknown pipeline mode '" + name + "' (expected imp or edc-mdr-imp)");
}

// ---------------------------------------------------------------------------

GenotypeCorpus parse_genotypes(std::istream& in, const std::string& source) {
  return parse_sequences<MultilocusGenotype>(in, source, [](const LineReader& r, std::string id, const std::string& text) {
    MultilocusGenotype g{std::move(id), {}};
    g.symbols.reserve(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
      auto s = genotype_from_char(text[i]);
      if (!s) r.fail(2, "invalid genotype symbol '" + std::string(1, text[i]) + "' at locus " + std::to_string(i + 1));
      g.symbols.push_back(*s);
    }
    return g;
  });
}

void format_genotypes(std::ostream& out, const GenotypeCorpus& corpus, const Comments& comments) {
  out << "#samples=" << corpus.size() << " loci=" << (corpus.empty() ? 0 : corpus.front().size()) << '\n';
  write_comments(out, comments);
  for (const auto& g : corpus) out << g.sample_id << '\t' << to_string(g.symbols) << '\n';
}

HaplotypePanel parse_haplotypes(std::istream& in, const std::string& source) {
  return parse_sequences<HaplotypeSequence>(in, source, [](const LineReader& r, std::string id, const std::string& text) {
    HaplotypeSequence h{std::move(id), {}};
    h.alleles.reserve(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
      auto a = allele_from_char(text[i]);
      if (!a) r.fail(2, "invalid allele '" + std::string(1, text[i]) + "' at locus " + std::to_string(i + 1));
      h.alleles.push_back(*a);
    }
    return h;
  });
}

void format_haplotypes(std::ostream& out, const HaplotypePanel& panel, const Comments& comments) {
  out << "#samples=" << panel.size() << " loci=" << (panel.empty() ? 0 : panel.front().size()) << '\n';
  write_comments(out, comments);
  for (const auto& h : panel) out << h.id << '\t' << to_string(h.alleles) << '\n';
}

LocusMap parse_locus_map(std::istream& in, const std::string& source) {
  LineReader r(in, source);
  std::vector<Locus> loci;
  std::string line;
  while (r.next(line)) {
    if (line[0] == '#') continue;
    auto f = split_tabs(line);
    if (f.size() != 3) r.fail(0, "expected '<locus_id>\\t<position>\\t<typed|untyped>'");
    if (f[0].empty()) r.fail(1, "empty locus id");
    std::int64_t pos = 0;
    if (!parse_number(f[1], pos)) r.fail(2, "invalid position '" + f[1] + "'");
    if (f[2] != "typed" && f[2] != "untyped") r.fail(3, "expected 'typed' or 'untyped', got '" + f[2] + "'");
    if (!loci.empty() && pos <= loci.back().position) r.fail(2, "positions must be strictly increasing");
    loci.push_back({f[0], pos, f[2] == "typed"});
  }
  try {
    return LocusMap(std::move(loci));
  } catch (const InputError& e) {
    throw InputError(source + ": " + e.what());
  }
}

void format_locus_map(std::ostream& out, const LocusMap& map, const Comments& comments) {
  write_comments(out, comments);
  for (const auto& l : map.loci()) out << l.id << '\t' << l.position << '\t' << typed_label(l.typed) << '\n';
}

// ---------------------------------------------------------------------------

FounderHMM parse_model(std::istream& in, const std::string& source) {
  LineReader r(in, source);
  std::string line;
  if (!r.next(line) || line != "#fhmm-model v1") r.fail(0, "expected '#fhmm-model v1' header");
  if (!r.next(line)) r.fail(0, "missing 'founders=<K> loci=<n>' line");
  std::size_t k = 0, n = 0;
  {
    auto f = split_tabs(line);
    if (f.size() != 2 || f[0].rfind("founders=", 0) != 0 || f[1].rfind("loci=", 0) != 0) {
      r.fail(0, "expected 'founders=<K>\\tloci=<n>'");
    }
    k = parse_count(r, 1, f[0].substr(9));
    n = parse_count(r, 2, f[1].substr(5));
    if (k < 1 || n < 1) r.fail(0, "founders and loci must be positive");
  }

  auto read_values = [&](const std::string& tag, std::size_t index_fields, std::vector<double>& out) {
    if (!r.next(line)) r.fail(0, "unexpected end of model, expected '" + tag + "' row");
    auto f = split_tabs(line);
    if (f[0] != tag) r.fail(1, "expected '" + tag + "', got '" + f[0] + "'");
    if (f.size() != 1 + index_fields + k) {
      r.fail(0, "'" + tag + "' row needs " + std::to_string(index_fields + k) + " values");
    }
    for (std::size_t j = 1 + index_fields; j < f.size(); ++j) out.push_back(parse_real(r, j + 1, f[j]));
  };

  std::vector<double> initial, transitions, emissions;
  read_values("initial", 0, initial);
  for (std::size_t row = 0; row < (n - 1) * k; ++row) read_values("transition", 2, transitions);
  for (std::size_t i = 0; i < n; ++i) read_values("emission", 1, emissions);
  if (r.next(line)) r.fail(0, "trailing content after the model");
  try {
    return FounderHMM(k, n, std::move(initial), std::move(transitions), std::move(emissions));
  } catch (const InputError& e) {
    throw InputError(source + ": " + e.what());
  }
}

void format_model(std::ostream& out, const FounderHMM& model, const Comments& comments) {
  const std::size_t k = model.founders();
  out << "#fhmm-model v1\n";
  write_comments(out, comments);
  out << "founders=" << k << "\tloci=" << model.loci() << '\n';
  out << "initial";
  for (double v : model.initial()) out << '\t' << format_double(v);
  out << '\n';
  for (std::size_t i = 0; i + 1 < model.loci(); ++i) {
    for (std::size_t a = 0; a < k; ++a) {
      out << "transition\t" << i << '\t' << a;
      for (std::size_t b = 0; b < k; ++b) out << '\t' << format_double(model.transition(i, a, b));
      out << '\n';
    }
  }
  for (std::size_t i = 0; i < model.loci(); ++i) {
    out << "emission\t" << i;
    for (double v : model.emission_row(i)) out << '\t' << format_double(v);
    out << '\n';
  }
}

// ---------------------------------------------------------------------------

namespace {

json ratio_json(double ratio) {
  if (std::isinf(ratio)) return "inf";
  return ratio;
}

std::string symbol(Genotype g) { return std::string(1, to_char(g)); }

}  // namespace

void format_error_report(std::ostream& out, const ErrorReport& report, bool json_output, const Comments& comments) {
  if (json_output) {
    json records = json::array();
    for (const auto& e : report.entries) {
      records.push_back({{"sample_id", e.sample_id},
                         {"locus_id", e.locus_id},
                         {"observed", symbol(e.observed)},
                         {"ratio", ratio_json(e.ratio)},
                         {"flagged", e.flagged},
                         {"suggested", symbol(e.suggested)}});
    }
    json doc{{"config", comments}, {"threshold", report.threshold}, {"entries", records}};
    out << doc.dump(1) << '\n';
    return;
  }
  write_comments(out, comments);
  out << "sample_id\tlocus_id\tobserved\tratio\tflagged\tsuggested\n";
  for (const auto& e : report.entries) {
    out << e.sample_id << '\t' << e.locus_id << '\t' << to_char(e.observed) << '\t' << format_double(e.ratio) << '\t'
        << (e.flagged ? 1 : 0) << '\t' << to_char(e.suggested) << '\n';
  }
}

ErrorReport parse_error_report(std::istream& in, const std::string& source, const GenotypeCorpus& corpus,
                               const std::vector<std::string>& locus_ids) {
  std::unordered_map<std::string, std::size_t> sample_index, locus_index;
  for (std::size_t s = 0; s < corpus.size(); ++s) sample_index.emplace(corpus[s].sample_id, s);
  for (std::size_t i = 0; i < locus_ids.size(); ++i) locus_index.emplace(locus_ids[i], i);

  LineReader r(in, source);
  std::string line;
  if (!r.next(line) || line != "sample_id\tlocus_id\tobserved\tratio\tflagged\tsuggested") {
    r.fail(0, "expected the error-report column header");
  }
  ErrorReport report;
  report.threshold = std::numeric_limits<double>::quiet_NaN();
  while (r.next(line)) {
    auto f = split_tabs(line);
    if (f.size() != 6) r.fail(0, "expected 6 columns");
    ErrorEntry e;
    auto si = sample_index.find(f[0]);
    if (si == sample_index.end()) r.fail(1, "unknown sample '" + f[0] + "'");
    auto li = locus_index.find(f[1]);
    if (li == locus_index.end()) r.fail(2, "unknown locus '" + f[1] + "'");
    e.sample = si->second;
    e.locus = li->second;
    e.sample_id = f[0];
    e.locus_id = f[1];
    auto obs = f[2].size() == 1 ? genotype_from_char(f[2][0]) : std::nullopt;
    auto sug = f[5].size() == 1 ? genotype_from_char(f[5][0]) : std::nullopt;
    if (!obs || is_missing(*obs)) r.fail(3, "invalid observed genotype '" + f[2] + "'");
    if (!sug || is_missing(*sug)) r.fail(6, "invalid suggested genotype '" + f[5] + "'");
    e.observed = *obs;
    e.suggested = *sug;
    e.ratio = parse_real(r, 4, f[3]);
    if (f[4] != "0" && f[4] != "1") r.fail(5, "flagged must be 0 or 1");
    e.flagged = f[4] == "1";
    report.entries.push_back(std::move(e));
  }
  return report;
}

void format_imputation(std::ostream& out, const ImputationResult& result, bool json_output, const Comments& comments) {
  if (json_output) {
    json records = json::array();
    for (const auto& e : result.entries) {
      records.push_back({{"sample_id", result.sample_ids[e.sample]},
                         {"locus_id", result.locus_ids[e.locus]},
                         {"posterior", {e.q[0], e.q[1], e.q[2]}},
                         {"call", symbol(e.call)},
                         {"confidence", e.confidence}});
    }
    json doc{{"config", comments}, {"entries", records}};
    out << doc.dump(1) << '\n';
    return;
  }
  write_comments(out, comments);
  out << "sample_id\tlocus_id\tp0\tp1\tp2\tcall\tconfidence\n";
  for (const auto& e : result.entries) {
    out << result.sample_ids[e.sample] << '\t' << result.locus_ids[e.locus] << '\t' << format_double(e.q[0]) << '\t'
        << format_double(e.q[1]) << '\t' << format_double(e.q[2]) << '\t' << to_char(e.call) << '\t'
        << format_double(e.confidence) << '\n';
  }
}

ImputationResult parse_imputation(std::istream& in, const std::string& source, const LocusMap& map) {
  std::unordered_map<std::string, std::size_t> locus_index, sample_index;
  for (std::size_t i = 0; i < map.size(); ++i) locus_index.emplace(map[i].id, i);

  LineReader r(in, source);
  std::string line;
  if (!r.next(line) || line != "sample_id\tlocus_id\tp0\tp1\tp2\tcall\tconfidence") {
    r.fail(0, "expected the imputation column header");
  }
  ImputationResult result;
  result.locus_ids = map.ids();
  while (r.next(line)) {
    auto f = split_tabs(line);
    if (f.size() != 7) r.fail(0, "expected 7 columns");
    ImputationEntry e;
    auto [it, inserted] = sample_index.emplace(f[0], result.sample_ids.size());
    if (inserted) result.sample_ids.push_back(f[0]);
    e.sample = it->second;
    auto li = locus_index.find(f[1]);
    if (li == locus_index.end()) r.fail(2, "unknown locus '" + f[1] + "'");
    e.locus = li->second;
    for (std::size_t x = 0; x < 3; ++x) e.q[x] = parse_real(r, 3 + x, f[2 + x]);
    auto call = f[5].size() == 1 ? genotype_from_char(f[5][0]) : std::nullopt;
    if (!call || is_missing(*call)) r.fail(6, "invalid call '" + f[5] + "'");
    e.call = *call;
    e.confidence = parse_real(r, 7, f[6]);
    result.entries.push_back(e);
  }
  return result;
}

void format_fills(std::ostream& out, const std::vector<Fill>& fills, const GenotypeCorpus& corpus,
                  const std::vector<std::string>& locus_ids, bool json_output, const Comments& comments) {
  if (json_output) {
    json records = json::array();
    for (const auto& f : fills) {
      records.push_back({{"sample_id", corpus[f.sample].sample_id},
                         {"locus_id", locus_ids[f.locus]},
                         {"value", symbol(f.value)},
                         {"confidence", f.confidence}});
    }
    out << json{{"config", comments}, {"fills", records}}.dump(1) << '\n';
    return;
  }
  write_comments(out, comments);
  out << "sample_id\tlocus_id\tvalue\tconfidence\n";
  for (const auto& f : fills) {
    out << corpus[f.sample].sample_id << '\t' << locus_ids[f.locus] << '\t' << to_char(f.value) << '\t'
        << format_double(f.confidence) << '\n';
  }
}

void format_eval(std::ostream& out, const EvalReport& report, bool json_output, const Comments& comments) {
  if (json_output) {
    json confusion = json::array();
    for (const auto& row : report.confusion) confusion.push_back({row[0], row[1], row[2]});
    out << json{{"config", comments},
                {"scored", report.scored},
                {"discordant", report.discordant},
                {"discordance_rate", report.discordance_rate},
                {"missing_calls", report.missing_calls},
                {"confusion", confusion}}
               .dump(1)
        << '\n';
    return;
  }
  write_comments(out, comments);
  out << "scored\t" << report.scored << '\n';
  out << "discordant\t" << report.discordant << '\n';
  out << "discordance_rate\t" << format_double(report.discordance_rate) << '\n';
  out << "missing_calls\t" << report.missing_calls << '\n';
  for (std::size_t t = 0; t < 3; ++t) {
    out << "confusion_truth_" << t;
    for (std::size_t c = 0; c < 3; ++c) out << '\t' << report.confusion[t][c];
    out << '\n';
  }
}

void format_stages(std::ostream& out, const std::vector<StageReport>& stages, bool json_output, bool with_timing,
                   const Comments& comments) {
  if (json_output) {
    json records = json::array();
    for (const auto& s : stages) {
      json rec{{"stage", s.name}, {"changes", s.changes}, {"locus_evaluations", s.locus_evaluations}};
      if (with_timing) rec["seconds"] = s.seconds;
      records.push_back(rec);
    }
    out << json{{"config", comments}, {"stages", records}}.dump(1) << '\n';
    return;
  }
  write_comments(out, comments);
  out << "stage\tchanges\tlocus_evaluations" << (with_timing ? "\tseconds" : "") << '\n';
  for (const auto& s : stages) {
    out << s.name << '\t' << s.changes << '\t' << s.locus_evaluations;
    if (with_timing) out << '\t' << format_double(s.seconds);
    out << '\n';
  }
}

void format_sweep_table(std::ostream& out, const std::vector<SweepRow>& rows, bool with_timing,
                        const Comments& comments) {
  write_comments(out, comments);
  out << "founders\tpanel_size\tflank\tmode\tscored\tdiscordant\tdiscordance_rate\t"
      << (with_timing ? "seconds\t" : "") << "status\n";
  for (const auto& r : rows) {
    out << r.founders << '\t' << r.panel_size << '\t' << r.flank << '\t' << mode_name(r.mode) << '\t' << r.eval.scored
        << '\t' << r.eval.discordant << '\t' << format_double(r.eval.discordance_rate) << '\t';
    if (with_timing) out << format_double(r.seconds) << '\t';
    out << (r.failed ? "failed: " + r.error : std::string("ok")) << '\n';
  }
}

void format_sweep_plot(std::ostream& out, const std::vector<SweepRow>& rows, bool with_timing) {
  for (const auto& r : rows) {
    if (r.failed) continue;
    const std::string mode = mode_name(r.mode);
    const std::string flank = "/flank=" + std::to_string(r.flank);
    out << "error_vs_founders/" << mode << flank << "/panel=" << r.panel_size << '\t' << r.founders << '\t'
        << format_double(r.eval.discordance_rate) << '\n';
    out << "error_vs_panel/" << mode << flank << "/K=" << r.founders << '\t' << r.panel_size << '\t'
        << format_double(r.eval.discordance_rate) << '\n';
    out << "error_vs_flank/" << mode << "/K=" << r.founders << "/panel=" << r.panel_size << '\t' << r.flank << '\t'
        << format_double(r.eval.discordance_rate) << '\n';
    if (with_timing) {
      out << "seconds_vs_founders/" << mode << flank << "/panel=" << r.panel_size << '\t' << r.founders << '\t'
          << format_double(r.seconds) << '\n';
    }
  }
}

void format_bench(std::ostream& out, const BenchResult& result, const Comments& comments) {
  write_comments(out, comments);
  out << "axis\tx\tseconds\n";
  auto points = [&](const char* axis, const std::vector<ScalingPoint>& pts) {
    for (const auto& p : pts) out << axis << '\t' << format_double(p.x) << '\t' << format_double(p.seconds) << '\n';
  };
  points("loci", result.by_loci);
  points("samples", result.by_samples);
  points("founders", result.by_founders);
  out << "fit\taxis\texponent\tintercept\n";
  auto fit = [&](const char* axis, const ScalingFit& f) {
    out << "fit\t" << axis << '\t' << format_double(f.exponent) << '\t' << format_double(f.intercept) << '\n';
  };
  fit("loci", result.loci_fit);
  fit("samples", result.samples_fit);
  fit("founders", result.founders_fit);
}

// ---------------------------------------------------------------------------

void write_file_atomically(const std::string& path, const std::function<void(std::ostream&)>& body) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  try {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError(path + ": cannot open for writing");
    body(out);
    out.flush();
    if (!out) throw InputError(path + ": write failed");
  } catch (...) {
    std::error_code ignored;
    fs::remove(tmp, ignored);
    throw;
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw InputError(path + ": cannot move output into place: " + ec.message());
  }
}

namespace {

template <typename Parse>
auto read_with(const std::string& path, Parse&& parse) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(path + ": cannot open for reading");
  return parse(in, path);
}

}  // namespace

GenotypeCorpus read_genotypes(const std::string& path) {
  return read_with(path, [](std::istream& in, const std::string& s) { return parse_genotypes(in, s); });
}
HaplotypePanel read_haplotypes(const std::string& path) {
  return read_with(path, [](std::istream& in, const std::string& s) { return parse_haplotypes(in, s); });
}
LocusMap read_locus_map(const std::string& path) {
  return read_with(path, [](std::istream& in, const std::string& s) { return parse_locus_map(in, s); });
}
FounderHMM read_model(const std::string& path) {
  return read_with(path, [](std::istream& in, const std::string& s) { return parse_model(in, s); });
}

}  // namespace fhmm::io

#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "fhmm/analysis.hpp"
#include "fhmm/founder_hmm.hpp"
#include "fhmm/genotype.hpp"
#include "fhmm/simulate.hpp"

namespace fhmm::io {

// Text formats. Lines starting with "##" are comments and may appear
// anywhere; writers use them to echo the effective configuration. Parse
// errors are InputError with "<source>:<line>: field <k>: <reason>".
//
//   genotypes   #samples=<m> loci=<n>
//               <sample_id>\t<symbols over 0,1,2,?>
//   haplotypes  same header and layout, symbols over 0,1
//   locus map   <locus_id>\t<position>\t<typed|untyped>
//   model       #fhmm-model v1 / founders=<K> loci=<n> / initial, transition
//               and emission rows, 17 significant digits

using Comments = std::vector<std::string>;

GenotypeCorpus parse_genotypes(std::istream& in, const std::string& source);
void format_genotypes(std::ostream& out, const GenotypeCorpus& corpus, const Comments& comments = {});

HaplotypePanel parse_haplotypes(std::istream& in, const std::string& source);
void format_haplotypes(std::ostream& out, const HaplotypePanel& panel, const Comments& comments = {});

LocusMap parse_locus_map(std::istream& in, const std::string& source);
void format_locus_map(std::ostream& out, const LocusMap& map, const Comments& comments = {});

FounderHMM parse_model(std::istream& in, const std::string& source);
void format_model(std::ostream& out, const FounderHMM& model, const Comments& comments = {});

/// Columns: sample_id locus_id observed ratio flagged suggested.
void format_error_report(std::ostream& out, const ErrorReport& report, bool json, const Comments& comments = {});
/// Resolves sample and locus ids against the corpus and locus ids.
ErrorReport parse_error_report(std::istream& in, const std::string& source, const GenotypeCorpus& corpus,
                               const std::vector<std::string>& locus_ids);

/// Columns: sample_id locus_id p0 p1 p2 call confidence.
void format_imputation(std::ostream& out, const ImputationResult& result, bool json, const Comments& comments = {});
/// Sample order follows first appearance; loci resolve against `map`.
ImputationResult parse_imputation(std::istream& in, const std::string& source, const LocusMap& map);

/// Columns: sample_id locus_id value confidence.
void format_fills(std::ostream& out, const std::vector<Fill>& fills, const GenotypeCorpus& corpus,
                  const std::vector<std::string>& locus_ids, bool json, const Comments& comments = {});

void format_eval(std::ostream& out, const EvalReport& report, bool json, const Comments& comments = {});
void format_stages(std::ostream& out, const std::vector<StageReport>& stages, bool json, bool with_timing,
                   const Comments& comments = {});

/// Tab-separated sweep table and a plot-data file of
/// "<series>\t<x>\t<y>" rows. Wall times appear only with `with_timing`.
void format_sweep_table(std::ostream& out, const std::vector<SweepRow>& rows, bool with_timing,
                        const Comments& comments = {});
void format_sweep_plot(std::ostream& out, const std::vector<SweepRow>& rows, bool with_timing);

/// Measured points ("<axis>\t<x>\t<seconds>") followed by the fits.
void format_bench(std::ostream& out, const BenchResult& result, const Comments& comments = {});

const char* mode_name(PipelineMode mode) noexcept;
PipelineMode parse_mode(const std::string& name);

/// Shortest round-trip decimal form with 17 significant digits; "inf" for
/// infinity.
std::string format_double(double v);

// File helpers. Writes go to a temporary sibling and are renamed into place.
void write_file_atomically(const std::string& path, const std::function<void(std::ostream&)>& body);

GenotypeCorpus read_genotypes(const std::string& path);
HaplotypePanel read_haplotypes(const std::string& path);
LocusMap read_locus_map(const std::string& path);
FounderHMM read_model(const std::string& path);

}  // namespace fhmm::io

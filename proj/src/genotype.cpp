#include "fhmm/genotype.hpp"

#include <stdexcept>
#include <unordered_set>

#include "fhmm/errors.hpp"

namespace fhmm {

Genotype genotype_from_code(int value) {
  if (value < 0 || value > 2) throw std::out_of_range("genotype code out of range: " + std::to_string(value));
  return static_cast<Genotype>(value);
}

char to_char(Genotype g) noexcept {
  switch (g) {
    case Genotype::HomMajor: return '0';
    case Genotype::Het: return '1';
    case Genotype::HomMinor: return '2';
    case Genotype::Missing: return '?';
  }
  return '?';
}

char to_char(Allele a) noexcept { return a == Allele::Major ? '0' : '1'; }

std::optional<Genotype> genotype_from_char(char c) noexcept {
  switch (c) {
    case '0': return Genotype::HomMajor;
    case '1': return Genotype::Het;
    case '2': return Genotype::HomMinor;
    case '?': return Genotype::Missing;
    default: return std::nullopt;
  }
}

std::optional<Allele> allele_from_char(char c) noexcept {
  if (c == '0') return Allele::Major;
  if (c == '1') return Allele::Minor;
  return std::nullopt;
}

MultilocusGenotype substitute(const MultilocusGenotype& g, std::size_t i, Genotype x) {
  if (i >= g.size()) {
    throw std::out_of_range("locus " + std::to_string(i) + " outside genotype of length " +
                            std::to_string(g.size()));
  }
  MultilocusGenotype out = g;
  out.symbols[i] = x;
  return out;
}

MultilocusGenotype combine(const HaplotypeSequence& a, const HaplotypeSequence& b,
                           std::string sample_id) {
  if (a.size() != b.size()) throw InputError("cannot combine haplotypes of different lengths");
  MultilocusGenotype g{std::move(sample_id), {}};
  g.symbols.reserve(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) g.symbols.push_back(genotype_of(a[i], b[i]));
  return g;
}

std::string to_string(const std::vector<Genotype>& symbols) {
  std::string s;
  s.reserve(symbols.size());
  for (Genotype g : symbols) s.push_back(to_char(g));
  return s;
}

std::string to_string(const std::vector<Allele>& alleles) {
  std::string s;
  s.reserve(alleles.size());
  for (Allele a : alleles) s.push_back(to_char(a));
  return s;
}

LocusMap::LocusMap(std::vector<Locus> loci) : loci_(std::move(loci)) {
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < loci_.size(); ++i) {
    if (loci_[i].id.empty()) throw InputError("locus " + std::to_string(i) + " has an empty id");
    if (!seen.insert(loci_[i].id).second) throw InputError("duplicate locus id '" + loci_[i].id + "'");
    if (i > 0 && loci_[i].position <= loci_[i - 1].position) {
      throw InputError("locus positions must be strictly increasing (at '" + loci_[i].id + "')");
    }
  }
}

std::vector<std::size_t> LocusMap::typed_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < loci_.size(); ++i)
    if (loci_[i].typed) out.push_back(i);
  return out;
}

std::vector<std::size_t> LocusMap::untyped_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < loci_.size(); ++i)
    if (!loci_[i].typed) out.push_back(i);
  return out;
}

LocusMap LocusMap::subset(const std::vector<std::size_t>& indices) const {
  std::vector<Locus> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(loci_.at(i));
  return LocusMap(std::move(out));
}

std::vector<std::string> LocusMap::ids() const {
  std::vector<std::string> out;
  out.reserve(loci_.size());
  for (const auto& l : loci_) out.push_back(l.id);
  return out;
}

void check_corpus_shape(const GenotypeCorpus& corpus, std::size_t n) {
  for (std::size_t s = 0; s < corpus.size(); ++s) {
    if (corpus[s].sample_id.empty()) throw InputError("sample " + std::to_string(s) + " has an empty id");
    if (corpus[s].size() != n) {
      throw InputError("sample '" + corpus[s].sample_id + "' has " + std::to_string(corpus[s].size()) +
                       " loci, expected " + std::to_string(n));
    }
  }
}

void check_panel_shape(const HaplotypePanel& panel, std::size_t n) {
  for (const auto& h : panel) {
    if (h.size() != n) {
      throw InputError("haplotype '" + h.id + "' has " + std::to_string(h.size()) + " loci, expected " +
                       std::to_string(n));
    }
  }
}

GenotypeCorpus restrict_loci(const GenotypeCorpus& corpus, const std::vector<std::size_t>& indices) {
  GenotypeCorpus out;
  out.reserve(corpus.size());
  for (const auto& g : corpus) {
    MultilocusGenotype r{g.sample_id, {}};
    r.symbols.reserve(indices.size());
    for (std::size_t i : indices) r.symbols.push_back(g.symbols.at(i));
    out.push_back(std::move(r));
  }
  return out;
}

HaplotypePanel restrict_loci(const HaplotypePanel& panel, const std::vector<std::size_t>& indices) {
  HaplotypePanel out;
  out.reserve(panel.size());
  for (const auto& h : panel) {
    HaplotypeSequence r{h.id, {}};
    r.alleles.reserve(indices.size());
    for (std::size_t i : indices) r.alleles.push_back(h.alleles.at(i));
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace fhmm

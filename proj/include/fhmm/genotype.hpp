#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace fhmm {

/// Allele at a biallelic SNP: 0 = major, 1 = minor.
enum class Allele : std::uint8_t { Major = 0, Minor = 1 };

/// Unordered genotype at one SNP. The numeric value of the first three codes
/// is the minor-allele count; Missing is a distinct symbol, never a count.
enum class Genotype : std::uint8_t { HomMajor = 0, Het = 1, HomMinor = 2, Missing = 3 };

inline constexpr std::array<Genotype, 3> kCalledGenotypes{Genotype::HomMajor, Genotype::Het,
                                                          Genotype::HomMinor};

constexpr int code(Genotype g) noexcept { return static_cast<int>(g); }
constexpr int code(Allele a) noexcept { return static_cast<int>(a); }
constexpr bool is_missing(Genotype g) noexcept { return g == Genotype::Missing; }

/// Genotype formed by two alleles (h + h').
constexpr Genotype genotype_of(Allele a, Allele b) noexcept {
  return static_cast<Genotype>(code(a) + code(b));
}

/// Called genotype from its minor-allele count; throws std::out_of_range outside 0..2.
Genotype genotype_from_code(int value);

/// Text symbols: '0', '1', '2', '?' for genotypes and '0', '1' for alleles.
char to_char(Genotype g) noexcept;
char to_char(Allele a) noexcept;
std::optional<Genotype> genotype_from_char(char c) noexcept;
std::optional<Allele> allele_from_char(char c) noexcept;

struct MultilocusGenotype {
  std::string sample_id;
  std::vector<Genotype> symbols;

  std::size_t size() const noexcept { return symbols.size(); }
  Genotype operator[](std::size_t i) const { return symbols[i]; }
  bool operator==(const MultilocusGenotype&) const = default;
};

struct HaplotypeSequence {
  std::string id;
  std::vector<Allele> alleles;

  std::size_t size() const noexcept { return alleles.size(); }
  Allele operator[](std::size_t i) const { return alleles[i]; }
  bool operator==(const HaplotypeSequence&) const = default;
};

using GenotypeCorpus = std::vector<MultilocusGenotype>;
using HaplotypePanel = std::vector<HaplotypeSequence>;

/// Copy of `g` with locus `i` (0-based) set to `x`. Throws std::out_of_range
/// when `i` is not a valid locus.
MultilocusGenotype substitute(const MultilocusGenotype& g, std::size_t i, Genotype x);

/// Locus-wise sum of two haplotypes of equal length.
MultilocusGenotype combine(const HaplotypeSequence& a, const HaplotypeSequence& b,
                           std::string sample_id);

std::string to_string(const std::vector<Genotype>& symbols);
std::string to_string(const std::vector<Allele>& alleles);

struct Locus {
  std::string id;
  std::int64_t position = 0;
  bool typed = true;

  bool operator==(const Locus&) const = default;
};

/// Ordered marker map. Positions are strictly increasing and ids unique.
class LocusMap {
 public:
  LocusMap() = default;
  explicit LocusMap(std::vector<Locus> loci);

  std::size_t size() const noexcept { return loci_.size(); }
  const Locus& operator[](std::size_t i) const { return loci_[i]; }
  const std::vector<Locus>& loci() const noexcept { return loci_; }

  /// Indices (into this map) of typed and untyped loci, in map order.
  std::vector<std::size_t> typed_indices() const;
  std::vector<std::size_t> untyped_indices() const;

  /// Map restricted to the given indices (must be increasing).
  LocusMap subset(const std::vector<std::size_t>& indices) const;
  std::vector<std::string> ids() const;

  bool operator==(const LocusMap&) const = default;

 private:
  std::vector<Locus> loci_;
};

/// Throws InputError unless every sample has `n` symbols and a non-empty id.
void check_corpus_shape(const GenotypeCorpus& corpus, std::size_t n);
void check_panel_shape(const HaplotypePanel& panel, std::size_t n);

/// Projection of each sequence onto the given locus indices.
GenotypeCorpus restrict_loci(const GenotypeCorpus& corpus, const std::vector<std::size_t>& indices);
HaplotypePanel restrict_loci(const HaplotypePanel& panel, const std::vector<std::size_t>& indices);

}  // namespace fhmm

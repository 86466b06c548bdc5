#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fhmm {

/// Malformed or inconsistent user input: bad shapes, invalid symbols,
/// unparsable files. The CLI maps this to exit status 1.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a genotype has probability zero under a model. Carries the
/// 0-based locus whose observation drove the probability mass to zero.
class ZeroProbabilityError : public std::runtime_error {
 public:
  ZeroProbabilityError(std::size_t locus, const std::string& what)
      : std::runtime_error(what), locus_(locus) {}

  std::size_t locus() const noexcept { return locus_; }

 private:
  std::size_t locus_;
};

}  // namespace fhmm

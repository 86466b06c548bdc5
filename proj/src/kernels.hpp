#pragma once

// Inner loops shared by single-sample inference, the trie engine and the
// pair decoder. Every batched result must be bit-identical to the
// single-sample one, so both paths call exactly these routines.

#include <array>
#include <cstddef>
#include <span>

#include "fhmm/founder_hmm.hpp"
#include "fhmm/genotype.hpp"

namespace fhmm::detail {

/// out[a][b] = M[a][b] * E(x)[a][b] with E from the minor-allele row p.
/// For Missing, E == 1 and M is copied.
inline void apply_emission(std::span<const double> m, std::span<const double> p, Genotype x,
                           std::size_t k, double* out) {
  switch (x) {
    case Genotype::HomMajor:
      for (std::size_t a = 0; a < k; ++a) {
        const double qa = 1.0 - p[a];
        for (std::size_t b = 0; b < k; ++b) out[a * k + b] = m[a * k + b] * qa * (1.0 - p[b]);
      }
      break;
    case Genotype::Het:
      for (std::size_t a = 0; a < k; ++a) {
        const double pa = p[a], qa = 1.0 - p[a];
        for (std::size_t b = 0; b < k; ++b) out[a * k + b] = m[a * k + b] * (pa * (1.0 - p[b]) + qa * p[b]);
      }
      break;
    case Genotype::HomMinor:
      for (std::size_t a = 0; a < k; ++a) {
        const double pa = p[a];
        for (std::size_t b = 0; b < k; ++b) out[a * k + b] = m[a * k + b] * pa * p[b];
      }
      break;
    case Genotype::Missing:
      for (std::size_t j = 0; j < k * k; ++j) out[j] = m[j];
      break;
  }
}

/// One collapsed forward step. `fe` holds F^{i} * E^{i}(g_i); on return
/// `out` holds the unnormalized F^{i+1}:
///   C[a][b'] = sum_{c'} fe[a][c'] T[c'][b']
///   out[b][b'] = sum_a T[a][b] C[a][b']
inline void forward_collapse(const double* fe, std::span<const double> t, std::size_t k, double* c,
                             double* out) {
  for (std::size_t j = 0; j < k * k; ++j) c[j] = 0.0;
  for (std::size_t a = 0; a < k; ++a) {
    double* crow = c + a * k;
    for (std::size_t cc = 0; cc < k; ++cc) {
      const double v = fe[a * k + cc];
      if (v == 0.0) continue;
      const double* trow = t.data() + cc * k;
      for (std::size_t b = 0; b < k; ++b) crow[b] += v * trow[b];
    }
  }
  for (std::size_t j = 0; j < k * k; ++j) out[j] = 0.0;
  for (std::size_t a = 0; a < k; ++a) {
    const double* crow = c + a * k;
    const double* trow = t.data() + a * k;
    for (std::size_t b = 0; b < k; ++b) {
      const double w = trow[b];
      if (w == 0.0) continue;
      double* orow = out + b * k;
      for (std::size_t bb = 0; bb < k; ++bb) orow[bb] += w * crow[bb];
    }
  }
}

/// One collapsed backward step. `be` holds B^{i+1} * E^{i+1}(g_{i+1}); on
/// return `out` holds the unnormalized B^{i}:
///   D[b][a'] = sum_{c'} be[b][c'] T[a'][c']
///   out[a][a'] = sum_b T[a][b] D[b][a']
inline void backward_collapse(const double* be, std::span<const double> t, std::size_t k, double* d,
                              double* out) {
  for (std::size_t b = 0; b < k; ++b) {
    const double* brow = be + b * k;
    for (std::size_t a2 = 0; a2 < k; ++a2) {
      const double* trow = t.data() + a2 * k;
      double acc = 0.0;
      for (std::size_t cc = 0; cc < k; ++cc) acc += brow[cc] * trow[cc];
      d[b * k + a2] = acc;
    }
  }
  for (std::size_t j = 0; j < k * k; ++j) out[j] = 0.0;
  for (std::size_t a = 0; a < k; ++a) {
    const double* trow = t.data() + a * k;
    double* orow = out + a * k;
    for (std::size_t b = 0; b < k; ++b) {
      const double w = trow[b];
      if (w == 0.0) continue;
      const double* drow = d + b * k;
      for (std::size_t a2 = 0; a2 < k; ++a2) orow[a2] += w * drow[a2];
    }
  }
}

inline double sum(const double* m, std::size_t count) {
  double s = 0.0;
  for (std::size_t j = 0; j < count; ++j) s += m[j];
  return s;
}

/// Divides by `total` in place, or zeroes the block when total is 0.
inline void normalize(double* m, std::size_t count, double total) {
  if (total > 0.0) {
    const double inv = 1.0 / total;
    for (std::size_t j = 0; j < count; ++j) m[j] *= inv;
  } else {
    for (std::size_t j = 0; j < count; ++j) m[j] = 0.0;
  }
}

/// sum_{f,f'} F[f][f'] B[f][f'] E(x)[f][f'] for x = 0, 1, 2.
inline std::array<double, 3> combine_locus(const double* f, const double* b, std::span<const double> p,
                                           std::size_t k) {
  std::array<double, 3> s{0.0, 0.0, 0.0};
  for (std::size_t a = 0; a < k; ++a) {
    const double pa = p[a], qa = 1.0 - p[a];
    for (std::size_t c = 0; c < k; ++c) {
      const double w = f[a * k + c] * b[a * k + c];
      if (w == 0.0) continue;
      const double pc = p[c], qc = 1.0 - p[c];
      s[0] += w * qa * qc;
      s[1] += w * (pa * qc + qa * pc);
      s[2] += w * pa * pc;
    }
  }
  return s;
}

/// Outer product of the initial distribution with itself; returns its entry
/// sum.
inline double initial_pair(const FounderHMM& model, double* out) {
  const std::size_t k = model.founders();
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = 0; b < k; ++b) out[a * k + b] = model.initial(a) * model.initial(b);
  return sum(out, k * k);
}

/// Advances a scaled forward block across interval i: `out` receives the
/// normalized F^{i+1} and the return value is its normalizer. `fe` and `c`
/// are K x K scratch.
inline double forward_advance(const FounderHMM& model, std::size_t i, const double* f, Genotype g_i,
                              double* fe, double* c, double* out) {
  const std::size_t k = model.founders();
  apply_emission({f, k * k}, model.emission_row(i), g_i, k, fe);
  forward_collapse(fe, model.transition_matrix(i), k, c, out);
  const double total = sum(out, k * k);
  normalize(out, k * k, total);
  return total;
}

/// Steps a scaled backward block from locus i+1 to locus i.
inline double backward_advance(const FounderHMM& model, std::size_t i, const double* b_next,
                               Genotype g_next, double* be, double* d, double* out) {
  const std::size_t k = model.founders();
  apply_emission({b_next, k * k}, model.emission_row(i + 1), g_next, k, be);
  backward_collapse(be, model.transition_matrix(i), k, d, out);
  const double total = sum(out, k * k);
  normalize(out, k * k, total);
  return total;
}

/// sum_{f,f'} M[f][f'] E^i(x)[f][f'].
inline double emitted_mass(const FounderHMM& model, std::size_t i, const double* m, Genotype x,
                           double* scratch) {
  const std::size_t k = model.founders();
  apply_emission({m, k * k}, model.emission_row(i), x, k, scratch);
  return sum(scratch, k * k);
}

}  // namespace fhmm::detail

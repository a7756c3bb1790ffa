#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <vector>

#include "qsr/channels.hpp"
#include "qsr/config.hpp"
#include "qsr/entropy.hpp"
#include "qsr/linalg.hpp"
#include "qsr/states.hpp"

namespace qsr {

struct Word {
  std::vector<int> letters;
  int alphabet = 0;

  int length() const { return static_cast<int>(letters.size()); }
  std::vector<int> counts() const {
    std::vector<int> n(alphabet, 0);
    for (int x : letters) {
      if (x < 0 || x >= alphabet) throw std::invalid_argument("Word: letter out of range");
      ++n[x];
    }
    return n;
  }
};

// Empirical distribution with denominator length.
struct TypeDistribution {
  std::vector<int> counts;
  int length = 0;

  int alphabet() const { return static_cast<int>(counts.size()); }
  double probability(int x) const {
    return static_cast<double>(counts[x]) / static_cast<double>(length);
  }
};

inline bool counts_typical(const std::vector<int>& counts, int l, const std::vector<double>& p,
                           double delta, TypicalityConvention convention) {
  // guard for exact boundary comparisons like |1/2 - 0.5| <= 0.5
  const double slack = 1e-12;
  for (std::size_t x = 0; x < p.size(); ++x) {
    const double px = p[x] > tol::eig_clamp ? p[x] : 0.0;
    const int nx = x < counts.size() ? counts[x] : 0;
    if (std::abs(static_cast<double>(nx) / l - px) > delta + slack) return false;
    if (px == 0.0 && nx != 0) return false;
    if (convention == TypicalityConvention::literal && px != 0.0 && nx == 0) return false;
  }
  return true;
}

inline bool word_is_typical(const Word& w, const std::vector<double>& p, double delta,
                            TypicalityConvention convention) {
  return counts_typical(w.counts(), w.length(), p, delta, convention);
}

// All length-l words over the frequency-typical set of p.  Enumeration order
// is lexicographic; the |X|^l scan is capped.
inline std::vector<Word> typical_set(const std::vector<double>& p, double delta, int l,
                                     const Caps& caps = {},
                                     TypicalityConvention convention = TypicalityConvention::literal) {
  if (delta <= 0.0) throw std::invalid_argument("typical_set: delta must be positive");
  if (l < 1) throw std::invalid_argument("typical_set: l >= 1");
  const int a = static_cast<int>(p.size());
  caps.check_sequences(std::pow(static_cast<double>(a), l), "typical_set");
  std::vector<Word> out;
  Word w;
  w.alphabet = a;
  w.letters.assign(l, 0);
  while (true) {
    if (word_is_typical(w, p, delta, convention)) out.push_back(w);
    int k = l - 1;
    while (k >= 0 && w.letters[k] == a - 1) w.letters[k--] = 0;
    if (k < 0) break;
    ++w.letters[k];
  }
  return out;
}

// All empirical types over an alphabet at denominator l, lexicographic in
// (counts[0], counts[1], ...) descending on the first letter.
inline std::vector<TypeDistribution> all_types(int alphabet, int l) {
  if (alphabet < 1 || l < 1) throw std::invalid_argument("all_types: bad arguments");
  std::vector<TypeDistribution> out;
  std::vector<int> counts(alphabet, 0);
  // recursive composition enumeration without recursion: letter 0 count high to low
  std::vector<int> stack{l};
  auto emit = [&](const std::vector<int>& c) { out.push_back({c, l}); };
  // simple recursive lambda
  auto rec = [&](auto&& self, int pos, int remaining) -> void {
    if (pos == alphabet - 1) {
      counts[pos] = remaining;
      emit(counts);
      return;
    }
    for (int c = remaining; c >= 0; --c) {
      counts[pos] = c;
      self(self, pos + 1, remaining - c);
    }
  };
  rec(rec, 0, l);
  return out;
}

// Every word with the given letter counts, lexicographic order.
inline std::vector<Word> type_class(const TypeDistribution& t, const Caps& caps = {}) {
  std::vector<int> letters;
  for (int x = 0; x < t.alphabet(); ++x)
    letters.insert(letters.end(), t.counts[x], x);
  if (static_cast<int>(letters.size()) != t.length)
    throw std::invalid_argument("type_class: counts do not sum to length");
  double size = 1.0;  // multinomial guard
  for (int i = 1; i <= t.length; ++i) size *= i;
  for (int x = 0; x < t.alphabet(); ++x)
    for (int i = 1; i <= t.counts[x]; ++i) size /= i;
  caps.check_sequences(size, "type_class");
  std::vector<Word> out;
  do {
    out.push_back({letters, t.alphabet()});
  } while (std::next_permutation(letters.begin(), letters.end()));
  return out;
}

inline TypeDistribution type_of(const Word& w) { return {w.counts(), w.length()}; }

// ----- frequency-typical projections -----------------------------------------

struct TypicalProjector {
  Mat projector;          // on H^{(x) l}
  double mass = 0.0;      // tr(q rho^{(x) l})
  double phi = 0.0;       // q rho^l q <= 2^{-l (S(rho) - phi)} q, tight
  std::size_t rank = 0;
  std::vector<double> spectrum;  // descending eigenvalues of rho
};

namespace detail {
struct SpectralData {
  std::vector<double> p;  // descending, clamped
  std::vector<Vec> vectors;
};
inline SpectralData descending_spectrum(const Mat& rho) {
  Eigh e = eigh(rho);
  SpectralData s;
  const Eigen::Index d = e.values.size();
  for (Eigen::Index i = d - 1; i >= 0; --i) {
    s.p.push_back(std::max(0.0, e.values(i)));
    s.vectors.push_back(e.vectors.col(i));
  }
  return s;
}
}  // namespace detail

// Projector onto the span of eigenbasis words whose letter frequencies are
// delta-typical for the spectrum of rho.  Commutes with rho^{(x) l} by
// construction.
inline TypicalProjector typical_projector(const DensityOperator& rho, double delta, int l,
                                          const Caps& caps = {},
                                          TypicalityConvention convention = TypicalityConvention::literal) {
  const Eigen::Index d = rho.dim();
  double dl = 1.0;
  for (int i = 0; i < l; ++i) dl *= static_cast<double>(d);
  caps.check_tensor_dim(static_cast<std::size_t>(dl), "typical_projector");
  const auto spec = detail::descending_spectrum(rho.matrix());
  const auto words = typical_set(spec.p, delta, l, caps, convention);

  const Eigen::Index bigd = static_cast<Eigen::Index>(dl);
  TypicalProjector out;
  out.projector = Mat::Zero(bigd, bigd);
  out.spectrum = spec.p;
  out.rank = words.size();
  double best_logp = -std::numeric_limits<double>::infinity();
  for (const Word& w : words) {
    Vec v = spec.vectors[w.letters[0]];
    double logp = spec.p[w.letters[0]] > 0 ? std::log2(spec.p[w.letters[0]])
                                           : -std::numeric_limits<double>::infinity();
    for (int i = 1; i < l; ++i) {
      v = kron(v, spec.vectors[w.letters[i]]).eval();
      logp += spec.p[w.letters[i]] > 0 ? std::log2(spec.p[w.letters[i]])
                                       : -std::numeric_limits<double>::infinity();
    }
    out.projector += v * v.adjoint();
    out.mass += std::exp2(logp);
    best_logp = std::max(best_logp, logp);
  }
  out.phi = words.empty() ? -std::numeric_limits<double>::infinity()
                          : entropy(rho) + best_logp / static_cast<double>(l);
  return out;
}

// Per-letter product construction: positions carrying letter x are jointly
// projected onto the delta-typical eigenwords of rho_x, independently across
// letters.  Equals the permuted tensor of single-letter projectors.
inline Mat typical_projector_product(const std::vector<DensityOperator>& letter_states,
                                     const Word& word, double delta, const Caps& caps = {},
                                     TypicalityConvention convention = TypicalityConvention::literal) {
  if (letter_states.empty()) throw std::invalid_argument("typical_projector_product: no states");
  const Eigen::Index d = letter_states[0].dim();
  for (const auto& s : letter_states)
    if (s.dim() != d) throw std::invalid_argument("typical_projector_product: dim mismatch");
  const int l = word.length();
  double dl = 1.0;
  for (int i = 0; i < l; ++i) dl *= static_cast<double>(d);
  caps.check_tensor_dim(static_cast<std::size_t>(dl), "typical_projector_product");
  caps.check_sequences(dl, "typical_projector_product");

  std::vector<detail::SpectralData> spec;
  for (const auto& s : letter_states) spec.push_back(detail::descending_spectrum(s.matrix()));
  const auto counts = word.counts();

  const Eigen::Index bigd = static_cast<Eigen::Index>(dl);
  Mat q = Mat::Zero(bigd, bigd);
  std::vector<int> y(l, 0);
  while (true) {
    // per-letter subword counts
    bool ok = true;
    for (int x = 0; x < word.alphabet && ok; ++x) {
      if (counts[x] == 0) continue;
      std::vector<int> sub(d, 0);
      for (int i = 0; i < l; ++i)
        if (word.letters[i] == x) ++sub[y[i]];
      ok = counts_typical(sub, counts[x], spec[x].p, delta, convention);
    }
    if (ok) {
      Vec v = spec[word.letters[0]].vectors[y[0]];
      for (int i = 1; i < l; ++i) v = kron(v, spec[word.letters[i]].vectors[y[i]]).eval();
      q += v * v.adjoint();
    }
    int k = l - 1;
    while (k >= 0 && y[k] == d - 1) y[k--] = 0;
    if (k < 0) break;
    ++y[k];
  }
  return q;
}

// ----- reduced operation ------------------------------------------------------

struct ReducedOperation {
  SubChannel op;                 // Kraus subset of N^{(x) l} in the canonical env basis
  std::size_t kraus_kept = 0;
  double kraus_total = 0.0;      // full env word count (may overflow size_t, kept as double)
  double trace_at_word_state = 0.0;  // tr(op(pi_{x^l}))
  Mat word_state;                // pi_{x^l}, the product of per-letter maximally mixed states
};

// Lemma-style reduced operation: rotate each letter's Kraus set into the
// eigenbasis of the environment state Nhat(pi_x) and keep only environment
// words that are delta-typical per letter group.  The kept Kraus set is a
// subset of a valid Kraus representation of N^{(x) l}, so op(sigma) <=
// N^{(x) l}(sigma) in PSD order and composed entanglement fidelities can only
// drop relative to the full operation.
inline ReducedOperation reduced_operation(const Channel& ch, const std::vector<Subspace>& letter_subspaces,
                                          const Word& word, double delta, const Caps& caps = {},
                                          TypicalityConvention convention = TypicalityConvention::relaxed) {
  const int l = word.length();
  if (l < 1) throw std::invalid_argument("reduced_operation: empty word");
  const Eigen::Index din = ch.dim_in(), dout = ch.dim_out();
  const Eigen::Index ne = static_cast<Eigen::Index>(ch.kraus_count());
  double dl_in = 1.0, dl_out = 1.0, envl = 1.0;
  for (int i = 0; i < l; ++i) { dl_in *= din; dl_out *= dout; envl *= ne; }
  caps.check_tensor_dim(static_cast<std::size_t>(std::max(dl_in, dl_out)), "reduced_operation");
  caps.check_sequences(envl, "reduced_operation");

  const Channel comp = complementary(ch);
  // per-letter environment spectra and rotated Kraus sets
  std::vector<std::vector<double>> mu(word.alphabet);
  std::vector<std::vector<Mat>> rotated(word.alphabet);
  std::vector<Mat> pis(word.alphabet);
  const auto counts = word.counts();
  for (int x = 0; x < word.alphabet; ++x) {
    if (counts[x] == 0) continue;
    if (static_cast<std::size_t>(x) >= letter_subspaces.size())
      throw std::invalid_argument("reduced_operation: missing subspace for letter");
    const DensityOperator pix = DensityOperator::maximally_mixed(letter_subspaces[x]);
    pis[x] = pix.matrix();
    const auto spec = detail::descending_spectrum(comp.apply(pix.matrix()));
    mu[x] = spec.p;
    rotated[x].resize(ne, Mat::Zero(dout, din));
    for (Eigen::Index y = 0; y < ne; ++y)
      for (Eigen::Index k = 0; k < ne; ++k)
        rotated[x][y] += std::conj(spec.vectors[y](k)) * ch.kraus()[k];
  }

  Mat word_state = pis[word.letters[0]];
  for (int i = 1; i < l; ++i) word_state = kron(word_state, pis[word.letters[i]]).eval();

  std::vector<Mat> kept;
  std::vector<int> y(l, 0);
  while (true) {
    bool ok = true;
    for (int x = 0; x < word.alphabet && ok; ++x) {
      if (counts[x] == 0) continue;
      std::vector<int> sub(ne, 0);
      for (int i = 0; i < l; ++i)
        if (word.letters[i] == x) ++sub[y[i]];
      ok = counts_typical(sub, counts[x], mu[x], delta, convention);
    }
    if (ok) {
      Mat k = rotated[word.letters[0]][y[0]];
      for (int i = 1; i < l; ++i) k = kron(k, rotated[word.letters[i]][y[i]]).eval();
      kept.push_back(std::move(k));
    }
    int j = l - 1;
    while (j >= 0 && y[j] == ne - 1) y[j--] = 0;
    if (j < 0) break;
    ++y[j];
  }
  const std::size_t kraus_kept = kept.size();
  if (kept.empty())
    kept.push_back(Mat::Zero(static_cast<Eigen::Index>(dl_out), static_cast<Eigen::Index>(dl_in)));
  SubChannel op(std::move(kept), static_cast<Eigen::Index>(dl_in),
                static_cast<Eigen::Index>(dl_out));
  const double trace_at = op.apply(word_state).trace().real();
  return ReducedOperation{std::move(op), kraus_kept, envl, trace_at, std::move(word_state)};
}

}  // namespace qsr

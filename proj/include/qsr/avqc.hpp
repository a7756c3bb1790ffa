#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qsr/channels.hpp"
#include "qsr/coding.hpp"
#include "qsr/config.hpp"
#include "qsr/entropy.hpp"
#include "qsr/linalg.hpp"
#include "qsr/random_sampling.hpp"
#include "qsr/rng.hpp"
#include "qsr/simplex.hpp"
#include "qsr/states.hpp"
#include "qsr/typicality.hpp"

namespace qsr {

// Finite uncertainty set {N_s} with a chosen blocklength; the adversary picks
// one s per channel use.
struct AvqcSpec {
  std::vector<Channel> channels;
  int l = 1;

  AvqcSpec(std::vector<Channel> chans, int blocklength)
      : channels(std::move(chans)), l(blocklength) {
    if (channels.empty()) throw std::invalid_argument("AvqcSpec: empty channel set");
    if (l < 1) throw std::invalid_argument("AvqcSpec: blocklength < 1");
    for (const Channel& ch : channels)
      if (ch.dim_in() != channels[0].dim_in() || ch.dim_out() != channels[0].dim_out())
        throw std::invalid_argument("AvqcSpec: mixed channel dimensions");
  }

  std::size_t size() const { return channels.size(); }
};

// N_{s^l} for one adversarial sequence
inline Channel sequence_channel(const AvqcSpec& spec, const Word& word, const Caps& caps = {}) {
  std::vector<Channel> selected;
  selected.reserve(word.letters.size());
  for (int s : word.letters) selected.push_back(spec.channels.at(static_cast<std::size_t>(s)));
  return tensor_word(selected, caps);
}

struct WorstCase {
  double value = 0.0;
  Word argmin;
};

// Exhaustive minimum of the message-averaged performance over all |S|^l
// adversarial sequences.  Ties keep the first sequence in odometer order, so
// the result is deterministic.
inline WorstCase worst_case_performance(const CETCode& code, const AvqcSpec& spec,
                                        const Caps& caps = {}) {
  const int l = spec.l;
  if (code.n != l) throw std::invalid_argument("worst_case_performance: blocklength mismatch");
  caps.check_sequences(std::pow(static_cast<double>(spec.size()), l), "worst_case_performance");

  WorstCase best{2.0, Word{std::vector<int>(static_cast<std::size_t>(l), 0),
                           static_cast<int>(spec.size())}};
  Word word = best.argmin;
  while (true) {
    const double val = cet_average_performance(code, sequence_channel(spec, word, caps));
    if (val < best.value) {
      best.value = val;
      best.argmin = word;
    }
    int pos = l - 1;
    while (pos >= 0 && ++word.letters[static_cast<std::size_t>(pos)] == word.alphabet)
      word.letters[static_cast<std::size_t>(pos--)] = 0;
    if (pos < 0) break;
  }
  return best;
}

// Finitely supported random code
struct RandomCetCode {
  std::vector<CETCode> support;
  std::vector<double> weights;
};

inline double random_code_performance(const RandomCetCode& rc, const SubChannel& nl) {
  double avg = 0.0;
  for (std::size_t t = 0; t < rc.support.size(); ++t)
    avg += rc.weights[t] * cet_average_performance(rc.support[t], nl);
  return avg;
}

namespace detail {

inline Mat permutation_unitary_mixed(const std::vector<Eigen::Index>& dims,
                                     const std::vector<Eigen::Index>& order) {
  const auto table = factor_permutation_table(dims, order);
  const Eigen::Index d = total_dim(dims);
  Mat u = Mat::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i) u(i, table[i]) = 1.0;
  return u;
}

}  // namespace detail

// code conjugated by a factor permutation: encoders pick up U_alpha on the
// output, decoders absorb U_alpha^{-1} on the input
inline CETCode permuted_cet(const CETCode& code, const std::vector<Eigen::Index>& order,
                            Eigen::Index da, Eigen::Index db) {
  if (static_cast<int>(order.size()) != code.n)
    throw std::invalid_argument("permuted_cet: order length != blocklength");
  const Mat ua = permutation_unitary(da, order);
  const Mat ub = permutation_unitary(db, order);
  CETCode out;
  out.m2 = code.m2;
  out.n = code.n;
  for (const Channel& p : code.encoders) {
    std::vector<Mat> ks;
    ks.reserve(p.kraus_count());
    for (const Mat& k : p.kraus()) ks.push_back(ua * k);
    out.encoders.push_back(Channel(std::move(ks), p.dim_in(), p.dim_out()));
  }
  for (const SubChannel& r : code.decoders) {
    std::vector<Mat> ks;
    ks.reserve(r.kraus_count());
    for (const Mat& k : r.kraus()) ks.push_back(k * ub.adjoint());
    out.decoders.push_back(SubChannel(std::move(ks), r.dim_in(), r.dim_out()));
  }
  return out;
}

// Uniform random code over all l! permuted versions of the input code (the
// permutation-average is what the type-counting bound controls).
inline RandomCetCode robustify(const CETCode& code, Eigen::Index da, Eigen::Index db) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(code.n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  RandomCetCode rc;
  do {
    rc.support.push_back(permuted_cet(code, order, da, db));
  } while (std::next_permutation(order.begin(), order.end()));
  rc.weights.assign(rc.support.size(), 1.0 / static_cast<double>(rc.support.size()));
  return rc;
}

struct RobustLemmaReport {
  bool hypothesis_holds = false;
  double hypothesis_margin = 0.0;  // min over types of (sum f q^l) - (1 - gamma)
  bool conclusion_holds = false;
  double conclusion_margin = 0.0;  // min over s^l of permutation average - bound
  double factor = 0.0;             // (l+1)^{|S|}
};

// Checks both sides of the type-counting permutation bound for a complete
// table f: S^l -> [0,1]: if sum_{s^l} f(s^l) q^l(s^l) >= 1 - gamma for every
// type q, then (1/l!) sum_alpha f(alpha(s^l)) >= 1 - (l+1)^{|S|} gamma for
// every s^l.  The permutation average is evaluated literally.
inline RobustLemmaReport robustlemma_check(const std::vector<double>& f, int l, int alphabet,
                                           double gamma) {
  const auto total = static_cast<std::size_t>(std::pow(static_cast<double>(alphabet), l) + 0.5);
  if (f.size() != total) throw std::invalid_argument("robustlemma_check: incomplete table");

  std::vector<Word> words;
  words.reserve(total);
  {
    Word w{std::vector<int>(static_cast<std::size_t>(l), 0), alphabet};
    while (true) {
      words.push_back(w);
      int pos = l - 1;
      while (pos >= 0 && ++w.letters[static_cast<std::size_t>(pos)] == alphabet)
        w.letters[static_cast<std::size_t>(pos--)] = 0;
      if (pos < 0) break;
    }
  }

  RobustLemmaReport rep;
  rep.factor = std::pow(static_cast<double>(l + 1), alphabet);

  double hyp_min = 2.0;
  for (const TypeDistribution& q : all_types(alphabet, l)) {
    double lhs = 0.0;
    for (std::size_t i = 0; i < total; ++i) {
      double prob = 1.0;
      for (int x : words[i].letters) prob *= q.probability(x);
      lhs += f[i] * prob;
    }
    hyp_min = std::min(hyp_min, lhs);
  }
  rep.hypothesis_margin = hyp_min - (1.0 - gamma);
  rep.hypothesis_holds = rep.hypothesis_margin >= -tol::ineq_slack;

  std::vector<std::size_t> perm(static_cast<std::size_t>(l));
  double concl_min = 2.0;
  for (const Word& w : words) {
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    double sum = 0.0;
    std::size_t count = 0;
    do {
      std::size_t idx = 0;
      for (std::size_t k = 0; k < perm.size(); ++k)
        idx = idx * static_cast<std::size_t>(alphabet) +
              static_cast<std::size_t>(w.letters[perm[k]]);
      sum += f[idx];
      ++count;
    } while (std::next_permutation(perm.begin(), perm.end()));
    concl_min = std::min(concl_min, sum / static_cast<double>(count));
  }
  rep.conclusion_margin = concl_min - (1.0 - rep.factor * gamma);
  rep.conclusion_holds = rep.conclusion_margin >= -tol::ineq_slack;
  return rep;
}

struct EliminationReport {
  std::vector<CETCode> samples;
  CETCode combined;
  std::vector<double> empirical;  // per adversarial sequence, odometer order
  double bad_fraction = 0.0;      // fraction of sequences with average < 1 - epsilon
  double markov_bound = 0.0;      // |S|^l 2^{-l^2 epsilon/2}, the union-bound rarity
  std::uint64_t seed = 0;
};

// Derandomization step: draw l^2 i.i.d. codes from the random code, report
// their empirical per-sequence average, and splice them behind a short
// classical prefix code that announces which sample is in use:
//   P^(m) = (1/l^2) sum_i prefix_i (x) sample_i^(m)
//   R^(m) = sum_i prefix-decoder_i (x) sample-decoder_i^(m)
inline EliminationReport eliminate(const RandomCetCode& rc, const CETCode& prefix,
                                   const AvqcSpec& spec, double epsilon, const Rng& rng,
                                   const Caps& caps = {}) {
  if (rc.support.empty()) throw std::invalid_argument("eliminate: empty random code");
  const int l = spec.l;
  const auto k2 = static_cast<std::size_t>(l) * static_cast<std::size_t>(l);
  if (prefix.m1() != k2 || prefix.m2 != 1)
    throw std::invalid_argument(
        "eliminate: prefix code must carry l^2 classical messages and a trivial quantum part");
  for (const CETCode& c : rc.support)
    if (c.n != l || c.m1() != rc.support[0].m1() || c.m2 != rc.support[0].m2)
      throw std::invalid_argument("eliminate: random code support is not homogeneous");

  EliminationReport rep;
  rep.seed = rng.seed();
  Rng draw = rng.sub("eliminate/sample");
  rep.samples.reserve(k2);
  for (std::size_t i = 0; i < k2; ++i) {
    const double u = draw.uniform();
    double cum = 0.0;
    std::size_t pick = rc.support.size() - 1;
    for (std::size_t t = 0; t < rc.weights.size(); ++t) {
      cum += rc.weights[t];
      if (u < cum) {
        pick = t;
        break;
      }
    }
    rep.samples.push_back(rc.support[pick]);
  }

  caps.check_sequences(std::pow(static_cast<double>(spec.size()), l), "eliminate");
  Word word{std::vector<int>(static_cast<std::size_t>(l), 0), static_cast<int>(spec.size())};
  std::size_t bad = 0, total = 0;
  while (true) {
    const Channel nl = sequence_channel(spec, word, caps);
    double avg = 0.0;
    for (const CETCode& c : rep.samples) avg += cet_average_performance(c, nl);
    avg /= static_cast<double>(k2);
    rep.empirical.push_back(avg);
    if (avg < 1.0 - epsilon) ++bad;
    ++total;
    int pos = l - 1;
    while (pos >= 0 && ++word.letters[static_cast<std::size_t>(pos)] == word.alphabet)
      word.letters[static_cast<std::size_t>(pos--)] = 0;
    if (pos < 0) break;
  }
  rep.bad_fraction = static_cast<double>(bad) / static_cast<double>(total);
  rep.markov_bound = std::min(
      1.0, static_cast<double>(total) *
               std::exp2(-static_cast<double>(k2) * epsilon / 2.0));

  const std::size_t m1 = rep.samples[0].m1();
  rep.combined.m2 = rep.samples[0].m2;
  rep.combined.n = prefix.n + l;
  const std::vector<double> unif(k2, 1.0 / static_cast<double>(k2));
  for (std::size_t m = 0; m < m1; ++m) {
    std::vector<Channel> parts;
    parts.reserve(k2);
    std::vector<Mat> dec;
    for (std::size_t i = 0; i < k2; ++i) {
      parts.push_back(tensor(prefix.encoders[i], rep.samples[i].encoders[m]));
      const SubChannel di = tensor(prefix.decoders[i], rep.samples[i].decoders[m]);
      for (const Mat& k : di.kraus()) dec.push_back(k);
    }
    rep.combined.encoders.push_back(convex_mixture_channel(parts, unif));
    rep.combined.decoders.push_back(
        SubChannel(std::move(dec), parts[0].dim_out(), rep.combined.m2));
  }
  return rep;
}

// Classical shadow of an entanglement-transmission code: message states
// rho_m = P(|m><m|) and decoding POVM D_m = R_*(|m><m|); trace preservation
// of R makes {D_m} complete.
struct ClassicalReduction {
  std::vector<DensityOperator> states;
  Povm povm;
};

inline ClassicalReduction classical_reduction(const Channel& encoder, const Channel& recovery) {
  const Eigen::Index m = encoder.dim_in();
  if (recovery.dim_out() != m)
    throw std::invalid_argument("classical_reduction: recovery output != message space");
  std::vector<DensityOperator> states;
  std::vector<Mat> effects;
  states.reserve(static_cast<std::size_t>(m));
  effects.reserve(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) {
    const Mat proj = basis_vector(m, i) * basis_vector(m, i).adjoint();
    states.emplace_back(encoder.apply(proj));
    effects.push_back(recovery.adjoint_apply(proj));
  }
  return ClassicalReduction{std::move(states), Povm(std::move(effects))};
}

inline double classical_success(const ClassicalReduction& red, const SubChannel& nl) {
  double sum = 0.0;
  for (std::size_t i = 0; i < red.states.size(); ++i)
    sum += (red.povm.effect(i) * nl.apply(red.states[i].matrix())).trace().real();
  return sum / static_cast<double>(red.states.size());
}

// States the adversary would have to confuse, on the l-fold input space
struct SymmetrizabilityInstance {
  std::vector<DensityOperator> states;
  int l = 1;

  SymmetrizabilityInstance(std::vector<DensityOperator> st, int blocklength)
      : states(std::move(st)), l(blocklength) {
    if (states.size() < 1) throw std::invalid_argument("SymmetrizabilityInstance: no states");
    for (const DensityOperator& s : states)
      if (s.dim() != states[0].dim())
        throw std::invalid_argument("SymmetrizabilityInstance: mixed state dimensions");
  }

  std::size_t k() const { return states.size(); }
};

struct SymmetrizabilityResult {
  bool feasible = false;
  Eigen::MatrixXd maps;            // row i = distribution p(rho_i) over s^l
  Eigen::VectorXd certificate;     // separating dual when infeasible
  double objective = 0.0;          // phase-1 optimum
  bool exact = false;              // rational-arithmetic confirmation ran
  std::size_t variables = 0;
  std::size_t rows = 0;
};

// Linear feasibility of the confusability condition: for every pair i < j,
//   sum_{s^l} p(rho_i)(s^l) N_{s^l}(rho_j) = sum_{s^l} p(rho_j)(s^l) N_{s^l}(rho_i)
// with each p(rho_i) a distribution on S^l.  Every matrix entry contributes a
// real and an imaginary equality row.
inline SymmetrizabilityResult symmetrizability_lp(const AvqcSpec& spec,
                                                  const SymmetrizabilityInstance& inst,
                                                  const Caps& caps = {}) {
  if (inst.l != spec.l) throw std::invalid_argument("symmetrizability_lp: blocklength mismatch");
  const std::size_t k = inst.k();
  const auto seqs =
      static_cast<std::size_t>(std::pow(static_cast<double>(spec.size()), spec.l) + 0.5);
  caps.check_sequences(static_cast<double>(k) * static_cast<double>(seqs), "symmetrizability_lp");

  std::vector<std::vector<Mat>> outputs(k);  // outputs[i][s] = N_{s^l}(rho_i)
  {
    Word word{std::vector<int>(static_cast<std::size_t>(spec.l), 0),
              static_cast<int>(spec.size())};
    for (std::size_t s = 0; s < seqs; ++s) {
      const Channel nl = sequence_channel(spec, word, caps);
      for (std::size_t i = 0; i < k; ++i) outputs[i].push_back(nl.apply(inst.states[i].matrix()));
      int pos = spec.l - 1;
      while (pos >= 0 && ++word.letters[static_cast<std::size_t>(pos)] == word.alphabet)
        word.letters[static_cast<std::size_t>(pos--)] = 0;
      if (pos < 0 && s + 1 < seqs) throw std::logic_error("symmetrizability_lp: enumeration bug");
    }
  }

  const Eigen::Index db = outputs[0][0].rows();
  const std::size_t nvar = k * seqs;
  const std::size_t pair_rows = 2 * static_cast<std::size_t>(db) * static_cast<std::size_t>(db);
  const std::size_t nrows = (k * (k - 1) / 2) * pair_rows + k;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(nrows),
                                            static_cast<Eigen::Index>(nvar));
  Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nrows));

  std::size_t row = 0;
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j) {
      for (Eigen::Index r = 0; r < db; ++r)
        for (Eigen::Index c = 0; c < db; ++c) {
          for (std::size_t s = 0; s < seqs; ++s) {
            const cx lhs = outputs[j][s](r, c);   // coefficient of p_i(s)
            const cx rhs = -outputs[i][s](r, c);  // coefficient of p_j(s)
            a(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(i * seqs + s)) = lhs.real();
            a(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(j * seqs + s)) = rhs.real();
            a(static_cast<Eigen::Index>(row + 1), static_cast<Eigen::Index>(i * seqs + s)) =
                lhs.imag();
            a(static_cast<Eigen::Index>(row + 1), static_cast<Eigen::Index>(j * seqs + s)) =
                rhs.imag();
          }
          row += 2;
        }
    }
  for (std::size_t i = 0; i < k; ++i, ++row) {
    for (std::size_t s = 0; s < seqs; ++s)
      a(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(i * seqs + s)) = 1.0;
    b(static_cast<Eigen::Index>(row)) = 1.0;
  }

  const LpFeasibility lp = lp_feasibility(a, b);
  SymmetrizabilityResult res;
  res.feasible = lp.feasible;
  res.objective = lp.objective;
  res.exact = lp.exact;
  res.variables = nvar;
  res.rows = nrows;
  if (lp.feasible) {
    res.maps.resize(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(seqs));
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t s = 0; s < seqs; ++s)
        res.maps(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(s)) =
            lp.x(static_cast<Eigen::Index>(i * seqs + s));
  } else {
    res.certificate = lp.certificate;
  }
  return res;
}

// Joint channel where a second input register is under adversarial control
struct QuantumJammerChannel {
  Channel channel;  // H_A (x) H_J -> H_B
  Eigen::Index da = 0, dj = 0, db = 0;

  QuantumJammerChannel(Channel ch, Eigen::Index dim_a, Eigen::Index dim_j)
      : channel(std::move(ch)), da(dim_a), dj(dim_j), db(channel.dim_out()) {
    if (channel.dim_in() != da * dj)
      throw std::invalid_argument("QuantumJammerChannel: dim_in != d_A * d_J");
  }
};

// N^{(x) n} rearranged to act on A^{(x) n} (x) J^{(x) n}
inline Channel jammer_block_channel(const QuantumJammerChannel& qj, int n, const Caps& caps = {}) {
  caps.check_jammer_dim(std::pow(static_cast<double>(qj.dj), n), "jammer_block_channel");
  const Channel nn = tensor_power(qj.channel, n, caps);
  std::vector<Eigen::Index> dims;
  std::vector<Eigen::Index> order;  // new factor k is old factor order[k]
  for (int i = 0; i < n; ++i) dims.push_back(qj.da);
  for (int i = 0; i < n; ++i) dims.push_back(qj.dj);
  for (int i = 0; i < n; ++i) {
    order.push_back(i);      // A_i
    order.push_back(n + i);  // J_i
  }
  const Mat u = detail::permutation_unitary_mixed(dims, order);
  std::vector<Mat> ks;
  ks.reserve(nn.kraus_count());
  for (const Mat& k : nn.kraus()) ks.push_back(k * u);
  return Channel(std::move(ks), nn.dim_in(), nn.dim_out());
}

// the effective channel A^{(x) n} -> B^{(x) n} once the jammer fixes sigma
inline Channel jammer_restricted_channel(const QuantumJammerChannel& qj, int n,
                                         const DensityOperator& sigma, const Caps& caps = {}) {
  const Channel block = jammer_block_channel(qj, n, caps);
  Eigen::Index dan = 1, djn = 1;
  for (int i = 0; i < n; ++i) {
    dan *= qj.da;
    djn *= qj.dj;
  }
  if (sigma.dim() != djn)
    throw std::invalid_argument("jammer_restricted_channel: sigma dimension mismatch");
  const Eigh e = eigh(sigma.matrix());
  std::vector<Mat> append;
  for (Eigen::Index i = 0; i < e.values.size(); ++i) {
    if (e.values(i) < tol::eig_clamp) continue;
    append.push_back(kron(Mat::Identity(dan, dan),
                          Mat(std::sqrt(e.values(i)) * e.vectors.col(i))));
  }
  return compose(block, Channel(std::move(append), dan, block.dim_in()));
}

// single-letter restriction N_sigma, the compound set generator
inline Channel single_use_channel(const QuantumJammerChannel& qj, const DensityOperator& sigma) {
  return jammer_restricted_channel(qj, 1, sigma);
}

struct JammerEffect {
  Mat x;               // effect operator on the jammer's n-fold space
  RVec spectrum;       // eigenvalues ascending
  double worst_case;   // 1 - lambda_max, the exact infimum over all jammer states
  double psd_defect;   // how far X leaves [0, I], should be ~0
};

// Effect-operator reformulation: the code's average performance against
// jammer state sigma is an affine function 1 - tr(X sigma).  X is accumulated
// from rank-one contributions of every composite Kraus term, so worst case
// and per-sigma evaluation are both exact.
inline JammerEffect jammer_effect_operator(const CETCode& code, const QuantumJammerChannel& qj,
                                           int n, const Caps& caps = {}) {
  if (code.n != n) throw std::invalid_argument("jammer_effect_operator: blocklength mismatch");
  caps.check_jammer_dim(std::pow(static_cast<double>(qj.dj), n), "jammer_effect_operator");
  const Channel block = jammer_block_channel(qj, n, caps);
  Eigen::Index djn = 1;
  for (int i = 0; i < n; ++i) djn *= qj.dj;
  const Eigen::Index k = code.m2;
  const Vec phi = maximally_entangled_vector(k);

  Mat t = Mat::Zero(djn, djn);
  for (std::size_t m = 0; m < code.m1(); ++m) {
    const SubChannel total =
        compose(code.decoders[m],
                compose(block, tensor(code.encoders[m], Channel::identity(djn))));
    for (const Mat& kr : total.kraus()) {
      // reference register rides along: Kraus is I_k (x) kr on k (x) (k dJ^n)
      const Mat full = kron(Mat::Identity(k, k), kr);
      const Vec w = full.adjoint() * phi;  // lives on k (x) k (x) J^n
      Vec v = Vec::Zero(djn);
      for (Eigen::Index ab = 0; ab < k * k; ++ab) {
        const cx amp = std::conj(phi(ab));
        if (amp == cx(0.0)) continue;
        v += amp * w.segment(ab * djn, djn);
      }
      t += v * v.adjoint();
    }
  }
  t /= static_cast<double>(code.m1());

  JammerEffect eff;
  eff.x = Mat::Identity(djn, djn) - herm(t);
  eff.spectrum = eigvalsh(eff.x);
  eff.worst_case = 1.0 - eff.spectrum(eff.spectrum.size() - 1);
  eff.psd_defect = std::max(0.0, std::max(-eff.spectrum(0),
                                          eff.spectrum(eff.spectrum.size() - 1) - 1.0));
  return eff;
}

// permutation-symmetrized effect (1/n!) sum_pi U_pi^dagger X U_pi
inline Mat symmetrized_effect(const Mat& x, Eigen::Index dj, int n) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  Mat sum = Mat::Zero(x.rows(), x.cols());
  std::size_t count = 0;
  do {
    const Mat u = permutation_unitary(dj, order);
    sum += u.adjoint() * x * u;
    ++count;
  } while (std::next_permutation(order.begin(), order.end()));
  return sum / static_cast<double>(count);
}

// Frank-Wolfe ascent of sigma -> tr(X sigma^{(x) n}) over single-letter
// jammer states; feasible iterates make the result a certified lower bound on
// the worst i.i.d. jammer error.
inline double worst_iid_jammer_error(const Mat& x, Eigen::Index dj, int n, const Rng& rng,
                                     int restarts = 20, int iters = 120) {
  const auto value = [&](const Mat& sigma) {
    Mat power = Mat::Identity(1, 1);
    for (int i = 0; i < n; ++i) power = kron(power, sigma).eval();
    return (x * power).trace().real();
  };
  const auto gradient = [&](const Mat& sigma) {
    // sum over slots of tr_{all but slot}(X (sigma ... I_slot ... sigma))
    Mat g = Mat::Zero(dj, dj);
    std::vector<Eigen::Index> dims(static_cast<std::size_t>(n), dj);
    const Eigen::Index d = x.rows();
    for (int slot = 0; slot < n; ++slot) {
      for (Eigen::Index r = 0; r < d; ++r) {
        const auto ri = unravel(r, dims);
        for (Eigen::Index c = 0; c < d; ++c) {
          const auto ci = unravel(c, dims);
          cx coeff = x(r, c);
          for (int j = 0; j < n; ++j)
            if (j != slot) coeff *= sigma(ci[static_cast<std::size_t>(j)],
                                          ri[static_cast<std::size_t>(j)]);
          g(ci[static_cast<std::size_t>(slot)], ri[static_cast<std::size_t>(slot)]) += coeff;
        }
      }
    }
    return Mat(herm(g));
  };

  std::vector<Mat> starts;
  starts.push_back(Mat::Identity(dj, dj) / static_cast<double>(dj));
  for (Eigen::Index i = 0; i < dj; ++i) {
    const Vec e = basis_vector(dj, i);
    starts.push_back(e * e.adjoint());
  }
  Rng local = rng.sub("jammer/ascent");
  for (int r = 0; r < restarts; ++r) starts.push_back(random_density(local, dj).matrix());

  double best = 0.0;
  for (Mat sigma : starts) {
    double cur = value(sigma);
    for (int it = 0; it < iters; ++it) {
      const Mat g = gradient(sigma);
      const Eigh e = eigh(g);
      const Vec top = e.vectors.col(e.values.size() - 1);
      const Mat vertex = top * top.adjoint();
      // golden-section line search toward the best vertex of the state set
      double lo = 0.0, hi = 1.0;
      const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
      double m1 = hi - gr * (hi - lo), m2 = lo + gr * (hi - lo);
      double f1 = value(sigma + m1 * (vertex - sigma));
      double f2 = value(sigma + m2 * (vertex - sigma));
      for (int ls = 0; ls < 40; ++ls) {
        if (f1 < f2) {
          lo = m1;
          m1 = m2;
          f1 = f2;
          m2 = lo + gr * (hi - lo);
          f2 = value(sigma + m2 * (vertex - sigma));
        } else {
          hi = m2;
          m2 = m1;
          f2 = f1;
          m1 = hi - gr * (hi - lo);
          f1 = value(sigma + m1 * (vertex - sigma));
        }
      }
      const double step = 0.5 * (lo + hi);
      const Mat next = sigma + step * (vertex - sigma);
      const double nv = value(next);
      if (nv <= cur + 1e-14) break;
      sigma = next;
      cur = nv;
    }
    best = std::max(best, cur);
  }
  return best;
}

struct QuantumRobustification {
  double lhs = 0.0;        // min over tau of the permuted-average performance
  double lambda = 0.0;     // certified lower bound on the worst i.i.d. error
  double factor = 0.0;     // (n+1)^{d_J^2}, evaluated literally
  double rhs = 0.0;        // 1 - factor * lambda
  bool holds = false;
};

// Finite-n check of the permutation bound: averaging the code over all n!
// factor permutations can lose at most (n+1)^{d_J^2} against the worst
// i.i.d. jammer.  Both sides are computed from the exact effect operator.
inline QuantumRobustification quantum_robustification_check(const CETCode& code,
                                                            const QuantumJammerChannel& qj, int n,
                                                            const Rng& rng,
                                                            const Caps& caps = {}) {
  const JammerEffect eff = jammer_effect_operator(code, qj, n, caps);
  const Mat xbar = symmetrized_effect(eff.x, qj.dj, n);
  const RVec spec = eigvalsh(herm(xbar));
  QuantumRobustification rep;
  rep.lhs = 1.0 - spec(spec.size() - 1);
  rep.lambda = worst_iid_jammer_error(eff.x, qj.dj, n, rng);
  rep.factor = std::pow(static_cast<double>(n + 1),
                        static_cast<double>(qj.dj) * static_cast<double>(qj.dj));
  rep.rhs = 1.0 - rep.factor * rep.lambda;
  rep.holds = rep.lhs >= rep.rhs - tol::ineq_slack;
  return rep;
}

struct ChernoffReport {
  double empirical = 0.0;          // frequency of lambda_max(avg) >= a
  double empirical_loewner = 0.0;  // frequency of avg >= aI (sub-event)
  double bound = 0.0;              // dim * exp(-2 T (a-m)^2)
  double wilson_low = 0.0;
  double wilson_high = 0.0;
  Eigen::Index dim = 0;
};

// Monte-Carlo check of the operator Chernoff tail for i.i.d. Hermitian
// samples confined to [0, I] with mean at most m I: the chance that the
// T-sample average exits below aI is at most dim exp(-2T(a-m)^2).
inline ChernoffReport matrix_chernoff_mc(const std::function<Mat(Rng&)>& sampler, int t, double a,
                                         double m, int trials, const Rng& rng) {
  if (!(m < a)) throw std::invalid_argument("matrix_chernoff_mc: need m < a");
  if (t < 1 || trials < 1) throw std::invalid_argument("matrix_chernoff_mc: need T, trials >= 1");
  Rng local = rng.sub("chernoff/trials");
  std::size_t exceed = 0, loewner = 0;
  Eigen::Index dim = 0;
  for (int trial = 0; trial < trials; ++trial) {
    Mat sum;
    for (int i = 0; i < t; ++i) {
      const Mat x = sampler(local);
      const RVec ev = eigvalsh(herm(x));
      if (ev(0) < -tol::psd || ev(ev.size() - 1) > 1.0 + tol::trace_preserving)
        throw std::invalid_argument("matrix_chernoff_mc: sample outside [0, I]");
      if (i == 0) {
        sum = x;
        dim = x.rows();
      } else {
        sum += x;
      }
    }
    const RVec ev = eigvalsh(herm(Mat(sum / static_cast<double>(t))));
    if (ev(ev.size() - 1) >= a) ++exceed;
    if (ev(0) >= a) ++loewner;
  }
  ChernoffReport rep;
  rep.dim = dim;
  rep.empirical = static_cast<double>(exceed) / static_cast<double>(trials);
  rep.empirical_loewner = static_cast<double>(loewner) / static_cast<double>(trials);
  rep.bound = static_cast<double>(dim) *
              std::exp(-2.0 * static_cast<double>(t) * (a - m) * (a - m));
  // Wilson score interval at z = 1.96 for the exceedance frequency
  const double z = 1.96, nn = static_cast<double>(trials), p = rep.empirical;
  const double denom = 1.0 + z * z / nn;
  const double center = (p + z * z / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / nn + z * z / (4.0 * nn * nn)) / denom;
  rep.wilson_low = std::max(0.0, center - half);
  rep.wilson_high = std::min(1.0, center + half);
  return rep;
}

}  // namespace qsr

#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <stdexcept>
#include <utility>
#include <vector>

#include "qsr/channels.hpp"
#include "qsr/config.hpp"
#include "qsr/design.hpp"
#include "qsr/entropy.hpp"
#include "qsr/linalg.hpp"
#include "qsr/rng.hpp"
#include "qsr/states.hpp"
#include "qsr/typicality.hpp"

namespace qsr {

// Lower bound on the design-averaged optimal-recovery entanglement fidelity of
// a random k-dimensional code subspace of G sent through the uniform mixture
// of the given sub-channels:
//   tr(Nbar(pi_G)) - 2 sum_j sqrt(k n_j) ||N_j(pi_G)||_2,
// n_j the Kraus count of the j-th sub-channel.  Often vacuous (negative) at
// small dimensions; the transfer inequality it feeds is checked regardless.
inline double decoupling_bound(Eigen::Index k, const Subspace& g,
                               const std::vector<SubChannel>& subchannels) {
  if (k < 1 || k > g.dim()) throw std::invalid_argument("decoupling_bound: need 1 <= k <= dim(G)");
  if (subchannels.empty()) throw std::invalid_argument("decoupling_bound: empty channel set");
  const Mat pi_g = g.projector() / static_cast<double>(g.dim());
  double trace_avg = 0.0, penalty = 0.0;
  for (const SubChannel& n : subchannels) {
    const Mat out = n.apply(pi_g);
    trace_avg += out.trace().real();
    penalty += std::sqrt(static_cast<double>(k) * static_cast<double>(n.kraus_count())) *
               hs_norm(out);
  }
  trace_avg /= static_cast<double>(subchannels.size());
  return trace_avg - 2.0 * penalty;
}

// Transpose-channel recovery kernel for (rho, ch): Kraus
// rho^{1/2} A^dagger sigma^{-1/2}, sigma = ch(rho), inverse on the support.
// The Kraus sum equals the support projection of sigma, hence the map is
// trace non-increasing.
inline SubChannel transpose_recovery_kernel(const DensityOperator& rho, const SubChannel& ch) {
  if (rho.dim() != ch.dim_in())
    throw std::invalid_argument("transpose_recovery_kernel: state/channel mismatch");
  const Mat sigma = ch.apply(rho.matrix());
  if (sigma.trace().real() < 1e-14)
    throw std::invalid_argument("transpose_recovery_kernel: channel output has zero trace");
  const Mat rho_h = sqrt_psd(rho.matrix());
  const Mat sigma_mh = pow_psd(herm(sigma), -0.5);
  std::vector<Mat> kraus;
  kraus.reserve(ch.kraus_count());
  for (const Mat& a : ch.kraus()) kraus.push_back(rho_h * a.adjoint() * sigma_mh);
  return SubChannel(std::move(kraus), ch.dim_out(), ch.dim_in());
}

// Trace-preserving completion of the transpose recovery: the deficiency
// I - sum K*K is dumped onto the first basis vector of the input space.
// Extra Kraus terms only add non-negative |tr(rho K)|^2 contributions, so
// every entanglement fidelity through the completed map dominates the one
// through the kernel.
inline Channel bk_recovery(const DensityOperator& rho, const SubChannel& ch) {
  SubChannel kernel = transpose_recovery_kernel(rho, ch);
  std::vector<Mat> kraus = kernel.kraus();
  Mat deficiency = Mat::Identity(kernel.dim_in(), kernel.dim_in()) - kernel.kraus_sum();
  Eigh e = eigh(herm(deficiency));
  for (Eigen::Index i = 0; i < e.values.size(); ++i) {
    if (e.values(i) < tol::eig_clamp) continue;
    Mat extra = Mat::Zero(kernel.dim_out(), kernel.dim_in());
    extra.row(0) = std::sqrt(e.values(i)) * e.vectors.col(i).adjoint();
    kraus.push_back(std::move(extra));
  }
  return Channel(std::move(kraus), kernel.dim_in(), kernel.dim_out());
}

// Bracket for the optimal-recovery entanglement fidelity: the transpose
// recovery gives the certified lower end; 1 is the only generic upper end.
struct FidelityBracket {
  double lower = 0.0;
  double upper = 1.0;
};

inline FidelityBracket fce_bracket(const DensityOperator& rho, const SubChannel& ch) {
  return {entanglement_fidelity(rho, compose(bk_recovery(rho, ch), ch)), 1.0};
}

// Per-channel projected reduced operation: the reduced operation sandwiched by
// the frequency-typical projection of the per-letter channel outputs.
inline SubChannel projected_reduced_operation(const Channel& ch,
                                              const std::vector<Subspace>& letter_subspaces,
                                              const Word& word, double delta, const Caps& caps,
                                              TypicalityConvention convention) {
  ReducedOperation red = reduced_operation(ch, letter_subspaces, word, delta, caps, convention);
  std::vector<DensityOperator> letter_outputs;
  letter_outputs.reserve(letter_subspaces.size());
  for (const Subspace& gx : letter_subspaces)
    letter_outputs.emplace_back(ch.apply(gx.projector() / static_cast<double>(gx.dim())));
  const Mat q = typical_projector_product(letter_outputs, word, delta, caps, convention);
  return compose(SubChannel({q}), red.op);
}

// Entanglement-transmission code family over a unitary design: member i
// encodes the k-dimensional code space by the isometry G_basis * U_i * [I_k;0]
// and recovers with the transpose recovery against the projected reduced
// channel average.  The uniform encoder average on the maximally mixed code
// state is exactly pi_G (1-design identity).
struct EtCodeFamily {
  Eigen::Index k = 0;               // code dimension
  Subspace g;                       // G_{x^l} inside the l-fold input space
  std::vector<Channel> encoders;    // C^k -> H^{(x) l}
  std::vector<Channel> recoveries;  // K^{(x) l} -> C^k
  std::vector<std::size_t> reduced_kraus_counts;  // per compound member

  std::size_t size() const { return encoders.size(); }
};

inline EtCodeFamily random_et_family(const std::vector<Subspace>& letter_subspaces,
                                     const Word& word, Eigen::Index k,
                                     const std::vector<Channel>& channels, double delta,
                                     const Caps& caps = {},
                                     TypicalityConvention convention = TypicalityConvention::literal) {
  if (channels.empty()) throw std::invalid_argument("random_et_family: empty channel set");
  std::vector<Mat> bases;
  bases.reserve(static_cast<std::size_t>(word.length()));
  for (int x : word.letters) bases.push_back(letter_subspaces.at(static_cast<std::size_t>(x)).basis());
  Subspace g(kron_many(bases));
  if (k < 1 || k > g.dim()) throw std::invalid_argument("random_et_family: need 1 <= k <= dim(G)");

  std::vector<SubChannel> projected;
  std::vector<std::size_t> counts;
  for (const Channel& ch : channels) {
    projected.push_back(
        projected_reduced_operation(ch, letter_subspaces, word, delta, caps, convention));
    counts.push_back(projected.back().kraus_count());
  }
  // uniform sub-channel mixture: Kraus union scaled by 1/sqrt(|S|)
  std::vector<Mat> mix;
  const double scale = 1.0 / std::sqrt(static_cast<double>(projected.size()));
  for (const SubChannel& n : projected)
    for (const Mat& a : n.kraus()) mix.push_back(scale * a);
  SubChannel averaged(std::move(mix));

  UnitaryDesign design = make_design(g.dim());
  const DensityOperator pi_f = DensityOperator::maximally_mixed(k);
  EtCodeFamily family{k, g, {}, {}, std::move(counts)};
  family.encoders.reserve(design.size());
  family.recoveries.reserve(design.size());
  for (const Mat& u : design.unitaries) {
    Channel enc = Channel::isometry(g.basis() * u.leftCols(k));
    family.recoveries.push_back(bk_recovery(pi_f, compose(averaged, enc)));
    family.encoders.push_back(std::move(enc));
  }
  return family;
}

// entanglement fidelity of family member i through one l-fold channel use
inline double et_member_fidelity(const EtCodeFamily& family, std::size_t i, const SubChannel& nl) {
  const Mat pi_f = Mat::Identity(family.k, family.k) / static_cast<double>(family.k);
  return entanglement_fidelity(pi_f,
                               compose(family.recoveries[i], compose(nl, family.encoders[i])));
}

// Classical code over words: codewords plus a pretty-good-measurement decoder.
struct ClassicalCode {
  std::vector<Word> codewords;
  Povm decoder;
  std::vector<double> success;  // tr(sigma_{u_m} Lambda_m) per message
  std::uint64_t seed = 0;

  std::size_t messages() const { return codewords.size(); }
};

// sigma_u = (x) of per-letter channel outputs
inline Mat codeword_output(const std::vector<DensityOperator>& letter_inputs, const Channel& ch,
                           const Word& u) {
  Mat out = Mat::Identity(1, 1);
  for (int x : u.letters)
    out = kron(out, ch.apply(letter_inputs.at(static_cast<std::size_t>(x)).matrix())).eval();
  return out;
}

// PGM for a fixed output list: Lambda_m = S^{-1/2} sigma_m S^{-1/2} with
// S = sum sigma_m; the residual outside the support of S goes to message 0.
inline Povm pgm_povm(const std::vector<Mat>& outputs) {
  if (outputs.empty()) throw std::invalid_argument("pgm_povm: no outputs");
  Mat s = Mat::Zero(outputs[0].rows(), outputs[0].cols());
  for (const Mat& o : outputs) s += o;
  const Mat s_mh = pow_psd(herm(s), -0.5);
  std::vector<Mat> effects;
  effects.reserve(outputs.size());
  for (const Mat& o : outputs) effects.push_back(herm(s_mh * o * s_mh));
  Mat residual = Mat::Identity(s.rows(), s.cols());
  for (const Mat& e : effects) residual -= e;
  effects[0] = herm(effects[0] + residual);
  return Povm(std::move(effects));
}

// Codewords sampled uniformly from the typical set (i.i.d., or without
// replacement when requested), decoded by the PGM on the channel outputs.
inline ClassicalCode pgm_code(const std::vector<DensityOperator>& letter_inputs, const Channel& ch,
                              const std::vector<double>& p, double delta, int n,
                              std::size_t messages, const Rng& rng, const Caps& caps = {},
                              TypicalityConvention convention = TypicalityConvention::literal,
                              bool without_replacement = false) {
  if (messages < 1) throw std::invalid_argument("pgm_code: need at least one message");
  const std::vector<Word> pool = typical_set(p, delta, n, caps, convention);
  if (pool.empty()) throw std::domain_error("pgm_code: typical set is empty at this (delta, n)");
  if (without_replacement && messages > pool.size())
    throw std::domain_error("pgm_code: fewer distinct typical words than messages");

  std::vector<Word> codewords;
  codewords.reserve(messages);
  Rng draw = rng.sub("pgm/codewords");
  if (without_replacement) {
    std::vector<std::size_t> idx(pool.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t m = 0; m < messages; ++m) {
      const std::size_t j = m + static_cast<std::size_t>(draw.integer(idx.size() - m));
      std::swap(idx[m], idx[j]);
      codewords.push_back(pool[idx[m]]);
    }
  } else {
    for (std::size_t m = 0; m < messages; ++m)
      codewords.push_back(pool[static_cast<std::size_t>(draw.integer(pool.size()))]);
  }

  std::vector<Mat> outputs;
  outputs.reserve(messages);
  for (const Word& u : codewords) outputs.push_back(codeword_output(letter_inputs, ch, u));
  Povm decoder = pgm_povm(outputs);
  std::vector<double> success;
  success.reserve(messages);
  for (std::size_t m = 0; m < messages; ++m)
    success.push_back((outputs[m] * decoder.effect(m)).trace().real());
  return ClassicalCode{std::move(codewords), std::move(decoder), std::move(success), rng.seed()};
}

// Classically enhanced entanglement transmission code: per-message encoder
// plus sub-channel decoders whose sum is trace preserving.
struct CETCode {
  std::vector<Channel> encoders;     // C^{M2} -> H_A^{(x) n}
  std::vector<SubChannel> decoders;  // H_B^{(x) n} -> C^{M2}
  Eigen::Index m2 = 0;               // quantum code dimension
  Eigen::Index n = 0;                // blocklength

  std::size_t m1() const { return encoders.size(); }

  // max_abs of sum_m (decoder Kraus sum) - I; 0 for a complete decoder set
  double decoder_sum_defect() const {
    if (decoders.empty()) return 0.0;
    Mat sum = Mat::Zero(decoders[0].dim_in(), decoders[0].dim_in());
    for (const SubChannel& r : decoders) sum += r.kraus_sum();
    return max_abs(sum - Mat::Identity(sum.rows(), sum.cols()));
  }
};

// P(code, N_{s^n}, m).  The classical register decouples message blocks, so
// the joint fidelity against |m><m| (x) Phi collapses to the entanglement
// fidelity of the m-th block alone; a test pins this against the literal
// big-register evaluation.
inline double cet_performance(const CETCode& code, const SubChannel& nl, std::size_t m) {
  const Mat pi = Mat::Identity(code.m2, code.m2) / static_cast<double>(code.m2);
  return entanglement_fidelity(pi, compose(code.decoders[m], compose(nl, code.encoders[m])));
}

inline double cet_average_performance(const CETCode& code, const SubChannel& nl) {
  double sum = 0.0;
  for (std::size_t m = 0; m < code.m1(); ++m) sum += cet_performance(code, nl, m);
  return sum / static_cast<double>(code.m1());
}

// Assembly per the layered construction: the classical decoder effect is
// measured gently, then the selected family member's recovery runs on the
// conditioned state: R_m(rho) = R_{i(m)}(sqrt(Lambda_m) rho sqrt(Lambda_m)).
// i(m) is the exhaustive argmax of the channel-averaged member fidelity.
inline CETCode assemble_cet(const ClassicalCode& cc, const std::vector<EtCodeFamily>& families,
                            const std::vector<Channel>& channels, int n,
                            const Caps& caps = {}) {
  if (families.size() != cc.messages())
    throw std::invalid_argument("assemble_cet: one family per message required");
  if (families.empty()) throw std::invalid_argument("assemble_cet: no messages");
  std::vector<Channel> uses;
  uses.reserve(channels.size());
  for (const Channel& ch : channels) uses.push_back(tensor_power(ch, n, caps));

  CETCode code;
  code.n = n;
  code.m2 = families[0].k;
  for (std::size_t m = 0; m < families.size(); ++m) {
    const EtCodeFamily& fam = families[m];
    if (fam.k != code.m2) throw std::invalid_argument("assemble_cet: mismatched code dimensions");
    std::size_t best = 0;
    double best_val = -1.0;
    for (std::size_t i = 0; i < fam.size(); ++i) {
      double avg = 0.0;
      for (const Channel& nl : uses) avg += et_member_fidelity(fam, i, nl);
      avg /= static_cast<double>(uses.size());
      if (avg > best_val) {
        best_val = avg;
        best = i;
      }
    }
    const Mat lam_sqrt = sqrt_psd(cc.decoder.effect(m));
    std::vector<Mat> kraus;
    kraus.reserve(fam.recoveries[best].kraus_count());
    for (const Mat& r : fam.recoveries[best].kraus()) kraus.push_back(r * lam_sqrt);
    code.encoders.push_back(fam.encoders[best]);
    code.decoders.push_back(SubChannel(std::move(kraus)));
  }
  return code;
}

// Classically enhanced entanglement generation: the encoder is absorbed into
// the prepared pure state Psi_m = (id (x) P_m)(Phi).
struct CEGCode {
  std::vector<PureVector> states;      // on C^{M2} (x) E (x) H_A^{(x) n}
  std::vector<SubChannel> decoders;    // H_B^{(x) n} -> C^{M2}
  std::vector<Eigen::Index> env_dims;  // dilation register per message (1 = isometric)
  Eigen::Index m2 = 0;
  Eigen::Index n = 0;
};

// maximally entangled vector (1/sqrt(k)) sum_i |i>|i>
inline Vec maximally_entangled_vector(Eigen::Index k) {
  Vec phi = Vec::Zero(k * k);
  for (Eigen::Index i = 0; i < k; ++i) phi(i * k + i) = 1.0 / std::sqrt(static_cast<double>(k));
  return phi;
}

inline CEGCode ceg_from_cet(const CETCode& cet) {
  CEGCode ceg;
  ceg.m2 = cet.m2;
  ceg.n = cet.n;
  const Eigen::Index k = cet.m2;
  const Vec phi = maximally_entangled_vector(k);
  for (std::size_t m = 0; m < cet.m1(); ++m) {
    const auto& kraus = cet.encoders[m].kraus();
    const Eigen::Index dout = cet.encoders[m].dim_out();
    if (kraus.size() == 1) {
      // isometric encoder: (I (x) V) Phi is already pure
      ceg.states.emplace_back(Vec(kron(Mat::Identity(k, k), kraus[0]) * phi));
      ceg.env_dims.push_back(1);
    } else {
      // Stinespring dilation V = sum_e |e> (x) A_e; the dilation register
      // rides along the reference side and is traced before comparison
      const Eigen::Index de = static_cast<Eigen::Index>(kraus.size());
      Mat v = Mat::Zero(de * dout, k);
      for (Eigen::Index e = 0; e < de; ++e)
        v.block(e * dout, 0, dout, k) = kraus[static_cast<std::size_t>(e)];
      ceg.states.emplace_back(Vec(kron(Mat::Identity(k, k), v) * phi));
      ceg.env_dims.push_back(de);
    }
  }
  for (const SubChannel& r : cet.decoders) ceg.decoders.push_back(r);
  return ceg;
}

// P(ceg, N_{s^n}, m): fidelity of (id (x) R_m circ N_{s^n})(Psi_m) against
// Phi after tracing any dilation register; the classical register selects the
// m-th decoder block exactly, as in cet_performance.
inline double ceg_performance(const CEGCode& ceg, const SubChannel& nl, std::size_t m) {
  const Eigen::Index k = ceg.m2, de = ceg.env_dims[m];
  const SubChannel ref = SubChannel({Mat::Identity(k * de, k * de)});
  Mat sigma = tensor(ref, compose(ceg.decoders[m], nl)).apply(ceg.states[m].projector());
  if (de > 1) sigma = partial_trace(sigma, {k, de, k}, {0, 2});
  const Vec phi = maximally_entangled_vector(k);
  return (phi.adjoint() * sigma * phi).value().real();
}

// Decomposition of a c-q word state V^{(x) l}(x^l) into uniform mixtures over
// joint-type classes of eigenvector words: weight = (product of eigenvalues)
// x (class size); the spanning eigenvector words are orthonormal.
struct MixtureComponent {
  double weight = 0.0;
  Subspace span;
};

inline std::vector<MixtureComponent> mixture_decomposition(
    const std::vector<DensityOperator>& letter_states, const Word& word, const Caps& caps = {}) {
  const int l = word.length();
  if (l < 1) throw std::invalid_argument("mixture_decomposition: empty word");
  const Eigen::Index d = letter_states.at(0).dim();
  caps.check_sequences(std::pow(static_cast<double>(d), l), "mixture_decomposition");

  std::vector<Eigh> eigs;
  eigs.reserve(letter_states.size());
  for (const DensityOperator& rho : letter_states) {
    if (rho.dim() != d) throw std::invalid_argument("mixture_decomposition: mixed letter dims");
    eigs.push_back(eigh(rho.matrix()));
  }

  const std::size_t alphabet = letter_states.size();
  std::map<std::vector<int>, std::pair<double, std::vector<Vec>>> classes;
  std::vector<Eigen::Index> y(static_cast<std::size_t>(l), 0);
  while (true) {
    std::vector<int> joint(alphabet * static_cast<std::size_t>(d), 0);
    double q = 1.0;
    Vec v = Vec::Ones(1);
    for (int i = 0; i < l; ++i) {
      const auto xi = static_cast<std::size_t>(word.letters[static_cast<std::size_t>(i)]);
      const Eigen::Index yi = y[static_cast<std::size_t>(i)];
      joint[xi * static_cast<std::size_t>(d) + static_cast<std::size_t>(yi)] += 1;
      q *= eigs[xi].values(yi);
      v = kron(v, Vec(eigs[xi].vectors.col(yi)));
    }
    if (q > 1e-15) {
      auto& slot = classes[joint];
      slot.first = q;  // constant across the class
      slot.second.push_back(std::move(v));
    }
    int pos = l - 1;
    while (pos >= 0 && ++y[static_cast<std::size_t>(pos)] == d) y[static_cast<std::size_t>(pos--)] = 0;
    if (pos < 0) break;
  }

  std::vector<MixtureComponent> out;
  out.reserve(classes.size());
  for (auto& [joint, slot] : classes) {
    Mat basis(slot.second[0].size(), static_cast<Eigen::Index>(slot.second.size()));
    for (std::size_t c = 0; c < slot.second.size(); ++c)
      basis.col(static_cast<Eigen::Index>(c)) = slot.second[c];
    out.push_back(
        {slot.first * static_cast<double>(slot.second.size()), Subspace(std::move(basis))});
  }
  return out;
}

// sum_lambda q_lambda pi^lambda, for reconstruction checks
inline Mat mixture_reconstruction(const std::vector<MixtureComponent>& components) {
  if (components.empty()) throw std::invalid_argument("mixture_reconstruction: empty");
  const Eigen::Index dim = components[0].span.ambient();
  Mat out = Mat::Zero(dim, dim);
  for (const MixtureComponent& c : components)
    out += c.weight * c.span.projector() / static_cast<double>(c.span.dim());
  return out;
}

}  // namespace qsr

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qsr/avqc.hpp"
#include "qsr/coding.hpp"
#include "qsr/entropy.hpp"
#include "qsr/random_sampling.hpp"
#include "qsr/typicality.hpp"

using namespace qsr;

namespace {

CETCode identity_code(Eigen::Index d, int l) {
  Eigen::Index bigd = 1;
  for (int i = 0; i < l; ++i) bigd *= d;
  CETCode code;
  code.m2 = bigd;
  code.n = l;
  code.encoders.push_back(Channel::identity(bigd));
  code.decoders.emplace_back(std::vector<Mat>{Mat::Identity(bigd, bigd)});
  return code;
}

}  // namespace

TEST_CASE("worst case sequence for a dephasing pair is all-dephase", "[avqc]") {
  const AvqcSpec spec{{Channel::identity(2), Channel::z_dephasing(0.3)}, 2};
  const CETCode code = identity_code(2, 2);
  const WorstCase wc = worst_case_performance(code, spec);
  CHECK(wc.argmin.letters == std::vector<int>{1, 1});
  const Channel worst = sequence_channel(spec, wc.argmin);
  CHECK(std::abs(wc.value - cet_average_performance(code, worst)) < 1e-12);
  // every other sequence does at least as well
  const Channel mixed = sequence_channel(spec, Word{{0, 1}, 2});
  CHECK(cet_average_performance(code, mixed) >= wc.value - 1e-12);
}

TEST_CASE("permuted codes conjugate the jammer effect operator", "[avqc]") {
  // X_{C_pi} = U_pi X U_pi^dagger on the jammer register, n = 2
  Rng rng(101);
  const Channel raw = random_channel(rng, 4, 2, 2);
  const QuantumJammerChannel qj(raw, 2, 2);
  const CETCode code = identity_code(2, 2);
  const JammerEffect base = jammer_effect_operator(code, qj, 2);
  const std::vector<Eigen::Index> order{1, 0};
  const CETCode swapped = permuted_cet(code, order, 2, 2);
  const JammerEffect eff = jammer_effect_operator(swapped, qj, 2);
  const Mat u = permutation_unitary(2, order);
  CHECK(max_abs(eff.x - u * base.x * u.adjoint()) < 1e-10);
}

TEST_CASE("robustified codes perform uniformly across a type class", "[avqc]") {
  const AvqcSpec spec{{Channel::z_dephasing(0.2), Channel::x_dephasing(0.35)}, 2};
  const CETCode code = identity_code(2, 2);
  const RandomCetCode rc = robustify(code, 2, 2);
  CHECK(rc.support.size() == 2);
  const double p01 = random_code_performance(rc, sequence_channel(spec, Word{{0, 1}, 2}));
  const double p10 = random_code_performance(rc, sequence_channel(spec, Word{{1, 0}, 2}));
  CHECK(std::abs(p01 - p10) < 1e-10);
}

TEST_CASE("permutation average equals the type-class mean", "[avqc]") {
  Rng rng(103);
  const int l = 4, alphabet = 2;
  std::vector<double> f(16);
  for (double& v : f) v = rng.uniform();
  const Word word{{0, 1, 1, 0}, alphabet};

  std::vector<std::size_t> perm(l);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  double avg = 0.0;
  std::size_t count = 0;
  do {
    std::size_t idx = 0;
    for (int i = 0; i < l; ++i)
      idx = idx * alphabet + static_cast<std::size_t>(word.letters[perm[static_cast<std::size_t>(i)]]);
    avg += f[idx];
    ++count;
  } while (std::next_permutation(perm.begin(), perm.end()));
  avg /= static_cast<double>(count);

  const auto words = type_class(type_of(word));
  double mean = 0.0;
  for (const Word& w : words) {
    std::size_t idx = 0;
    for (int i = 0; i < l; ++i) idx = idx * alphabet + static_cast<std::size_t>(w.letters[i]);
    mean += f[idx];
  }
  mean /= static_cast<double>(words.size());
  CHECK(std::abs(avg - mean) < 1e-12);
}

TEST_CASE("robustness lemma holds for hypothesis-satisfying tables", "[avqc]") {
  Rng rng(107);
  for (int t = 0; t < 10; ++t) {
    Rng sub = rng.sub("f", static_cast<std::uint64_t>(t));
    const int l = 2 + static_cast<int>(sub.integer(3));
    const int alphabet = 2;
    const double gamma = 0.1;
    const auto total = static_cast<std::size_t>(std::pow(2.0, l) + 0.5);
    std::vector<double> f(total);
    for (double& v : f) v = 1.0 - gamma + gamma * sub.uniform();
    const auto rep = robustlemma_check(f, l, alphabet, gamma);
    CHECK(rep.hypothesis_holds);
    CHECK(rep.conclusion_holds);
    CHECK(rep.factor == std::pow(static_cast<double>(l + 1), 2.0));
  }
}

TEST_CASE("elimination validates the prefix shape and blocklengths", "[avqc]") {
  const AvqcSpec spec{{Channel::identity(2), Channel::z_dephasing(0.2)}, 2};
  const CETCode code = identity_code(2, 2);
  const RandomCetCode rc = robustify(code, 2, 2);
  CETCode bad = identity_code(2, 1);  // m1 = 1 != l^2
  CHECK_THROWS_AS(eliminate(rc, bad, spec, 0.1, Rng(1)), std::invalid_argument);
}

TEST_CASE("elimination produces a combined code meeting the union bound", "[avqc]") {
  const int l = 2;
  const AvqcSpec spec{{Channel::identity(2), Channel::z_dephasing(0.1)}, l};
  const CETCode inner = identity_code(2, l);
  const RandomCetCode rc = robustify(inner, 2, 2);

  // prefix: l^2 = 4 classical messages on 2 extra uses, m2 = 1, basis encoders
  CETCode prefix;
  prefix.n = 2;
  prefix.m2 = 1;
  for (Eigen::Index m = 0; m < 4; ++m) {
    prefix.encoders.push_back(Channel::isometry(basis_vector(4, m)));
    prefix.decoders.emplace_back(std::vector<Mat>{Mat(basis_vector(4, m).adjoint())});
  }
  REQUIRE(prefix.decoder_sum_defect() < 1e-12);

  const EliminationReport rep = eliminate(rc, prefix, spec, 0.2, Rng(77));
  CHECK(rep.samples.size() == 4);
  CHECK(rep.combined.n == prefix.n + l);
  CHECK(rep.combined.decoder_sum_defect() < 1e-9);
  CHECK(rep.markov_bound <= 1.0);

  // on every sequence pair the combined code obeys the product transfer bound
  const AvqcSpec pre_spec{spec.channels, static_cast<int>(prefix.n)};
  for (int s_pre = 0; s_pre < 2; ++s_pre) {
    Word pre{{s_pre, s_pre}, 2};
    for (int s_main = 0; s_main < 2; ++s_main) {
      Word main{{s_main, s_main}, 2};
      const Channel pre_ch = sequence_channel(pre_spec, pre);
      const Channel main_ch = sequence_channel(spec, main);
      const double p_pre = cet_average_performance(prefix, pre_ch);
      double p_main = 0.0;
      for (std::size_t i = 0; i < rep.samples.size(); ++i)
        p_main += cet_average_performance(rep.samples[i], main_ch);
      p_main /= static_cast<double>(rep.samples.size());
      const double combined = cet_average_performance(rep.combined, tensor(pre_ch, main_ch));
      CHECK(combined >= p_pre + p_main - 1.0 - 1e-9);
    }
  }
}

TEST_CASE("classical reduction yields a valid povm and dominates entanglement fidelity", "[avqc]") {
  Rng rng(113);
  const Mat u = haar_unitary(rng, 2);
  const Channel enc = Channel::unitary(u);
  const Channel rec = Channel::unitary(Mat(u.adjoint()));
  const ClassicalReduction red = classical_reduction(enc, rec);
  REQUIRE(red.states.size() == 2);
  Mat sum = Mat::Zero(2, 2);
  for (const Mat& e : red.povm.effects()) sum += e;
  CHECK(max_abs(sum - Mat::Identity(2, 2)) < 1e-9);

  // sending basis states is never harder than preserving entanglement
  const Channel nl = Channel::z_dephasing(0.25);
  const double classical = classical_success(red, nl);
  CETCode code;
  code.n = 1;
  code.m2 = 2;
  code.encoders.push_back(enc);
  code.decoders.push_back(rec);
  const double quantum = cet_average_performance(code, nl);
  CHECK(classical >= quantum - 1e-9);
}

TEST_CASE("symmetrizability: constant channels are symmetrizable", "[avqc]") {
  Rng rng(127);
  const DensityOperator s0 = random_density(rng, 2), s1 = random_density(rng, 2);
  const AvqcSpec spec{{Channel::constant(s0, 2), Channel::constant(s1, 2)}, 1};
  const SymmetrizabilityInstance inst{
      {DensityOperator(basis_vector(2, 0) * basis_vector(2, 0).adjoint()),
       DensityOperator(basis_vector(2, 1) * basis_vector(2, 1).adjoint())},
      1};
  const SymmetrizabilityResult res = symmetrizability_lp(spec, inst);
  REQUIRE(res.feasible);
  // verify the returned maps satisfy the defining identity
  for (Eigen::Index i = 0; i < 2; ++i) {
    double total = 0.0;
    for (Eigen::Index s = 0; s < 2; ++s) total += res.maps(i, s);
    CHECK(std::abs(total - 1.0) < 1e-8);
    CHECK(res.maps.row(i).minCoeff() > -1e-10);
  }
  Mat lhs = Mat::Zero(2, 2), rhs = Mat::Zero(2, 2);
  for (Eigen::Index s = 0; s < 2; ++s) {
    const Channel& ch = spec.channels[static_cast<std::size_t>(s)];
    lhs += res.maps(0, s) * ch.apply(inst.states[1].matrix());
    rhs += res.maps(1, s) * ch.apply(inst.states[0].matrix());
  }
  CHECK(max_abs(lhs - rhs) < 1e-7);
}

TEST_CASE("symmetrizability: the identity channel is not symmetrizable", "[avqc]") {
  const AvqcSpec spec{{Channel::identity(2)}, 1};
  Vec plus = (basis_vector(2, 0) + basis_vector(2, 1)) / std::sqrt(2.0);
  const SymmetrizabilityInstance inst{
      {DensityOperator(basis_vector(2, 0) * basis_vector(2, 0).adjoint()),
       DensityOperator(plus * plus.adjoint())},
      1};
  const SymmetrizabilityResult res = symmetrizability_lp(spec, inst);
  REQUIRE_FALSE(res.feasible);
  CHECK(res.certificate.size() > 0);
  CHECK(res.certificate.cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("jammer effect operator matches direct evaluation", "[avqc]") {
  Rng rng(131);
  const Channel raw = random_channel(rng, 4, 2, 3);
  const QuantumJammerChannel qj(raw, 2, 2);
  const CETCode code = identity_code(2, 2);
  const JammerEffect eff = jammer_effect_operator(code, qj, 2);
  CHECK(eff.psd_defect < 1e-9);
  CHECK(std::abs(eff.worst_case - (1.0 - eff.spectrum(eff.spectrum.size() - 1))) < 1e-12);

  for (int t = 0; t < 10; ++t) {
    Rng sub = rng.sub("sigma", static_cast<std::uint64_t>(t));
    const DensityOperator sigma = random_density(sub, 4);
    const double affine = 1.0 - (eff.x * sigma.matrix()).trace().real();
    const Channel restricted = jammer_restricted_channel(qj, 2, sigma);
    const double direct = cet_average_performance(code, restricted);
    CHECK(std::abs(affine - direct) < 1e-9);
    // no sampled jammer beats the spectral worst case
    CHECK(affine >= eff.worst_case - 1e-9);
  }
}

TEST_CASE("symmetrized effect is permutation invariant", "[avqc]") {
  Rng rng(137);
  const Channel raw = random_channel(rng, 4, 2, 2);
  const QuantumJammerChannel qj(raw, 2, 2);
  const CETCode code = identity_code(2, 2);
  const JammerEffect eff = jammer_effect_operator(code, qj, 2);
  const Mat xbar = symmetrized_effect(eff.x, 2, 2);
  const Mat u = permutation_unitary(2, {1, 0});
  CHECK(max_abs(u * xbar * u.adjoint() - xbar) < 1e-10);
  // iid ascent lower-bounds the symmetrized maximum
  const double lambda = worst_iid_jammer_error(xbar, 2, 2, Rng(7));
  CHECK(lambda <= eigvalsh(xbar).maxCoeff() + 1e-9);
}

TEST_CASE("quantum robustification inequality holds on a toy code", "[avqc]") {
  Rng rng(139);
  const Channel raw = random_channel(rng, 4, 2, 2);
  const QuantumJammerChannel qj(raw, 2, 2);
  const CETCode code = identity_code(2, 2);
  const QuantumRobustification rep = quantum_robustification_check(code, qj, 2, Rng(11));
  CHECK(rep.holds);
  CHECK(rep.factor == std::pow(3.0, 4.0));
  CHECK(rep.lhs >= rep.rhs - 1e-9);
}

TEST_CASE("matrix chernoff monte carlo respects the tail bound", "[avqc]") {
  const auto sampler = [](Rng& r) {
    const double b = r.uniform() < 0.25 ? 1.0 : 0.0;
    return Mat(b * Mat::Identity(2, 2));
  };
  const ChernoffReport rep = matrix_chernoff_mc(sampler, 30, 0.6, 0.25, 400, Rng(17));
  CHECK(rep.dim == 2);
  CHECK(rep.empirical_loewner <= rep.empirical + 1e-12);
  CHECK(rep.wilson_low <= rep.bound + 1e-12);
  CHECK(std::abs(rep.bound - 2.0 * std::exp(-2.0 * 30.0 * 0.35 * 0.35)) < 1e-12);
  // deterministic under the seed
  const ChernoffReport again = matrix_chernoff_mc(sampler, 30, 0.6, 0.25, 400, Rng(17));
  CHECK(rep.empirical == again.empirical);
  CHECK_THROWS_AS(matrix_chernoff_mc(sampler, 30, 0.2, 0.25, 10, Rng(1)), std::invalid_argument);
}

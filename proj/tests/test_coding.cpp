#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "qsr/coding.hpp"
#include "qsr/design.hpp"
#include "qsr/entropy.hpp"
#include "qsr/random_sampling.hpp"
#include "qsr/serialize.hpp"

using namespace qsr;

TEST_CASE("single-qubit clifford group is an exact 2-design", "[coding]") {
  const UnitaryDesign d = make_design(2);
  CHECK(d.size() == 24);
  const DesignReport rep = verify_design(d);
  CHECK(rep.max_unitarity_defect < 1e-10);
  CHECK(rep.one_design_defect < 1e-10);
  CHECK(rep.two_design_defect < 1e-8);
  CHECK(rep.is_two_design);
}

TEST_CASE("two-qubit clifford group is an exact 2-design", "[coding][slow]") {
  const UnitaryDesign d = make_design(4);
  CHECK(d.size() == 11520);
  const DesignReport rep = verify_design(d);
  CHECK(rep.two_design_defect < 1e-8);
  CHECK(rep.is_two_design);
}

TEST_CASE("pauli pair fails the 2-design test", "[coding]") {
  UnitaryDesign d;
  d.dim = 2;
  d.unitaries = {Mat::Identity(2, 2), (Mat(2, 2) << 0, 1, 1, 0).finished()};
  CHECK_FALSE(verify_design(d).is_two_design);
}

TEST_CASE("twirl matches the haar closed form on random inputs", "[coding]") {
  const UnitaryDesign d = make_design(2);
  Rng rng(61);
  const Mat rho = random_density(rng, 4).matrix();  // state on two copies
  CHECK(max_abs(twirl2(d, rho) - haar_twirl2(2, rho)) < 1e-10);
}

TEST_CASE("decoupling bound evaluates its frozen closed form", "[coding]") {
  // identity channel on a qubit: G = C^2, one Kraus word, ||pi_2||_2 = 1/sqrt 2
  const Subspace g = Subspace::full(2);
  const SubChannel id({Mat::Identity(2, 2)});
  const double bound = decoupling_bound(1, g, {id});
  CHECK(std::abs(bound - (1.0 - 2.0 / std::sqrt(2.0))) < 1e-12);
  // two copies of the same sub-operation double the penalty, not the trace
  const double two = decoupling_bound(1, g, {id, id});
  CHECK(std::abs(two - (1.0 - 4.0 / std::sqrt(2.0))) < 1e-12);
  // k scales the penalty by sqrt(k)
  const double k2 = decoupling_bound(2, g, {id});
  CHECK(std::abs(k2 - (1.0 - 2.0 * std::sqrt(2.0) / std::sqrt(2.0))) < 1e-12);
  CHECK_THROWS_AS(decoupling_bound(3, g, {id}), std::invalid_argument);
}

TEST_CASE("transpose recovery kernel sums to the support projector", "[coding]") {
  Rng rng(67);
  const DensityOperator rho = random_density(rng, 2);
  const Channel ch = Channel::amplitude_damping(0.3);
  const SubChannel kernel = transpose_recovery_kernel(rho, ch);
  const Mat sigma = ch.apply(rho.matrix());
  CHECK(max_abs(kernel.kraus_sum() - support_projector(sigma)) < 1e-9);
}

TEST_CASE("bk recovery is trace preserving and exact on isometries", "[coding]") {
  Rng rng(71);
  const DensityOperator rho = random_density(rng, 2);
  const Mat v = haar_isometry(rng, 4, 2);
  const Channel iso = Channel::isometry(v);
  const Channel rec = bk_recovery(rho, iso);
  Mat sum = Mat::Zero(4, 4);
  for (const Mat& k : rec.kraus()) sum += k.adjoint() * k;
  CHECK(max_abs(sum - Mat::Identity(4, 4)) < 1e-9);
  // isometries are perfectly reversible
  CHECK(std::abs(entanglement_fidelity(rho, compose(rec, iso)) - 1.0) < 1e-9);

  // and for noisy channels the bracket lower end stays a valid fidelity
  const Channel noisy = Channel::depolarizing(2, 0.2);
  const FidelityBracket br = fce_bracket(rho, noisy);
  CHECK(br.lower >= 0.0);
  CHECK(br.lower <= br.upper + 1e-12);
  CHECK(br.upper == 1.0);
  CHECK(std::abs(fce_bracket(rho, Channel::identity(2)).lower - 1.0) < 1e-10);
}

TEST_CASE("projected reduced operation is dominated by the tensor power", "[coding]") {
  const Channel z = Channel::z_dephasing(0.1);
  const std::vector<Subspace> letters{Subspace::full(2)};
  Word w{{0, 0}, 1};
  const SubChannel proj =
      projected_reduced_operation(z, letters, w, 0.55, {}, TypicalityConvention::relaxed);
  const Channel full = tensor_power(z, 2);
  const Mat pi = Mat::Identity(4, 4) / 4.0;
  const Mat a = proj.apply(pi), b = full.apply(pi);
  CHECK(is_psd(b - a, 1e-9));
  // at delta = 0.55 only the doubly-flipped environment word is atypical, so the
  // surviving trace is exactly 1 - q^2 with q = 0.1
  CHECK(std::abs(a.trace().real() - 0.99) < 1e-9);
}

TEST_CASE("random et family transmits noiselessly at full tolerance", "[coding]") {
  const std::vector<Subspace> letters{Subspace::full(2)};
  Word w{{0}, 1};
  const std::vector<Channel> chans{Channel::identity(2)};
  const EtCodeFamily fam =
      random_et_family(letters, w, 2, chans, 1.0, {}, TypicalityConvention::relaxed);
  CHECK(fam.size() == 24);
  const Channel id = Channel::identity(2);
  for (std::size_t i = 0; i < 4; ++i)
    CHECK(std::abs(et_member_fidelity(fam, i, id) - 1.0) < 1e-9);
}

TEST_CASE("et member fidelities exceed the decoupling transfer floor", "[coding]") {
  const std::vector<Subspace> letters{Subspace::full(2)};
  Word w{{0, 0}, 1};
  const std::vector<Channel> chans{Channel::z_dephasing(0.05), Channel::x_dephasing(0.05)};
  const EtCodeFamily fam =
      random_et_family(letters, w, 2, chans, 0.5, {}, TypicalityConvention::relaxed);
  std::vector<SubChannel> projected;
  for (const Channel& ch : chans)
    projected.push_back(
        projected_reduced_operation(ch, letters, w, 0.5, {}, TypicalityConvention::relaxed));
  const double bound = decoupling_bound(2, fam.g, projected);
  for (const Channel& ch : chans) {
    const Channel nl = tensor_power(ch, 2);
    for (std::size_t i = 0; i < fam.size(); i += 6)
      CHECK(et_member_fidelity(fam, i, nl) >= 2.0 * bound - 1.0 - 1e-9);
  }
}

TEST_CASE("pgm reaches the two-state closed form", "[coding]") {
  for (double deg : {15.0, 30.0, 45.0}) {
    const double theta = deg * M_PI / 180.0;
    Vec a = basis_vector(2, 0);
    Vec b = std::cos(theta) * basis_vector(2, 0) + std::sin(theta) * basis_vector(2, 1);
    const Povm pgm = pgm_povm({0.5 * a * a.adjoint(), 0.5 * b * b.adjoint()});
    const double success = 0.5 * ((a * a.adjoint() * pgm.effect(0)).trace().real() +
                                  (b * b.adjoint() * pgm.effect(1)).trace().real());
    const double helstrom = 0.5 * (1.0 + std::sqrt(1.0 - std::cos(theta) * std::cos(theta)));
    CHECK(std::abs(success - helstrom) < 1e-6);
  }
}

TEST_CASE("pgm code decodes orthogonal letters perfectly", "[coding]") {
  const std::vector<DensityOperator> letters{
      DensityOperator(basis_vector(2, 0) * basis_vector(2, 0).adjoint()),
      DensityOperator(basis_vector(2, 1) * basis_vector(2, 1).adjoint())};
  const std::vector<double> p{0.5, 0.5};
  const ClassicalCode code = pgm_code(letters, Channel::identity(2), p, 0.5, 2, 4, Rng(5), {},
                                      TypicalityConvention::relaxed, true);
  REQUIRE(code.messages() == 4);
  for (double s : code.success) CHECK(std::abs(s - 1.0) < 1e-9);
  // distinct codewords when drawn without replacement
  for (std::size_t i = 0; i < code.codewords.size(); ++i)
    for (std::size_t j = i + 1; j < code.codewords.size(); ++j)
      CHECK(code.codewords[i].letters != code.codewords[j].letters);
}

TEST_CASE("pgm code is deterministic in the seed", "[coding]") {
  const std::vector<DensityOperator> letters{
      DensityOperator(basis_vector(2, 0) * basis_vector(2, 0).adjoint()),
      DensityOperator((Mat(2, 2) << 0.8, 0.1, 0.1, 0.2).finished())};
  const std::vector<double> p{0.5, 0.5};
  const auto a = pgm_code(letters, Channel::z_dephasing(0.1), p, 0.5, 3, 2, Rng(9));
  const auto b = pgm_code(letters, Channel::z_dephasing(0.1), p, 0.5, 3, 2, Rng(9));
  for (std::size_t m = 0; m < a.messages(); ++m) {
    CHECK(a.codewords[m].letters == b.codewords[m].letters);
    CHECK(a.success[m] == b.success[m]);
  }
}

namespace {
// two-message CET code on one qubit use: the classical codeword picks the
// basis-state subspace, the ET family for message m lives on that subspace
CETCode tiny_cet(const std::vector<Channel>& chans) {
  const std::vector<Subspace> letters{Subspace::computational(2, 0, 1),
                                      Subspace::computational(2, 1, 1)};
  const std::vector<DensityOperator> letter_inputs{DensityOperator(letters[0].projector()),
                                                   DensityOperator(letters[1].projector())};
  const std::vector<double> p{0.5, 0.5};
  const ClassicalCode cc = pgm_code(letter_inputs, chans[0], p, 1.0, 1, 2, Rng(3), {},
                                    TypicalityConvention::relaxed, true);
  std::vector<EtCodeFamily> families;
  for (std::size_t m = 0; m < cc.messages(); ++m)
    families.push_back(random_et_family(letters, cc.codewords[m], 1, chans, 1.0, {},
                                        TypicalityConvention::relaxed));
  return assemble_cet(cc, families, chans, 1);
}
}  // namespace

TEST_CASE("assembled cet code has a complete decoder", "[coding]") {
  const std::vector<Channel> chans{Channel::identity(2)};
  const CETCode code = tiny_cet(chans);
  CHECK(code.m1() == 2);
  CHECK(code.m2 == 1);
  CHECK(code.decoder_sum_defect() < 1e-9);
  CHECK(cet_average_performance(code, Channel::identity(2)) > 0.9);
}

TEST_CASE("cet block collapse equals the literal joint-register route", "[coding]") {
  const std::vector<Channel> chans{Channel::z_dephasing(0.1)};
  const CETCode code = tiny_cet(chans);
  const Channel nl = Channel::z_dephasing(0.1);
  const auto m1 = static_cast<Eigen::Index>(code.m1());
  const Eigen::Index k = code.m2;
  const Vec phi = maximally_entangled_vector(k);

  for (std::size_t m = 0; m < code.m1(); ++m) {
    // literal route: send the code half of Phi through N o P_m, run every
    // decoder block, tag each with its message index, compare on M (x) FA (x) FB
    const SubChannel ref_id({Mat::Identity(k, k)});
    const Mat mid =
        tensor(ref_id, compose(SubChannel(nl.kraus()), SubChannel(code.encoders[m].kraus())))
            .apply(phi * phi.adjoint());
    Mat sigma = Mat::Zero(m1 * k * k, m1 * k * k);
    for (std::size_t mm = 0; mm < code.m1(); ++mm) {
      const Mat block = tensor(ref_id, code.decoders[mm]).apply(mid);
      const Vec tag = basis_vector(m1, static_cast<Eigen::Index>(mm));
      sigma += kron(Mat(tag * tag.adjoint()), block);
    }
    const Vec target = kron(basis_vector(m1, static_cast<Eigen::Index>(m)), phi);
    const double literal = (target.adjoint() * sigma * target).value().real();
    CHECK(std::abs(literal - cet_performance(code, nl, m)) < 1e-12);
  }
}

TEST_CASE("ceg conversion preserves performance for isometric encoders", "[coding]") {
  const std::vector<Channel> chans{Channel::z_dephasing(0.15)};
  const CETCode cet = tiny_cet(chans);
  const CEGCode ceg = ceg_from_cet(cet);
  REQUIRE(ceg.states.size() == cet.m1());
  const Channel nl = Channel::z_dephasing(0.15);
  for (std::size_t m = 0; m < cet.m1(); ++m) {
    CHECK(ceg.env_dims[m] == 1);
    CHECK(std::abs(ceg_performance(ceg, nl, m) - cet_performance(cet, nl, m)) < 1e-10);
  }
}

TEST_CASE("ceg conversion dilates non-isometric encoders", "[coding]") {
  CETCode cet;
  cet.n = 1;
  cet.m2 = 2;
  cet.encoders.push_back(Channel::depolarizing(2, 0.3));
  cet.decoders.emplace_back(std::vector<Mat>{Mat::Identity(2, 2)});
  const CEGCode ceg = ceg_from_cet(cet);
  CHECK(ceg.env_dims[0] > 1);
  // the dilating register is traced out, so performance matches the cet route
  CHECK(std::abs(ceg_performance(ceg, Channel::identity(2), 0) -
                 cet_performance(cet, Channel::identity(2), 0)) < 1e-10);
}

TEST_CASE("mixture decomposition reconstructs the word state", "[coding]") {
  Rng rng(83);
  const std::vector<DensityOperator> letters{random_density(rng, 2), random_density(rng, 2)};
  Word w{{0, 1, 0}, 2};
  const auto comps = mixture_decomposition(letters, w);
  double total = 0.0;
  for (const auto& c : comps) total += c.weight;
  CHECK(std::abs(total - 1.0) < 1e-10);
  Mat expect = kron(kron(letters[0].matrix(), letters[1].matrix()), letters[0].matrix());
  CHECK(max_abs(mixture_reconstruction(comps) - expect) < 1e-10);
}

TEST_CASE("channel spec json round trips", "[coding]") {
  ChannelSpecFile spec;
  spec.dim_in = 2;
  spec.dim_out = 2;
  spec.names = {"keep", "flip"};
  spec.channels = {Channel::z_dephasing(0.25), Channel::x_dephasing(0.4)};
  const json doc = channel_spec_to_json(spec);
  const ChannelSpecFile back = channel_spec_from_json(doc);
  REQUIRE(back.channels.size() == 2);
  CHECK(back.names == spec.names);
  Rng rng(29);
  const Mat probe = random_density(rng, 2).matrix();
  for (std::size_t i = 0; i < 2; ++i)
    CHECK(max_abs(back.channels[i].apply(probe) - spec.channels[i].apply(probe)) < 1e-12);
  // duplicate names rejected
  json dup = doc;
  dup["channels"][1]["name"] = "keep";
  CHECK_THROWS_AS(channel_spec_from_json(dup), std::invalid_argument);
}

TEST_CASE("cet code bundles reload and reproduce performances", "[coding]") {
  const std::vector<Channel> chans{Channel::z_dephasing(0.1)};
  const CETCode code = tiny_cet(chans);
  const CETCode back = cet_code_from_json(cet_code_to_json(code));
  const Channel nl = Channel::z_dephasing(0.1);
  for (std::size_t m = 0; m < code.m1(); ++m)
    CHECK(std::abs(cet_performance(back, nl, m) - cet_performance(code, nl, m)) < 1e-12);
}

// Command-line driver: region / verify / simulate / symmetrize / net.
//
// Reports are deterministic for fixed (input files, flags, seed): wall-clock
// timing goes to stderr only, every JSON document carries the seed, a hash of
// the effective configuration, and the artifact version.

#include <chrono>
#include <cstdint>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qsr/avqc.hpp"
#include "qsr/channels.hpp"
#include "qsr/coding.hpp"
#include "qsr/config.hpp"
#include "qsr/design.hpp"
#include "qsr/entropy.hpp"
#include "qsr/inequalities.hpp"
#include "qsr/linalg.hpp"
#include "qsr/nets.hpp"
#include "qsr/random_sampling.hpp"
#include "qsr/regions.hpp"
#include "qsr/rng.hpp"
#include "qsr/serialize.hpp"
#include "qsr/states.hpp"
#include "qsr/typicality.hpp"

namespace {

using qsr::json;

struct CommonArgs {
  std::string spec_path;
  std::string out_prefix;
  std::uint64_t seed = 1;
  int l = 1;
  int trials = 200;
  double tau = 0.1;
  std::string mode;
  std::string suite;
};

std::string caps_blob(const qsr::Caps& caps) {
  std::ostringstream s;
  s << caps.tensor_dim << ':' << caps.sequences << ':' << caps.jammer_dim;
  return s.str();
}

// canonical flag string hashed into every report
std::string config_blob(const std::string& cmd, const CommonArgs& a, const qsr::Caps& caps) {
  std::ostringstream s;
  s << cmd << "|spec=" << a.spec_path << "|l=" << a.l << "|seed=" << a.seed
    << "|trials=" << a.trials << "|tau=" << qsr::format_number(a.tau) << "|mode=" << a.mode
    << "|suite=" << a.suite << "|caps=" << caps_blob(caps);
  return s.str();
}

void emit(const std::string& content, const std::string& out_prefix, const std::string& suffix) {
  if (out_prefix.empty()) {
    std::cout << content;
    if (!content.empty() && content.back() != '\n') std::cout << '\n';
  } else {
    qsr::write_text_file(out_prefix + suffix, content);
  }
}

json ensemble_to_json(const qsr::Ensemble& e) {
  json p = json::array(), signals = json::array();
  for (double w : e.p) p.push_back(w);
  for (const qsr::PureVector& s : e.signals) {
    json v = json::array();
    for (Eigen::Index i = 0; i < s.dim(); ++i)
      v.push_back(json::array({s.vector()(i).real(), s.vector()(i).imag()}));
    signals.push_back(std::move(v));
  }
  return json{{"dim", e.dim}, {"p", std::move(p)}, {"signals", std::move(signals)}};
}

// identity baseline code: one message, the full l-fold input space as the
// quantum payload, trivial encoder and decoder
qsr::CETCode baseline_code(Eigen::Index d, int l, const qsr::Caps& caps) {
  double dl = 1.0;
  for (int i = 0; i < l; ++i) dl *= static_cast<double>(d);
  caps.check_tensor_dim(static_cast<std::size_t>(dl), "baseline_code");
  const auto bigd = static_cast<Eigen::Index>(dl);
  qsr::CETCode code;
  code.m2 = bigd;
  code.n = l;
  code.encoders.push_back(qsr::Channel::identity(bigd));
  code.decoders.emplace_back(std::vector<qsr::Mat>{qsr::Mat::Identity(bigd, bigd)});
  return code;
}

int run_region(const CommonArgs& a, const qsr::Caps& caps) {
  const qsr::ChannelSpecFile spec = qsr::load_channel_spec(a.spec_path);
  const qsr::Rng rng(a.seed);
  const qsr::RateRegion region = qsr::inner_region(spec.channels, a.l, rng, caps);

  std::vector<std::vector<double>> rows;
  for (const qsr::FrontierPoint& f : region.frontier)
    rows.push_back({f.theta, f.r1, f.r2, static_cast<double>(f.certificate)});
  emit(qsr::csv_table({"theta", "r1", "r2", "certificate"}, rows), a.out_prefix, ".csv");

  std::vector<bool> used(region.certificates.size(), false);
  for (const qsr::FrontierPoint& f : region.frontier) used[static_cast<std::size_t>(f.certificate)] = true;
  for (const qsr::FrontierPoint& f : region.pareto) used[static_cast<std::size_t>(f.certificate)] = true;

  json doc = qsr::report_envelope(a.seed, config_blob("region", a, caps));
  doc["l"] = region.l;
  json pareto = json::array();
  for (const qsr::FrontierPoint& f : region.pareto)
    pareto.push_back(json{{"theta", f.theta}, {"r1", f.r1}, {"r2", f.r2}, {"certificate", f.certificate}});
  doc["pareto"] = std::move(pareto);
  json certs = json::array();
  for (const qsr::RegionCertificate& c : region.certificates) {
    if (!used[static_cast<std::size_t>(c.id)]) continue;
    certs.push_back(json{{"id", c.id},
                         {"theta", c.theta},
                         {"construction", c.construction},
                         {"r1", c.rect.r1},
                         {"r2", c.rect.r2},
                         {"ensemble", ensemble_to_json(c.ensemble)}});
  }
  doc["certificates"] = std::move(certs);
  emit(doc.dump(2) + "\n", a.out_prefix, ".json");
  return 0;
}

// ----- verify suites ----------------------------------------------------------

json suite_inequalities(const CommonArgs& a, std::size_t& violations, double& worst) {
  const qsr::Rng rng(a.seed);
  json details = json::array();
  for (const std::string& lemma : qsr::inequality_lemmas()) {
    const auto rep = qsr::run_inequality_trials(lemma, static_cast<std::size_t>(a.trials),
                                                rng.sub("verify/" + lemma));
    violations += rep.violations;
    worst = std::min(worst, rep.worst_slack);
    details.push_back(json{{"lemma", rep.lemma},
                           {"trials", rep.trials},
                           {"violations", rep.violations},
                           {"worst_slack", rep.worst_slack}});
  }
  return details;
}

json suite_design(const CommonArgs&, std::size_t& violations, double& worst) {
  json details = json::array();
  for (Eigen::Index d : {Eigen::Index{1}, Eigen::Index{2}}) {
    const auto rep = qsr::verify_design(qsr::make_design(d));
    if (!rep.is_two_design) ++violations;
    worst = std::min(worst, 1e-8 - std::max(rep.one_design_defect, rep.two_design_defect));
    details.push_back(json{{"dim", d},
                           {"cardinality", rep.cardinality},
                           {"one_design_defect", rep.one_design_defect},
                           {"two_design_defect", rep.two_design_defect},
                           {"is_two_design", rep.is_two_design}});
  }
  // negative control: {I, X} averages to the Haar one-fold twirl on nothing
  qsr::UnitaryDesign notdesign;
  notdesign.dim = 2;
  notdesign.unitaries = {qsr::Mat::Identity(2, 2), (qsr::Mat(2, 2) << 0, 1, 1, 0).finished()};
  const auto bad = qsr::verify_design(notdesign);
  if (bad.is_two_design) ++violations;
  details.push_back(json{{"dim", 2},
                         {"cardinality", bad.cardinality},
                         {"two_design_defect", bad.two_design_defect},
                         {"is_two_design", bad.is_two_design},
                         {"negative_control", true}});
  return details;
}

json suite_typicality(const CommonArgs& a, std::size_t& violations, double& worst) {
  const qsr::Rng rng(a.seed);
  json details = json::array();
  const int runs = std::max(1, a.trials / 10);
  for (int t = 0; t < runs; ++t) {
    qsr::Rng sub = rng.sub("verify/typicality", static_cast<std::uint64_t>(t));
    const Eigen::Index d = 2 + static_cast<Eigen::Index>(sub.integer(2));
    const int l = 2 + static_cast<int>(sub.integer(2));
    const double delta = 0.15 + 0.1 * static_cast<double>(sub.integer(4));
    const qsr::DensityOperator rho = qsr::random_density(sub, d);
    const auto tp = qsr::typical_projector(rho, delta, l);

    const qsr::Mat& q = tp.projector;
    const double herm = qsr::max_abs(q - qsr::Mat(q.adjoint()));
    const double idem = qsr::max_abs(q * q - q);
    qsr::Mat rl = rho.matrix();
    for (int i = 1; i < l; ++i) rl = qsr::kron(rl, rho.matrix()).eval();
    const double comm = qsr::max_abs(q * rl - rl * q);
    const double mass_bound = 1.0 - static_cast<double>(d) / (4.0 * l * delta * delta);
    const double mass_margin = tp.mass - mass_bound;

    // single-letter product construction collapses to the plain projector
    qsr::Word w{std::vector<int>(static_cast<std::size_t>(l), 0), 1};
    const qsr::Mat prod = qsr::typical_projector_product({rho}, w, delta);
    const double prod_diff = qsr::max_abs(prod - q);

    const double slack = std::min(mass_margin, 1e-9 - std::max({herm, idem, comm, prod_diff}));
    if (herm > 1e-9 || idem > 1e-9 || comm > 1e-9 || prod_diff > 1e-9 ||
        mass_margin < -qsr::tol::ineq_slack)
      ++violations;
    worst = std::min(worst, slack);
    details.push_back(json{{"d", d},
                           {"l", l},
                           {"delta", delta},
                           {"mass", tp.mass},
                           {"mass_bound", mass_bound},
                           {"projector_defect", std::max({herm, idem, comm})},
                           {"product_diff", prod_diff}});
  }
  return details;
}

json suite_robustification(const CommonArgs& a, std::size_t& violations, double& worst) {
  const qsr::Rng rng(a.seed);
  json details = json::array();
  const int runs = std::max(1, a.trials / 10);
  for (int t = 0; t < runs; ++t) {
    qsr::Rng sub = rng.sub("verify/robust", static_cast<std::uint64_t>(t));
    const int l = 2 + static_cast<int>(sub.integer(3));
    const int alphabet = 2 + static_cast<int>(sub.integer(2));
    const double gamma = 0.05 + 0.05 * static_cast<double>(sub.integer(4));
    auto total = static_cast<std::size_t>(std::pow(static_cast<double>(alphabet), l) + 0.5);
    // f >= 1 - gamma pointwise satisfies the hypothesis for every i.i.d. law
    std::vector<double> f(total);
    for (double& v : f) v = 1.0 - gamma + gamma * sub.uniform();
    const auto rep = qsr::robustlemma_check(f, l, alphabet, gamma);
    if (!rep.hypothesis_holds || !rep.conclusion_holds) ++violations;
    worst = std::min(worst, rep.conclusion_margin);
    details.push_back(json{{"l", l},
                           {"alphabet", alphabet},
                           {"gamma", gamma},
                           {"hypothesis_margin", rep.hypothesis_margin},
                           {"conclusion_margin", rep.conclusion_margin},
                           {"factor", rep.factor}});
  }
  return details;
}

json suite_chernoff(const CommonArgs& a, std::size_t& violations, double& worst) {
  const qsr::Rng rng(a.seed);
  json details = json::array();

  struct Setup {
    const char* name;
    std::function<qsr::Mat(qsr::Rng&)> sampler;
    int t;
    double a, m;
  };
  const std::vector<Setup> setups = {
      {"coin-flip",
       [](qsr::Rng& r) {
         const double b = r.uniform() < 0.3 ? 1.0 : 0.0;
         return qsr::Mat(b * qsr::Mat::Identity(2, 2));
       },
       40, 0.55, 0.3},
      {"random-projector",
       [](qsr::Rng& r) {
         const qsr::PureVector v = qsr::random_pure(r, 2);
         return qsr::Mat(v.projector());
       },
       30, 0.8, 0.5},
  };
  for (const Setup& s : setups) {
    const auto rep =
        qsr::matrix_chernoff_mc(s.sampler, s.t, s.a, s.m, a.trials, rng.sub(s.name));
    // the bound limits the true probability; the Wilson lower end must not clear it
    const double slack = rep.bound - rep.wilson_low;
    if (slack < 0.0) ++violations;
    if (rep.empirical_loewner > rep.empirical + 1e-12) ++violations;
    worst = std::min(worst, slack);
    details.push_back(json{{"setup", s.name},
                           {"t", s.t},
                           {"a", s.a},
                           {"m", s.m},
                           {"empirical", rep.empirical},
                           {"empirical_loewner", rep.empirical_loewner},
                           {"bound", rep.bound},
                           {"wilson_low", rep.wilson_low},
                           {"wilson_high", rep.wilson_high}});
  }
  return details;
}

int run_verify(const CommonArgs& a, const qsr::Caps& caps) {
  std::size_t violations = 0;
  double worst = std::numeric_limits<double>::infinity();
  json details;
  if (a.suite == "inequalities") details = suite_inequalities(a, violations, worst);
  else if (a.suite == "design") details = suite_design(a, violations, worst);
  else if (a.suite == "typicality") details = suite_typicality(a, violations, worst);
  else if (a.suite == "robustification") details = suite_robustification(a, violations, worst);
  else if (a.suite == "chernoff") details = suite_chernoff(a, violations, worst);
  else throw std::invalid_argument("unknown suite '" + a.suite + "'");

  json doc = qsr::report_envelope(a.seed, config_blob("verify", a, caps));
  doc["suite"] = a.suite;
  doc["trials"] = a.trials;
  doc["violations"] = violations;
  doc["worst_slack"] = worst;
  doc["details"] = std::move(details);
  emit(doc.dump(2) + "\n", a.out_prefix, ".json");
  return violations == 0 ? 0 : 1;
}

// ----- simulate -----------------------------------------------------------------

int run_simulate(const CommonArgs& a, const qsr::Caps& caps) {
  const qsr::ChannelSpecFile spec = qsr::load_channel_spec(a.spec_path);
  json doc = qsr::report_envelope(a.seed, config_blob("simulate", a, caps));
  doc["mode"] = a.mode;
  doc["l"] = a.l;

  if (a.mode == "compound") {
    const qsr::CETCode code = baseline_code(spec.dim_in, a.l, caps);
    json per = json::array();
    double worst = 1.0;
    for (std::size_t s = 0; s < spec.channels.size(); ++s) {
      const qsr::Channel nl = qsr::tensor_power(spec.channels[s], a.l, caps);
      const double perf = qsr::cet_average_performance(code, nl);
      worst = std::min(worst, perf);
      per.push_back(json{{"channel", spec.names[s]}, {"performance", perf}});
    }
    doc["per_channel"] = std::move(per);
    doc["worst"] = worst;
  } else if (a.mode == "avqc") {
    const qsr::AvqcSpec avqc{spec.channels, a.l};
    const qsr::CETCode code = baseline_code(spec.dim_in, a.l, caps);
    const qsr::WorstCase wc = qsr::worst_case_performance(code, avqc, caps);
    doc["worst"] = wc.value;
    json argmin = json::array();
    for (int s : wc.argmin.letters) argmin.push_back(spec.names[static_cast<std::size_t>(s)]);
    doc["argmin"] = std::move(argmin);
    const double count = std::pow(static_cast<double>(spec.channels.size()), a.l);
    if (count <= 256.0) {
      json table = json::array();
      qsr::Word w{std::vector<int>(static_cast<std::size_t>(a.l), 0),
                  static_cast<int>(spec.channels.size())};
      bool more = true;
      while (more) {
        const qsr::Channel nl = qsr::sequence_channel(avqc, w, caps);
        json names = json::array();
        for (int s : w.letters) names.push_back(spec.names[static_cast<std::size_t>(s)]);
        table.push_back(json{{"sequence", std::move(names)},
                             {"performance", qsr::cet_average_performance(code, nl)}});
        more = false;
        for (std::size_t i = w.letters.size(); i-- > 0;) {
          if (++w.letters[i] < w.alphabet) {
            more = true;
            break;
          }
          w.letters[i] = 0;
        }
      }
      doc["sequences"] = std::move(table);
    }
  } else if (a.mode == "jammer") {
    if (!spec.jammer_dim)
      throw std::invalid_argument("jammer mode requires 'jammer_dim' in the channel spec");
    const Eigen::Index dj = *spec.jammer_dim;
    if (dj < 1 || spec.dim_in % dj != 0)
      throw std::invalid_argument("jammer_dim must divide dim_in");
    const qsr::QuantumJammerChannel qj(spec.channels[0], spec.dim_in / dj, dj);
    const qsr::CETCode code = baseline_code(qj.da, a.l, caps);
    const qsr::JammerEffect eff = qsr::jammer_effect_operator(code, qj, a.l, caps);
    doc["worst_case"] = eff.worst_case;
    doc["psd_defect"] = eff.psd_defect;
    json spectrum = json::array();
    for (Eigen::Index i = 0; i < eff.spectrum.size(); ++i) spectrum.push_back(eff.spectrum(i));
    doc["spectrum"] = std::move(spectrum);

    // spot check: the affine effect-operator route against direct evaluation
    const qsr::Rng rng(a.seed);
    Eigen::Index djn = 1;
    for (int i = 0; i < a.l; ++i) djn *= dj;
    json table = json::array();
    double max_diff = 0.0;
    for (int t = 0; t < a.trials; ++t) {
      qsr::Rng sub = rng.sub("simulate/jammer", static_cast<std::uint64_t>(t));
      const qsr::DensityOperator sigma = qsr::random_density(sub, djn);
      const double affine = 1.0 - (eff.x * sigma.matrix()).trace().real();
      const qsr::Channel restricted = qsr::jammer_restricted_channel(qj, a.l, sigma, caps);
      const double direct = qsr::cet_average_performance(code, restricted);
      max_diff = std::max(max_diff, std::abs(affine - direct));
      table.push_back(json{{"affine", affine}, {"direct", direct}});
    }
    doc["spot_checks"] = std::move(table);
    doc["max_route_diff"] = max_diff;
  } else {
    throw std::invalid_argument("unknown mode '" + a.mode + "'");
  }
  emit(doc.dump(2) + "\n", a.out_prefix, ".json");
  return 0;
}

int run_symmetrize(const CommonArgs& a, const qsr::Caps& caps) {
  const qsr::ChannelSpecFile spec = qsr::load_channel_spec(a.spec_path);
  const qsr::AvqcSpec avqc{spec.channels, a.l};

  // default probe pair: the first two computational basis states, repeated l-fold
  const Eigen::Index d = spec.dim_in;
  if (d < 2) throw std::invalid_argument("symmetrize needs dim_in >= 2");
  std::vector<qsr::DensityOperator> states;
  for (Eigen::Index i = 0; i < 2; ++i) {
    qsr::Mat p = qsr::basis_vector(d, i) * qsr::basis_vector(d, i).adjoint();
    qsr::Mat pl = p;
    for (int j = 1; j < a.l; ++j) pl = qsr::kron(pl, p).eval();
    states.emplace_back(pl);
  }
  const qsr::SymmetrizabilityInstance inst{states, a.l};
  const qsr::SymmetrizabilityResult res = qsr::symmetrizability_lp(avqc, inst, caps);

  json doc = qsr::report_envelope(a.seed, config_blob("symmetrize", a, caps));
  doc["l"] = a.l;
  doc["feasible"] = res.feasible;
  doc["objective"] = res.objective;
  doc["exact"] = res.exact;
  doc["variables"] = res.variables;
  doc["rows"] = res.rows;
  if (res.feasible) {
    json maps = json::array();
    for (Eigen::Index i = 0; i < res.maps.rows(); ++i) {
      json row = json::array();
      for (Eigen::Index j = 0; j < res.maps.cols(); ++j) row.push_back(res.maps(i, j));
      maps.push_back(std::move(row));
    }
    doc["maps"] = std::move(maps);
  } else {
    json cert = json::array();
    for (Eigen::Index i = 0; i < res.certificate.size(); ++i) cert.push_back(res.certificate(i));
    doc["certificate"] = std::move(cert);
  }
  emit(doc.dump(2) + "\n", a.out_prefix, ".json");
  return 0;
}

int run_net(const CommonArgs& a, const qsr::Caps& caps) {
  const qsr::ChannelSpecFile spec = qsr::load_channel_spec(a.spec_path);
  const qsr::TauNet net = qsr::tau_net(spec.channels, a.tau);

  json doc = qsr::report_envelope(a.seed, config_blob("net", a, caps));
  doc["tau"] = a.tau;
  json selected = json::array();
  for (std::size_t i : net.selected) selected.push_back(spec.names[i]);
  doc["selected"] = std::move(selected);
  json assignment = json::array(), certified = json::array();
  for (std::size_t i = 0; i < net.assignment.size(); ++i) {
    assignment.push_back(spec.names[net.assignment[i]]);
    certified.push_back(net.certified_distance[i]);
  }
  doc["assignment"] = std::move(assignment);
  doc["certified_distance"] = std::move(certified);
  doc["log2_cardinality_ceiling"] = net.log2_cardinality_ceiling;

  json brackets = json::array();
  for (std::size_t i = 0; i < spec.channels.size(); ++i)
    for (std::size_t j = i + 1; j < spec.channels.size(); ++j) {
      const qsr::DistanceBracket b = qsr::diamond_distance_bracket(spec.channels[i], spec.channels[j]);
      brackets.push_back(json{{"a", spec.names[i]},
                              {"b", spec.names[j]},
                              {"lower", b.lower},
                              {"upper", b.upper}});
    }
  doc["pairwise_brackets"] = std::move(brackets);
  emit(doc.dump(2) + "\n", a.out_prefix, ".json");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"compound and adversarial quantum channel coding toolkit"};
  app.require_subcommand(1);

  CommonArgs a;

  CLI::App* region = app.add_subcommand("region", "inner rate region of a compound channel");
  region->add_option("--spec", a.spec_path, "channel spec JSON")->required();
  region->add_option("--l", a.l, "blocklength");
  region->add_option("--seed", a.seed, "PRNG seed");
  region->add_option("--out", a.out_prefix, "output path prefix");

  CLI::App* verify = app.add_subcommand("verify", "run a property suite");
  verify->add_option("suite", a.suite, "one of: inequalities design typicality robustification chernoff")
      ->required();
  verify->add_option("--trials", a.trials, "trial count");
  verify->add_option("--seed", a.seed, "PRNG seed");
  verify->add_option("--out", a.out_prefix, "output path prefix");

  CLI::App* simulate = app.add_subcommand("simulate", "evaluate a baseline code on a channel spec");
  simulate->add_option("--mode", a.mode, "compound | avqc | jammer")->required();
  simulate->add_option("--spec", a.spec_path, "channel spec JSON")->required();
  simulate->add_option("--l", a.l, "blocklength");
  simulate->add_option("--seed", a.seed, "PRNG seed");
  simulate->add_option("--trials", a.trials, "jammer spot-check count");
  simulate->add_option("--out", a.out_prefix, "output path prefix");

  CLI::App* symmetrize = app.add_subcommand("symmetrize", "symmetrizability LP on a channel spec");
  symmetrize->add_option("--spec", a.spec_path, "channel spec JSON")->required();
  symmetrize->add_option("--l", a.l, "sequence length");
  symmetrize->add_option("--seed", a.seed, "PRNG seed");
  symmetrize->add_option("--out", a.out_prefix, "output path prefix");

  CLI::App* net = app.add_subcommand("net", "tau-net selection over a channel spec");
  net->add_option("--spec", a.spec_path, "channel spec JSON")->required();
  net->add_option("--tau", a.tau, "net resolution")->required();
  net->add_option("--seed", a.seed, "PRNG seed");
  net->add_option("--out", a.out_prefix, "output path prefix");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const auto start = std::chrono::steady_clock::now();
  int rc = 0;
  try {
    const qsr::Caps caps = qsr::Caps::from_env();
    if (region->parsed()) rc = run_region(a, caps);
    else if (verify->parsed()) rc = run_verify(a, caps);
    else if (simulate->parsed()) rc = run_simulate(a, caps);
    else if (symmetrize->parsed()) rc = run_symmetrize(a, caps);
    else if (net->parsed()) rc = run_net(a, caps);
  } catch (const qsr::CapViolation& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const json::parse_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  const auto ms =
      std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start);
  std::cerr << "wall_ms=" << ms.count() << '\n';
  return rc;
}

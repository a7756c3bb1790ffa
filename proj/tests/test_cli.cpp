#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "qsr/channels.hpp"
#include "qsr/linalg.hpp"
#include "qsr/serialize.hpp"
#include "qsr/states.hpp"

namespace fs = std::filesystem;
using qsr::json;

namespace {

struct CliRun {
  int code = -1;
  std::string out;
  std::string err;
};

const fs::path& work_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "qsr_cli_tests";
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CliRun run_cli(const std::string& args, const std::string& env_prefix = "") {
  static int counter = 0;
  const fs::path out = work_dir() / ("stdout." + std::to_string(counter));
  const fs::path err = work_dir() / ("stderr." + std::to_string(counter));
  ++counter;
  std::string cmd;
  if (!env_prefix.empty()) cmd += env_prefix + " ";
  cmd += std::string(QSR_CLI_PATH) + " " + args + " >" + out.string() + " 2>" + err.string();
  const int raw = std::system(cmd.c_str());
  CliRun r;
  if (raw != -1 && WIFEXITED(raw)) r.code = WEXITSTATUS(raw);
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

fs::path write_spec(const std::string& file, const qsr::ChannelSpecFile& spec) {
  const fs::path p = work_dir() / file;
  qsr::write_text_file(p.string(), qsr::channel_spec_to_json(spec).dump(2) + "\n");
  return p;
}

fs::path spec_identity() {
  qsr::ChannelSpecFile spec;
  spec.dim_in = spec.dim_out = 2;
  spec.names = {"id"};
  spec.channels = {qsr::Channel::identity(2)};
  return write_spec("spec_id.json", spec);
}

fs::path spec_dephasing_pair() {
  qsr::ChannelSpecFile spec;
  spec.dim_in = spec.dim_out = 2;
  spec.names = {"id", "z"};
  spec.channels = {qsr::Channel::identity(2), qsr::Channel::z_dephasing(0.2)};
  return write_spec("spec_pair.json", spec);
}

fs::path spec_constant_pair() {
  qsr::ChannelSpecFile spec;
  spec.dim_in = spec.dim_out = 2;
  spec.names = {"c0", "c1"};
  const qsr::Vec e0 = qsr::basis_vector(2, 0), e1 = qsr::basis_vector(2, 1);
  spec.channels = {
      qsr::Channel::constant(qsr::DensityOperator(qsr::Mat(e0 * e0.adjoint())), 2),
      qsr::Channel::constant(qsr::DensityOperator(qsr::Mat(e1 * e1.adjoint())), 2)};
  return write_spec("spec_const.json", spec);
}

// jammer register controls a phase flip on the signal register
fs::path spec_jammer() {
  qsr::ChannelSpecFile spec;
  spec.dim_in = 4;
  spec.dim_out = 2;
  spec.jammer_dim = 2;
  spec.names = {"controlled-flip"};
  qsr::Mat z = qsr::Mat::Identity(2, 2);
  z(1, 1) = -1.0;
  const qsr::Vec e0 = qsr::basis_vector(2, 0), e1 = qsr::basis_vector(2, 1);
  std::vector<qsr::Mat> ks = {qsr::kron(qsr::Mat::Identity(2, 2), qsr::Mat(e0.adjoint())),
                              qsr::kron(z, qsr::Mat(e1.adjoint()))};
  spec.channels = {qsr::Channel(std::move(ks), 4, 2)};
  return write_spec("spec_jam.json", spec);
}

}  // namespace

TEST_CASE("region emits the qubit corner certificates", "[cli]") {
  const fs::path spec = spec_identity();
  const std::string prefix = (work_dir() / "region_a").string();
  const CliRun r = run_cli("region --spec " + spec.string() + " --l 1 --seed 5 --out " + prefix);
  REQUIRE(r.code == 0);

  const std::string csv = slurp(prefix + ".csv");
  CHECK(csv.rfind("theta,r1,r2,certificate", 0) == 0);

  const json doc = json::parse(slurp(prefix + ".json"));
  CHECK(doc.at("seed").get<std::uint64_t>() == 5);
  CHECK(doc.contains("config_hash"));
  CHECK(doc.contains("version"));
  bool classical_corner = false, quantum_corner = false;
  for (const json& pt : doc.at("pareto")) {
    const double r1 = pt.at("r1").get<double>(), r2 = pt.at("r2").get<double>();
    classical_corner |= std::abs(r1 - 1.0) < 1e-6 && std::abs(r2) < 1e-6;
    quantum_corner |= std::abs(r1) < 1e-6 && std::abs(r2 - 1.0) < 1e-6;
  }
  CHECK(classical_corner);
  CHECK(quantum_corner);
  // every certificate referenced by the pareto set is present in the document
  for (const json& pt : doc.at("pareto")) {
    const auto id = pt.at("certificate").get<Eigen::Index>();
    bool found = false;
    for (const json& c : doc.at("certificates")) found |= c.at("id").get<Eigen::Index>() == id;
    CHECK(found);
  }
}

TEST_CASE("region runs are byte-identical per seed", "[cli]") {
  const fs::path spec = spec_dephasing_pair();
  const std::string pa = (work_dir() / "det_a").string();
  const std::string pb = (work_dir() / "det_b").string();
  REQUIRE(run_cli("region --spec " + spec.string() + " --l 1 --seed 42 --out " + pa).code == 0);
  REQUIRE(run_cli("region --spec " + spec.string() + " --l 1 --seed 42 --out " + pb).code == 0);
  CHECK(slurp(pa + ".csv") == slurp(pb + ".csv"));
  CHECK(slurp(pa + ".json") == slurp(pb + ".json"));
  // a different seed still yields a valid document
  REQUIRE(run_cli("region --spec " + spec.string() + " --l 1 --seed 43 --out " + pb).code == 0);
  CHECK(json::parse(slurp(pb + ".json")).at("seed").get<std::uint64_t>() == 43);
}

TEST_CASE("malformed and missing specs exit with the input error code", "[cli]") {
  const fs::path bad = work_dir() / "broken.json";
  qsr::write_text_file(bad.string(), "{ this is not json\n");
  CliRun r = run_cli("region --spec " + bad.string());
  CHECK(r.code == 2);
  CHECK(r.err.find("error:") != std::string::npos);

  r = run_cli("region --spec " + (work_dir() / "does_not_exist.json").string());
  CHECK(r.code == 2);
}

TEST_CASE("argument errors exit with the usage code", "[cli]") {
  CHECK(run_cli("region").code == 2);                       // missing --spec
  CHECK(run_cli("frobnicate").code == 2);                   // unknown subcommand
  CHECK(run_cli("").code == 2);                             // missing subcommand
  const CliRun help = run_cli("--help");
  CHECK(help.code == 0);
  CHECK(help.out.find("region") != std::string::npos);
}

TEST_CASE("tensor caps stop oversized requests and honor the override", "[cli]") {
  const fs::path spec = spec_identity();
  // 2^9 = 512 exceeds the default tensor cap
  CliRun r = run_cli("region --spec " + spec.string() + " --l 9");
  CHECK(r.code == 3);
  CHECK(r.err.find("error:") != std::string::npos);
  // the same env knob can lower the ceiling below a small request
  r = run_cli("region --spec " + spec.string() + " --l 2",
              "QSR_CAP_OVERRIDE=tensor_dim=2");
  CHECK(r.code == 3);
  // junk override text is an input error
  r = run_cli("region --spec " + spec.string() + " --l 1",
              "QSR_CAP_OVERRIDE=tensor_dim=abc");
  CHECK(r.code == 2);
}

TEST_CASE("verify rejects unknown suites and passes the design suite", "[cli]") {
  CliRun r = run_cli("verify no-such-suite");
  CHECK(r.code == 2);
  CHECK(r.err.find("unknown suite") != std::string::npos);

  const std::string prefix = (work_dir() / "design").string();
  r = run_cli("verify design --seed 3 --out " + prefix);
  REQUIRE(r.code == 0);
  const json doc = json::parse(slurp(prefix + ".json"));
  CHECK(doc.at("violations").get<std::size_t>() == 0);
  REQUIRE(doc.at("details").size() == 3);
  const json& control = doc.at("details").back();
  CHECK(control.at("negative_control").get<bool>());
  CHECK_FALSE(control.at("is_two_design").get<bool>());
}

TEST_CASE("verify inequalities holds at a small trial count", "[cli]") {
  const CliRun r = run_cli("verify inequalities --trials 50 --seed 2");
  REQUIRE(r.code == 0);
  const json doc = json::parse(r.out);
  CHECK(doc.at("violations").get<std::size_t>() == 0);
  CHECK(doc.at("details").size() == 6);
}

TEST_CASE("simulate compound reports perfect transmission through the identity", "[cli]") {
  const fs::path spec = spec_identity();
  const CliRun r = run_cli("simulate --mode compound --spec " + spec.string() + " --l 2");
  REQUIRE(r.code == 0);
  const json doc = json::parse(r.out);
  CHECK(std::abs(doc.at("worst").get<double>() - 1.0) < 1e-12);
  CHECK(doc.at("per_channel").size() == 1);
}

TEST_CASE("simulate avqc pins the worst sequence and is deterministic", "[cli]") {
  const fs::path spec = spec_dephasing_pair();
  const std::string pa = (work_dir() / "avqc_a").string();
  const std::string pb = (work_dir() / "avqc_b").string();
  REQUIRE(run_cli("simulate --mode avqc --spec " + spec.string() + " --l 2 --seed 9 --out " + pa)
              .code == 0);
  REQUIRE(run_cli("simulate --mode avqc --spec " + spec.string() + " --l 2 --seed 9 --out " + pb)
              .code == 0);
  CHECK(slurp(pa + ".json") == slurp(pb + ".json"));

  const json doc = json::parse(slurp(pa + ".json"));
  const json argmin = doc.at("argmin");
  REQUIRE(argmin.size() == 2);
  CHECK(argmin[0].get<std::string>() == "z");
  CHECK(argmin[1].get<std::string>() == "z");
  CHECK(doc.at("sequences").size() == 4);
  for (const json& row : doc.at("sequences"))
    CHECK(row.at("performance").get<double>() >= doc.at("worst").get<double>() - 1e-12);
}

TEST_CASE("simulate jammer agrees between affine and direct routes", "[cli]") {
  const fs::path spec = spec_jammer();
  const CliRun r =
      run_cli("simulate --mode jammer --spec " + spec.string() + " --l 1 --trials 5 --seed 3");
  REQUIRE(r.code == 0);
  const json doc = json::parse(r.out);
  CHECK(doc.at("max_route_diff").get<double>() < 1e-9);
  CHECK(doc.at("psd_defect").get<double>() < 1e-9);
  const double worst = doc.at("worst_case").get<double>();
  CHECK(worst >= -1e-9);
  for (const json& row : doc.at("spot_checks"))
    CHECK(row.at("affine").get<double>() >= worst - 1e-9);

  // the same spec without a jammer marker is rejected
  const CliRun bad =
      run_cli("simulate --mode jammer --spec " + spec_identity().string() + " --l 1");
  CHECK(bad.code == 2);
  const CliRun worse = run_cli("simulate --mode nonsense --spec " + spec_identity().string());
  CHECK(worse.code == 2);
}

TEST_CASE("symmetrize separates constant pairs from the identity", "[cli]") {
  CliRun r = run_cli("symmetrize --spec " + spec_constant_pair().string());
  REQUIRE(r.code == 0);
  json doc = json::parse(r.out);
  REQUIRE(doc.at("feasible").get<bool>());
  for (const json& row : doc.at("maps")) {
    double total = 0.0;
    for (const json& v : row) total += v.get<double>();
    CHECK(std::abs(total - 1.0) < 1e-8);
  }

  r = run_cli("symmetrize --spec " + spec_identity().string());
  REQUIRE(r.code == 0);
  doc = json::parse(r.out);
  CHECK_FALSE(doc.at("feasible").get<bool>());
  CHECK(doc.at("certificate").size() > 0);
}

TEST_CASE("net selects a cover and reports sound brackets", "[cli]") {
  const fs::path spec = spec_dephasing_pair();
  CliRun r = run_cli("net --spec " + spec.string() + " --tau 0.5");
  REQUIRE(r.code == 0);
  json doc = json::parse(r.out);
  CHECK(doc.at("selected").size() == 1);
  CHECK(doc.at("assignment")[1].get<std::string>() == "id");
  CHECK(std::abs(doc.at("certified_distance")[1].get<double>() - 0.8) < 1e-9);

  r = run_cli("net --spec " + spec.string() + " --tau 0.05");
  REQUIRE(r.code == 0);
  doc = json::parse(r.out);
  CHECK(doc.at("selected").size() == 2);
  REQUIRE(doc.at("pairwise_brackets").size() == 1);
  const json& b = doc.at("pairwise_brackets")[0];
  CHECK(b.at("lower").get<double>() <= b.at("upper").get<double>() + 1e-12);
}

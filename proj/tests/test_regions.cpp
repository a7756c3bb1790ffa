#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "qsr/entropy.hpp"
#include "qsr/random_sampling.hpp"
#include "qsr/regions.hpp"

using namespace qsr;

namespace {

Ensemble entangled_ensemble(Eigen::Index d) {
  Ensemble e;
  e.dim = d;
  Vec v = Vec::Zero(d * d);
  for (Eigen::Index i = 0; i < d; ++i) v(i * d + i) = 1.0 / std::sqrt(static_cast<double>(d));
  e.p = {1.0};
  e.signals.emplace_back(v);
  return e;
}

Ensemble basis_ensemble(Eigen::Index d) {
  Ensemble e;
  e.dim = d;
  for (Eigen::Index x = 0; x < d; ++x) {
    e.p.push_back(1.0 / static_cast<double>(d));
    e.signals.emplace_back(Vec(kron(basis_vector(d, x), basis_vector(d, x))));
  }
  return e;
}

Ensemble product_ensemble(const Ensemble& a, const Ensemble& b) {
  Ensemble e;
  e.dim = a.dim * b.dim;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) {
      e.p.push_back(a.p[i] * b.p[j]);
      // interleave reference/input factors so the result lives on (A'A)(x)(A'A)
      Vec v = kron(a.signals[i].vector(), b.signals[j].vector());
      std::vector<Eigen::Index> dims{a.dim, a.dim, b.dim, b.dim};
      e.signals.emplace_back(permute_factors(v, dims, {0, 2, 1, 3}));
    }
  return e;
}

bool frontier_contains(const RateRegion& region, double r1, double r2, double tolerance) {
  for (const auto& f : region.frontier)
    if (std::abs(f.r1 - r1) < tolerance && std::abs(f.r2 - r2) < tolerance) return true;
  return false;
}

}  // namespace

TEST_CASE("rate rectangle corners for the identity qubit", "[regions]") {
  const std::vector<Channel> id{Channel::identity(2)};
  const RateRectangle ent = compound_rectangle(id, entangled_ensemble(2));
  CHECK(std::abs(ent.r1 - 0.0) < 1e-10);
  CHECK(std::abs(ent.r2 - 1.0) < 1e-10);
  const RateRectangle bas = compound_rectangle(id, basis_ensemble(2));
  CHECK(std::abs(bas.r1 - 1.0) < 1e-10);
  CHECK(std::abs(bas.r2 - 0.0) < 1e-10);
}

TEST_CASE("compound rectangle is the componentwise minimum", "[regions]") {
  const std::vector<Channel> pair{Channel::identity(2), Channel::z_dephasing(0.2)};
  const RateRectangle rect = compound_rectangle(pair, entangled_ensemble(2));
  CHECK(std::abs(rect.r1 - 0.0) < 1e-8);
  CHECK(std::abs(rect.r2 - (1.0 - binary_entropy(0.2))) < 1e-8);
  // single members dominate the intersection
  const RateRectangle only_z =
      compound_rectangle({Channel::z_dephasing(0.2)}, entangled_ensemble(2));
  CHECK(rect.r2 <= only_z.r2 + 1e-12);
}

TEST_CASE("negative coherent information clamps to zero", "[regions]") {
  const std::vector<Channel> noisy{Channel::depolarizing(2, 0.9)};
  const RateRectangle rect = compound_rectangle(noisy, entangled_ensemble(2));
  CHECK(rect.r2 == 0.0);
  CHECK(rect.r1 >= 0.0);
}

TEST_CASE("inner region finds the identity-qubit corners", "[regions]") {
  const std::vector<Channel> id{Channel::identity(2)};
  const RateRegion region = inner_region(id, 1, Rng(7));
  CHECK(frontier_contains(region, 1.0, 0.0, 1e-6));
  CHECK(frontier_contains(region, 0.0, 1.0, 1e-6));
}

TEST_CASE("inner region is deterministic in the seed", "[regions]") {
  const std::vector<Channel> pair{Channel::identity(2), Channel::z_dephasing(0.3)};
  const RateRegion a = inner_region(pair, 1, Rng(99), {}, 4);
  const RateRegion b = inner_region(pair, 1, Rng(99), {}, 4);
  REQUIRE(a.frontier.size() == b.frontier.size());
  for (std::size_t i = 0; i < a.frontier.size(); ++i) {
    CHECK(a.frontier[i].r1 == b.frontier[i].r1);
    CHECK(a.frontier[i].r2 == b.frontier[i].r2);
    CHECK(a.frontier[i].certificate == b.frontier[i].certificate);
  }
}

TEST_CASE("certificates re-evaluate to their frontier points", "[regions]") {
  const std::vector<Channel> pair{Channel::identity(2), Channel::z_dephasing(0.3)};
  const RateRegion region = inner_region(pair, 1, Rng(13), {}, 4);
  for (const auto& f : region.frontier) {
    const auto& cert = region.certificates[static_cast<std::size_t>(f.certificate)];
    const RateRectangle rect = evaluate_certificate(pair, region.l, cert);
    CHECK(std::abs(rect.r1 / region.l - f.r1) < 1e-9);
    CHECK(std::abs(rect.r2 / region.l - f.r2) < 1e-9);
  }
}

TEST_CASE("product ensembles scale additively across blocklengths", "[regions]") {
  const std::vector<Channel> chans{Channel::z_dephasing(0.15)};
  std::vector<Channel> lifted;
  for (const Channel& ch : chans) lifted.push_back(tensor_power(ch, 2));
  for (const Ensemble& e : {entangled_ensemble(2), basis_ensemble(2)}) {
    const RateRectangle r1 = compound_rectangle(chans, e);
    const RateRectangle r2 = compound_rectangle(lifted, product_ensemble(e, e));
    CHECK(std::abs(r2.r1 / 2.0 - r1.r1) < 1e-8);
    CHECK(std::abs(r2.r2 / 2.0 - r1.r2) < 1e-8);
  }
}

TEST_CASE("pareto points are mutually non-dominated", "[regions]") {
  const std::vector<Channel> pair{Channel::identity(2), Channel::z_dephasing(0.3)};
  const RateRegion region = inner_region(pair, 1, Rng(55), {}, 4);
  for (std::size_t i = 0; i < region.pareto.size(); ++i)
    for (std::size_t j = 0; j < region.pareto.size(); ++j) {
      if (i == j) continue;
      const bool dominates = region.pareto[i].r1 >= region.pareto[j].r1 + 1e-12 &&
                             region.pareto[i].r2 >= region.pareto[j].r2 + 1e-12;
      CHECK_FALSE(dominates);
    }
}

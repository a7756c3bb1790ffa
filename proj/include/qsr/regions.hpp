#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "qsr/channels.hpp"
#include "qsr/config.hpp"
#include "qsr/entropy.hpp"
#include "qsr/random_sampling.hpp"
#include "qsr/rng.hpp"
#include "qsr/states.hpp"

namespace qsr {

// Classical-quantum signal ensemble: p(x) and bipartite pure signals on
// ref (x) input, the channel acting on the second factor.
struct Ensemble {
  std::vector<double> p;
  std::vector<PureVector> signals;
  Eigen::Index dim = 0;  // channel input dimension; signals live on dim*dim

  std::size_t size() const { return p.size(); }

  void validate() const {
    if (p.empty() || p.size() != signals.size())
      throw std::invalid_argument("Ensemble: size mismatch");
    double total = 0.0;
    for (double w : p) {
      if (w < -1e-12) throw std::invalid_argument("Ensemble: negative probability");
      total += w;
    }
    if (std::abs(total - 1.0) > 1e-9)
      throw std::invalid_argument("Ensemble: probabilities must sum to 1");
    for (const auto& s : signals)
      if (s.dim() != dim * dim)
        throw std::invalid_argument("Ensemble: signal dimension must be dim^2");
  }
};

struct RateRectangle {
  double r1 = 0.0;  // classical rate bound
  double r2 = 0.0;  // entanglement rate bound
};

// omega(M, p, Psi) = sum_x p(x) |x><x| (x) (id (x) M)(Psi_x) on X (x) A (x) B.
inline DensityOperator evaluation_state(const Channel& ch, const Ensemble& e) {
  e.validate();
  const Eigen::Index nx = static_cast<Eigen::Index>(e.size());
  const Eigen::Index da = e.dim, db = ch.dim_out();
  Mat omega = Mat::Zero(nx * da * db, nx * da * db);
  const SubChannel idm = tensor(SubChannel({Mat::Identity(da, da)}, da, da), SubChannel(ch));
  for (Eigen::Index x = 0; x < nx; ++x) {
    const Mat block = idm.apply(e.signals[x].projector());
    omega.block(x * da * db, x * da * db, da * db, da * db) = e.p[x] * block;
  }
  return DensityOperator(omega);
}

// Rate rectangle of one channel: r1 = I(X;B, omega), r2 = I(A>BX, omega)
// = sum_x p(x) I(A>B, block_x), both clamped at zero.
inline RateRectangle rate_rectangle(const Channel& ch, const Ensemble& e) {
  e.validate();
  const Eigen::Index da = e.dim, db = ch.dim_out();
  const SubChannel idm = tensor(SubChannel({Mat::Identity(da, da)}, da, da), SubChannel(ch));
  double r2 = 0.0;
  Mat avg_b = Mat::Zero(db, db);
  double holevo_cond = 0.0;  // sum_x p(x) S(block_x^B)
  for (std::size_t x = 0; x < e.size(); ++x) {
    if (e.p[x] <= 0.0) continue;
    const Mat block = idm.apply(e.signals[x].projector());
    const Mat block_b = partial_trace(block, {da, db}, {1});
    r2 += e.p[x] * (entropy(block_b) - entropy(block));
    avg_b += e.p[x] * block_b;
    holevo_cond += e.p[x] * entropy(block_b);
  }
  const double r1 = entropy(avg_b) - holevo_cond;  // = I(X;B) for cq states
  return {std::max(0.0, r1), std::max(0.0, r2)};
}

// Componentwise minimum over the compound set.
inline RateRectangle compound_rectangle(const std::vector<Channel>& channels, const Ensemble& e) {
  if (channels.empty()) throw std::invalid_argument("compound_rectangle: empty channel set");
  RateRectangle rect{std::numeric_limits<double>::infinity(),
                     std::numeric_limits<double>::infinity()};
  for (const Channel& ch : channels) {
    const RateRectangle r = rate_rectangle(ch, e);
    rect.r1 = std::min(rect.r1, r.r1);
    rect.r2 = std::min(rect.r2, r.r2);
  }
  return rect;
}

// ----- finite-blocklength inner region ---------------------------------------

struct RegionCertificate {
  int id = 0;
  double theta = 0.0;
  std::string construction;  // candidate family tag
  Ensemble ensemble;         // on the l-fold input
  RateRectangle rect;        // compound rectangle (unscaled, per l uses)
};

struct FrontierPoint {
  double theta = 0.0;
  double r1 = 0.0;  // per channel use (scaled by 1/l)
  double r2 = 0.0;
  int certificate = 0;
};

struct RateRegion {
  int l = 1;
  std::vector<FrontierPoint> frontier;          // theta-sweep results
  std::vector<FrontierPoint> pareto;            // non-dominated corners, r1 ascending
  std::vector<RegionCertificate> certificates;  // indexed by certificate id
};

namespace detail {

// Maximally entangled purification of the maximally mixed state on g,
// as a vector on ambient (x) ambient.
inline PureVector entangled_signal(const Subspace& g) {
  const Eigen::Index d = g.ambient();
  Vec v = Vec::Zero(d * d);
  for (Eigen::Index i = 0; i < g.dim(); ++i)
    v += kron(Vec(g.basis().col(i)), Vec(g.basis().col(i)));
  return PureVector(v / v.norm());
}

inline double objective(double theta, const RateRectangle& r) {
  return theta * r.r1 + (1.0 - theta) * r.r2;
}

// structured candidates: computational-basis block partitions and basis signals
inline std::vector<std::pair<std::string, Ensemble>> structured_candidates(Eigen::Index bigd) {
  std::vector<std::pair<std::string, Ensemble>> out;
  for (Eigen::Index parts = 1; parts <= bigd; parts *= 2) {
    if (bigd % parts != 0) break;
    const Eigen::Index block = bigd / parts;
    Ensemble e;
    e.dim = bigd;
    for (Eigen::Index x = 0; x < parts; ++x) {
      e.p.push_back(1.0 / static_cast<double>(parts));
      e.signals.push_back(entangled_signal(Subspace::computational(bigd, x * block, block)));
    }
    out.emplace_back("blocks-" + std::to_string(parts), std::move(e));
  }
  {
    Ensemble e;
    e.dim = bigd;
    for (Eigen::Index x = 0; x < bigd; ++x) {
      e.p.push_back(1.0 / static_cast<double>(bigd));
      e.signals.push_back(PureVector(kron(basis_vector(bigd, x), basis_vector(bigd, x))));
    }
    out.emplace_back("basis", std::move(e));
  }
  return out;
}

// p-polish for two-element ensembles: deterministic golden-section style scan
inline Ensemble polish_weights(const std::vector<Channel>& chans, const Ensemble& e, double theta) {
  if (e.size() != 2) return e;
  Ensemble best = e;
  double best_val = objective(theta, compound_rectangle(chans, e));
  for (int i = 1; i < 20; ++i) {
    Ensemble trial = e;
    trial.p = {i / 20.0, 1.0 - i / 20.0};
    const double v = objective(theta, compound_rectangle(chans, trial));
    if (v > best_val + 1e-12) {
      best_val = v;
      best = trial;
    }
  }
  return best;
}

}  // namespace detail

// Theorem-1-style inner region at fixed blocklength l: the union over
// candidate ensembles of the compound rectangle of {N_s^{(x) l}}, scaled by
// 1/l.  The candidate set mixes structured block/basis ensembles with seeded
// random restarts; every frontier point carries a certificate ensemble whose
// re-evaluation reproduces it.
inline RateRegion inner_region(const std::vector<Channel>& channels, int l, const Rng& rng,
                               const Caps& caps = {}, int restarts = 16) {
  if (channels.empty()) throw std::invalid_argument("inner_region: empty channel set");
  const Eigen::Index d = channels[0].dim_in();
  double dl = 1.0;
  for (int i = 0; i < l; ++i) dl *= static_cast<double>(d);
  caps.check_tensor_dim(static_cast<std::size_t>(dl * dl), "inner_region");
  const Eigen::Index bigd = static_cast<Eigen::Index>(dl);

  std::vector<Channel> lifted;
  for (const Channel& ch : channels) lifted.push_back(tensor_power(ch, l, caps));

  RateRegion region;
  region.l = l;

  // Candidate pool.  The inner region is the union of all candidate
  // rectangles; the theta sweep and the Pareto corners are summaries of the
  // same pool, so every reported point has a certificate in it.
  std::vector<RegionCertificate> pool;
  auto add = [&](double theta, const std::string& tag, Ensemble e) {
    RegionCertificate cert;
    cert.id = static_cast<int>(pool.size());
    cert.theta = theta;
    cert.construction = tag;
    cert.rect = compound_rectangle(lifted, e);
    cert.ensemble = std::move(e);
    pool.push_back(std::move(cert));
  };
  for (const auto& [tag, e] : detail::structured_candidates(bigd)) add(-1.0, tag, e);
  const std::size_t structured_count = pool.size();
  for (int ti = 0; ti <= 10; ++ti) {
    const double theta = ti / 10.0;
    for (std::size_t s = 0; s < structured_count; ++s) {
      Ensemble polished = detail::polish_weights(lifted, pool[s].ensemble, theta);
      if (polished.p != pool[s].ensemble.p)
        add(theta, pool[s].construction + "-polished", std::move(polished));
    }
    for (int r = 0; r < restarts; ++r) {
      Rng sub = rng.sub("regions/theta" + std::to_string(ti), r);
      Ensemble e;
      e.dim = bigd;
      const int nx = 1 + static_cast<int>(sub.integer(2));
      for (int x = 0; x < nx; ++x) e.signals.push_back(random_pure(sub, bigd * bigd));
      e.p = random_simplex_point(sub, static_cast<std::size_t>(nx));
      add(theta, "random-" + std::to_string(r), detail::polish_weights(lifted, e, theta));
    }
  }

  const double inv_l = 1.0 / static_cast<double>(l);
  for (int ti = 0; ti <= 10; ++ti) {
    const double theta = ti / 10.0;
    int best = 0;
    double best_val = -1.0;
    for (const auto& cert : pool) {
      const double val = detail::objective(theta, cert.rect);
      if (val > best_val + 1e-12) {
        best_val = val;
        best = cert.id;
      }
    }
    region.frontier.push_back(
        {theta, pool[best].rect.r1 * inv_l, pool[best].rect.r2 * inv_l, best});
  }

  // Pareto corners over the whole pool, r1 ascending, 1e-4 dedup grid.
  std::vector<FrontierPoint> pts;
  for (const auto& cert : pool)
    pts.push_back({-1.0, cert.rect.r1 * inv_l, cert.rect.r2 * inv_l, cert.id});
  std::sort(pts.begin(), pts.end(), [](const FrontierPoint& a, const FrontierPoint& b) {
    return a.r1 < b.r1 || (a.r1 == b.r1 && a.r2 > b.r2);
  });
  for (const auto& p : pts) {
    bool dominated = false;
    for (const auto& q : pts) {
      const bool geq = q.r1 >= p.r1 - 1e-12 && q.r2 >= p.r2 - 1e-12;
      const bool strict = q.r1 > p.r1 + 1e-12 || q.r2 > p.r2 + 1e-12;
      if (geq && strict) dominated = true;
    }
    if (dominated) continue;
    if (!region.pareto.empty() && std::abs(region.pareto.back().r1 - p.r1) < 1e-4 &&
        std::abs(region.pareto.back().r2 - p.r2) < 1e-4)
      continue;
    region.pareto.push_back(p);
  }
  region.certificates = std::move(pool);
  return region;
}

// Re-evaluate a certificate; used by tests and by the CLI to print verified rows.
inline RateRectangle evaluate_certificate(const std::vector<Channel>& channels, int l,
                                          const RegionCertificate& cert, const Caps& caps = {}) {
  std::vector<Channel> lifted;
  for (const Channel& ch : channels) lifted.push_back(tensor_power(ch, l, caps));
  return compound_rectangle(lifted, cert.ensemble);
}

}  // namespace qsr

#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "qsr/channels.hpp"
#include "qsr/config.hpp"
#include "qsr/linalg.hpp"
#include "qsr/random_sampling.hpp"
#include "qsr/rng.hpp"

namespace qsr {

struct DistanceBracket {
  double lower = 0.0;
  double upper = 0.0;
};

// unnormalized Choi matrix sum_ij |i><j| (x) N(|i><j|)
inline Mat choi_matrix(const SubChannel& ch) {
  const Eigen::Index d = ch.dim_in();
  Mat out = Mat::Zero(d * ch.dim_out(), d * ch.dim_out());
  for (const Mat& k : ch.kraus()) {
    Vec vk = Vec::Zero(d * ch.dim_out());
    for (Eigen::Index i = 0; i < d; ++i) vk.segment(i * ch.dim_out(), ch.dim_out()) = k.col(i);
    out += vk * vk.adjoint();
  }
  return out;
}

namespace detail {

// Hilbert-Schmidt adjoint of id_{d} (x) (A-side minus B-side), applied to p
inline Mat lifted_adjoint_difference(const Mat& p, const SubChannel& n1, const SubChannel& n2,
                                     Eigen::Index dref) {
  Mat out = Mat::Zero(dref * n1.dim_in(), dref * n1.dim_in());
  const Mat id = Mat::Identity(dref, dref);
  for (const Mat& k : n1.kraus()) {
    const Mat lk = kron(id, k);
    out += lk.adjoint() * p * lk;
  }
  for (const Mat& k : n2.kraus()) {
    const Mat lk = kron(id, k);
    out -= lk.adjoint() * p * lk;
  }
  return out;
}

inline Mat lifted_difference(const Mat& rho, const SubChannel& n1, const SubChannel& n2,
                             Eigen::Index dref) {
  Mat out = Mat::Zero(dref * n1.dim_out(), dref * n1.dim_out());
  const Mat id = Mat::Identity(dref, dref);
  for (const Mat& k : n1.kraus()) {
    const Mat lk = kron(id, k);
    out += lk * rho * lk.adjoint();
  }
  for (const Mat& k : n2.kraus()) {
    const Mat lk = kron(id, k);
    out -= lk * rho * lk.adjoint();
  }
  return out;
}

}  // namespace detail

// Two-sided diamond-distance estimate from the Choi difference:
//   ||J||_1 / d_in  <=  ||N1 - N2||_diamond  <=  ||J||_1.
// The lower end additionally runs an alternating ascent of
// || (id (x) (N1 - N2))(psi psi*) ||_1 over pure inputs with an ancilla of
// size d_in (which suffices for the diamond norm); each iterate is a valid
// input state, so the larger of the two lower bounds stays certified.
inline DistanceBracket diamond_distance_bracket(const Channel& n1, const Channel& n2,
                                                int restarts = 20, int max_iters = 200) {
  if (n1.dim_in() != n2.dim_in() || n1.dim_out() != n2.dim_out())
    throw std::invalid_argument("diamond_distance_bracket: dimension mismatch");
  const Eigen::Index d = n1.dim_in();

  const Mat jdiff = choi_matrix(n1) - choi_matrix(n2);
  const double choi_norm = trace_norm_herm(herm(jdiff));

  DistanceBracket bracket;
  bracket.upper = choi_norm;
  bracket.lower = choi_norm / static_cast<double>(d);

  Rng rng(0x9d2c5680u);
  for (int r = 0; r < restarts; ++r) {
    Vec psi = random_pure(rng, d * d).vector();
    double value = 0.0;
    for (int it = 0; it < max_iters; ++it) {
      const Mat m = detail::lifted_difference(psi * psi.adjoint(), n1, n2, d);
      const Eigh e = eigh(herm(m));
      double tn = 0.0;
      Mat sign = Mat::Zero(m.rows(), m.cols());
      for (Eigen::Index i = 0; i < e.values.size(); ++i) {
        tn += std::abs(e.values(i));
        sign += (e.values(i) >= 0 ? 1.0 : -1.0) * e.vectors.col(i) * e.vectors.col(i).adjoint();
      }
      if (tn <= value + 1e-12) {
        value = std::max(value, tn);
        break;
      }
      value = tn;
      const Mat grad = detail::lifted_adjoint_difference(sign, n1, n2, d);
      const Eigh g = eigh(herm(grad));
      psi = g.vectors.col(g.values.size() - 1);
    }
    bracket.lower = std::max(bracket.lower, value);
  }
  bracket.lower = std::min(bracket.lower, bracket.upper);
  return bracket;
}

struct TauNet {
  std::vector<std::size_t> selected;       // indices into the input list
  std::vector<std::size_t> assignment;     // covering member per input channel
  std::vector<double> certified_distance;  // upper bound to the covering member
  double log2_cardinality_ceiling = 0.0;   // log2 of (6/tau)^{2 (d d')^2}
};

// Greedy 2 tau cover of a finite channel family by its own members.  Every
// coverage decision uses the upper end of the distance bracket, so the
// certificates are sound regardless of how loose the lower bound is.
inline TauNet tau_net(const std::vector<Channel>& channels, double tau) {
  if (tau <= 0.0) throw std::invalid_argument("tau_net: tau must be positive");
  TauNet net;
  if (channels.empty()) return net;
  const double dd = static_cast<double>(channels[0].dim_in()) *
                    static_cast<double>(channels[0].dim_out());
  net.log2_cardinality_ceiling = 2.0 * dd * dd * std::log2(6.0 / tau);
  net.assignment.resize(channels.size());
  net.certified_distance.resize(channels.size());

  for (std::size_t i = 0; i < channels.size(); ++i) {
    bool covered = false;
    for (std::size_t s : net.selected) {
      const Mat jdiff = choi_matrix(channels[i]) - choi_matrix(channels[s]);
      const double upper = trace_norm_herm(herm(jdiff));
      if (upper <= 2.0 * tau) {
        net.assignment[i] = s;
        net.certified_distance[i] = upper;
        covered = true;
        break;
      }
    }
    if (!covered) {
      net.selected.push_back(i);
      net.assignment[i] = i;
      net.certified_distance[i] = 0.0;
    }
  }
  return net;
}

}  // namespace qsr

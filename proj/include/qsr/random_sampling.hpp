#pragma once

#include <stdexcept>
#include <vector>

#include "qsr/channels.hpp"
#include "qsr/entropy.hpp"
#include "qsr/linalg.hpp"
#include "qsr/rng.hpp"
#include "qsr/states.hpp"

namespace qsr {

inline Mat ginibre(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  Mat g(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) g(i, j) = cx(rng.gauss(), rng.gauss());
  return g;
}

// Haar unitary via QR of a Ginibre matrix with the R-diagonal phase fix.
inline Mat haar_unitary(Rng& rng, Eigen::Index d) {
  const Mat g = ginibre(rng, d, d);
  Eigen::HouseholderQR<Mat> qr(g);
  Mat q = qr.householderQ();
  const Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < d; ++i) {
    const cx rii = r(i, i);
    q.col(i) *= (std::abs(rii) > 0.0) ? rii / std::abs(rii) : cx(1.0);
  }
  return q;
}

// Haar isometry: first cols columns of a Haar unitary on C^rows.
inline Mat haar_isometry(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  return haar_unitary(rng, rows).leftCols(cols);
}

inline PureVector random_pure(Rng& rng, Eigen::Index d) {
  Vec v(d);
  for (Eigen::Index i = 0; i < d; ++i) v(i) = cx(rng.gauss(), rng.gauss());
  return PureVector(v / v.norm());
}

// Hilbert-Schmidt measure when rank == d (partial trace of a bipartite pure state).
inline DensityOperator random_density(Rng& rng, Eigen::Index d, Eigen::Index rank = 0) {
  if (rank <= 0) rank = d;
  const Mat g = ginibre(rng, d, rank);
  Mat m = g * g.adjoint();
  m /= m.trace().real();
  return DensityOperator(herm(m));
}

// Random channel from a Haar Stinespring isometry with kraus_count environment levels.
inline Channel random_channel(Rng& rng, Eigen::Index dim_in, Eigen::Index dim_out,
                              Eigen::Index kraus_count) {
  if (dim_out * kraus_count < dim_in)
    throw std::invalid_argument("random_channel: need dim_out * kraus_count >= dim_in");
  const Mat v = haar_isometry(rng, dim_out * kraus_count, dim_in);
  std::vector<Mat> ks;
  for (Eigen::Index e = 0; e < kraus_count; ++e) {
    Mat k(dim_out, dim_in);
    for (Eigen::Index b = 0; b < dim_out; ++b) k.row(b) = v.row(b * kraus_count + e);
    ks.push_back(std::move(k));
  }
  return Channel(std::move(ks), dim_in, dim_out);
}

// Random POVM: normalize random PSD pieces through the square root of their sum.
inline Povm random_povm(Rng& rng, Eigen::Index d, std::size_t outcomes) {
  std::vector<Mat> gs;
  Mat s = Mat::Zero(d, d);
  for (std::size_t i = 0; i < outcomes; ++i) {
    const Mat g = ginibre(rng, d, d);
    gs.push_back(herm(g * g.adjoint()));
    s += gs.back();
  }
  const Mat w = pow_psd(s, -0.5);
  std::vector<Mat> effects;
  Mat total = Mat::Zero(d, d);
  for (auto& g : gs) {
    effects.push_back(herm(w * g * w));
    total += effects.back();
  }
  // push any support deficiency into the first effect so the set is complete
  effects[0] = herm(effects[0] + Mat::Identity(d, d) - total);
  return Povm(std::move(effects));
}

inline Subspace random_subspace(Rng& rng, Eigen::Index ambient, Eigen::Index dim) {
  return Subspace(haar_isometry(rng, ambient, dim));
}

inline std::vector<double> random_simplex_point(Rng& rng, std::size_t n) {
  std::vector<double> p(n);
  double total = 0.0;
  for (auto& x : p) {
    x = -std::log(1.0 - rng.uniform());
    total += x;
  }
  for (auto& x : p) x /= total;
  return p;
}

}  // namespace qsr

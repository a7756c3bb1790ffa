#pragma once

#include <stdexcept>
#include <string>

#include "qsr/config.hpp"
#include "qsr/linalg.hpp"

namespace qsr {

// Orthonormal frame for a subspace of an ambient space; columns are the basis.
class Subspace {
 public:
  explicit Subspace(Mat basis) : basis_(std::move(basis)) {
    if (basis_.cols() < 1 || basis_.rows() < basis_.cols())
      throw std::invalid_argument("Subspace: need 1 <= dim <= ambient");
    const Mat gram = basis_.adjoint() * basis_;
    if (max_abs(gram - Mat::Identity(basis_.cols(), basis_.cols())) > tol::orthonormal)
      throw std::invalid_argument("Subspace: columns not orthonormal");
  }

  static Subspace full(Eigen::Index ambient) {
    return Subspace(Mat::Identity(ambient, ambient));
  }
  // span of computational basis vectors [offset, offset+dim)
  static Subspace computational(Eigen::Index ambient, Eigen::Index offset, Eigen::Index dim) {
    Mat b = Mat::Zero(ambient, dim);
    for (Eigen::Index i = 0; i < dim; ++i) b(offset + i, i) = 1.0;
    return Subspace(std::move(b));
  }

  Eigen::Index dim() const { return basis_.cols(); }
  Eigen::Index ambient() const { return basis_.rows(); }
  const Mat& basis() const { return basis_; }
  Mat projector() const { return basis_ * basis_.adjoint(); }

 private:
  Mat basis_;
};

class PureVector {
 public:
  explicit PureVector(Vec v) : v_(std::move(v)) {
    const double n = v_.norm();
    if (std::abs(n - 1.0) > tol::unit_norm)
      throw std::invalid_argument("PureVector: norm deviates from 1 by " +
                                  std::to_string(std::abs(n - 1.0)));
    v_ /= n;
  }

  static PureVector basis_state(Eigen::Index d, Eigen::Index i) {
    return PureVector(basis_vector(d, i));
  }

  Eigen::Index dim() const { return v_.size(); }
  const Vec& vector() const { return v_; }
  Mat projector() const { return v_ * v_.adjoint(); }

 private:
  Vec v_;
};

// Density operator with the validation contract: reject beyond tolerance,
// repair inside it (hermitize, clamp negative eigenvalues, renormalize).
class DensityOperator {
 public:
  explicit DensityOperator(const Mat& m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("DensityOperator: not square");
    if (max_abs(m - m.adjoint()) > tol::hermitian)
      throw std::invalid_argument("DensityOperator: not Hermitian within 1e-10");
    const double tr = m.trace().real();
    if (std::abs(m.trace().imag()) > tol::trace_one || std::abs(tr - 1.0) > tol::trace_one)
      throw std::invalid_argument("DensityOperator: trace deviates from 1 beyond 1e-10");
    Eigh e = eigh(m);
    if (e.values.minCoeff() < -tol::psd)
      throw std::invalid_argument("DensityOperator: negative eigenvalue beyond -1e-10");
    RVec clamped = e.values.cwiseMax(0.0);
    clamped /= clamped.sum();
    rho_ = e.vectors * clamped.asDiagonal() * e.vectors.adjoint();
    rho_ = herm(rho_);
  }

  static DensityOperator pure(const PureVector& psi) { return DensityOperator(psi.projector()); }

  static DensityOperator maximally_mixed(Eigen::Index d) {
    return DensityOperator(Mat::Identity(d, d) / static_cast<double>(d));
  }
  // maximally mixed on a subspace, as an ambient-dimension operator
  static DensityOperator maximally_mixed(const Subspace& g) {
    return DensityOperator(g.projector() / static_cast<double>(g.dim()));
  }

  Eigen::Index dim() const { return rho_.rows(); }
  const Mat& matrix() const { return rho_; }

 private:
  Mat rho_;
};

}  // namespace qsr

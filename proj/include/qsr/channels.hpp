#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qsr/config.hpp"
#include "qsr/linalg.hpp"
#include "qsr/states.hpp"

namespace qsr {

// Completely positive trace-non-increasing map in Kraus form.
class SubChannel {
 public:
  SubChannel(std::vector<Mat> kraus, Eigen::Index dim_in, Eigen::Index dim_out)
      : kraus_(std::move(kraus)), din_(dim_in), dout_(dim_out) {
    validate();
  }
  // dims inferred from the Kraus shapes
  explicit SubChannel(std::vector<Mat> kraus) : kraus_(std::move(kraus)) {
    if (kraus_.empty()) throw std::invalid_argument("SubChannel: empty Kraus list");
    dout_ = kraus_[0].rows();
    din_ = kraus_[0].cols();
    validate();
  }

  Eigen::Index dim_in() const { return din_; }
  Eigen::Index dim_out() const { return dout_; }
  const std::vector<Mat>& kraus() const { return kraus_; }
  std::size_t kraus_count() const { return kraus_.size(); }

  Mat kraus_sum() const {  // sum K*K
    Mat s = Mat::Zero(din_, din_);
    for (const Mat& k : kraus_) s += k.adjoint() * k;
    return herm(s);
  }

  Mat apply(const Mat& rho) const {
    Mat out = Mat::Zero(dout_, dout_);
    for (const Mat& k : kraus_) out += k * rho * k.adjoint();
    return out;
  }
  Mat operator()(const Mat& rho) const { return apply(rho); }
  Mat operator()(const DensityOperator& rho) const { return apply(rho.matrix()); }

  // Hilbert-Schmidt adjoint: sum K* X K
  Mat adjoint_apply(const Mat& x) const {
    Mat out = Mat::Zero(din_, din_);
    for (const Mat& k : kraus_) out += k.adjoint() * x * k;
    return out;
  }

  // Choi operator, unnormalized convention: sum_ij |i><j| (x) N(|i><j|)
  Mat choi() const {
    Mat c = Mat::Zero(din_ * dout_, din_ * dout_);
    for (const Mat& k : kraus_) {
      // vec of K in the |i> (x) K|i> layout
      Vec v(din_ * dout_);
      for (Eigen::Index i = 0; i < din_; ++i) v.segment(i * dout_, dout_) = k.col(i);
      c += v * v.adjoint();
    }
    return c;
  }

 protected:
  std::vector<Mat> kraus_;
  Eigen::Index din_ = 0, dout_ = 0;

 private:
  void validate() const {
    if (kraus_.empty()) throw std::invalid_argument("SubChannel: empty Kraus list");
    for (const Mat& k : kraus_)
      if (k.rows() != dout_ || k.cols() != din_)
        throw std::invalid_argument("SubChannel: Kraus shape mismatch");
    const RVec ev = eigvalsh(kraus_sum());
    if (ev.maxCoeff() > 1.0 + tol::trace_preserving)
      throw std::invalid_argument("SubChannel: trace-increasing beyond tolerance");
    if (ev.minCoeff() < -tol::psd)
      throw std::invalid_argument("SubChannel: sum K*K not PSD");
  }
};

// Trace-preserving completion of the contract.
class Channel : public SubChannel {
 public:
  Channel(std::vector<Mat> kraus, Eigen::Index dim_in, Eigen::Index dim_out)
      : SubChannel(std::move(kraus), dim_in, dim_out) {
    check_trace_preserving();
  }
  explicit Channel(std::vector<Mat> kraus) : SubChannel(std::move(kraus)) {
    check_trace_preserving();
  }

  static Channel identity(Eigen::Index d) {
    return Channel({Mat::Identity(d, d)}, d, d);
  }
  static Channel unitary(const Mat& u) {
    if (max_abs(u * u.adjoint() - Mat::Identity(u.rows(), u.rows())) > tol::unit_norm * 10)
      throw std::invalid_argument("Channel::unitary: not unitary");
    return Channel({u}, u.cols(), u.rows());
  }
  // isometric embedding of a subspace basis: rho on C^dim -> ambient
  static Channel isometry(const Mat& v) {
    if (max_abs(v.adjoint() * v - Mat::Identity(v.cols(), v.cols())) > tol::orthonormal * 10)
      throw std::invalid_argument("Channel::isometry: columns not orthonormal");
    return Channel({v}, v.cols(), v.rows());
  }
  // rho -> (1-q) rho + q Z rho Z on a qubit
  static Channel z_dephasing(double q) {
    Mat z = Mat::Identity(2, 2);
    z(1, 1) = -1.0;
    return Channel({std::sqrt(1.0 - q) * Mat::Identity(2, 2), std::sqrt(q) * z}, 2, 2);
  }
  static Channel x_dephasing(double q) {
    Mat x = Mat::Zero(2, 2);
    x(0, 1) = x(1, 0) = 1.0;
    return Channel({std::sqrt(1.0 - q) * Mat::Identity(2, 2), std::sqrt(q) * x}, 2, 2);
  }
  // rho -> (1-q) rho + q pi_d
  static Channel depolarizing(Eigen::Index d, double q) {
    std::vector<Mat> ks;
    ks.push_back(std::sqrt(1.0 - q) * Mat::Identity(d, d));
    // pi_d tr(rho) via the d^2 matrix units scaled by sqrt(q/d)
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = 0; j < d; ++j) {
        Mat e = Mat::Zero(d, d);
        e(i, j) = std::sqrt(q / static_cast<double>(d));
        ks.push_back(std::move(e));
      }
    return Channel(std::move(ks), d, d);
  }
  static Channel amplitude_damping(double gamma) {
    Mat k0 = Mat::Identity(2, 2);
    k0(1, 1) = std::sqrt(1.0 - gamma);
    Mat k1 = Mat::Zero(2, 2);
    k1(0, 1) = std::sqrt(gamma);
    return Channel({k0, k1}, 2, 2);
  }
  // rho -> sigma tr(rho)
  static Channel constant(const DensityOperator& sigma, Eigen::Index dim_in) {
    Eigh e = eigh(sigma.matrix());
    std::vector<Mat> ks;
    for (Eigen::Index i = 0; i < e.values.size(); ++i) {
      if (e.values(i) <= 0.0) continue;
      for (Eigen::Index j = 0; j < dim_in; ++j)
        ks.push_back(std::sqrt(e.values(i)) * e.vectors.col(i) *
                     basis_vector(dim_in, j).adjoint());
    }
    return Channel(std::move(ks), dim_in, sigma.dim());
  }

 private:
  void check_trace_preserving() const {
    if (max_abs(kraus_sum() - Mat::Identity(din_, din_)) > tol::trace_preserving)
      throw std::invalid_argument("Channel: sum K*K deviates from identity beyond 1e-9");
  }
};

namespace detail {
inline std::vector<Mat> compose_kraus(const SubChannel& after, const SubChannel& before) {
  if (before.dim_out() != after.dim_in())
    throw std::invalid_argument("compose: dimension mismatch");
  std::vector<Mat> ks;
  ks.reserve(after.kraus_count() * before.kraus_count());
  for (const Mat& a : after.kraus())
    for (const Mat& b : before.kraus()) {
      Mat k = a * b;
      if (max_abs(k) > 1e-14) ks.push_back(std::move(k));
    }
  if (ks.empty()) ks.push_back(Mat::Zero(after.dim_out(), before.dim_in()));
  return ks;
}
inline std::vector<Mat> tensor_kraus(const SubChannel& a, const SubChannel& b) {
  std::vector<Mat> ks;
  ks.reserve(a.kraus_count() * b.kraus_count());
  for (const Mat& ka : a.kraus())
    for (const Mat& kb : b.kraus()) ks.push_back(kron(ka, kb));
  return ks;
}
}  // namespace detail

inline SubChannel compose(const SubChannel& after, const SubChannel& before) {
  return SubChannel(detail::compose_kraus(after, before), before.dim_in(), after.dim_out());
}
inline Channel compose(const Channel& after, const Channel& before) {
  return Channel(detail::compose_kraus(after, before), before.dim_in(), after.dim_out());
}

inline SubChannel tensor(const SubChannel& a, const SubChannel& b) {
  return SubChannel(detail::tensor_kraus(a, b), a.dim_in() * b.dim_in(),
                    a.dim_out() * b.dim_out());
}
inline Channel tensor(const Channel& a, const Channel& b) {
  return Channel(detail::tensor_kraus(a, b), a.dim_in() * b.dim_in(), a.dim_out() * b.dim_out());
}

template <typename Ch>
inline Ch tensor_power(const Ch& ch, int n, const Caps& caps = {}) {
  if (n < 1) throw std::invalid_argument("tensor_power: n >= 1");
  double din = 1, dout = 1;
  for (int i = 0; i < n; ++i) { din *= ch.dim_in(); dout *= ch.dim_out(); }
  caps.check_tensor_dim(static_cast<std::size_t>(std::max(din, dout)), "tensor_power");
  Ch out = ch;
  for (int i = 1; i < n; ++i) out = tensor(out, ch);
  return out;
}

// per-position tensor of possibly different channels
template <typename Ch>
inline Ch tensor_word(const std::vector<Ch>& chans, const Caps& caps = {}) {
  if (chans.empty()) throw std::invalid_argument("tensor_word: empty");
  double din = 1, dout = 1;
  for (const auto& c : chans) { din *= c.dim_in(); dout *= c.dim_out(); }
  caps.check_tensor_dim(static_cast<std::size_t>(std::max(din, dout)), "tensor_word");
  Ch out = chans[0];
  for (std::size_t i = 1; i < chans.size(); ++i) out = tensor(out, chans[i]);
  return out;
}

// Complementary channel through the Stinespring isometry v = sum_k A_k (x) |k>_E;
// the environment dimension equals the Kraus count.
inline Channel complementary(const Channel& ch) {
  const auto& ks = ch.kraus();
  const Eigen::Index denv = static_cast<Eigen::Index>(ks.size());
  std::vector<Mat> bs;
  bs.reserve(ch.dim_out());
  for (Eigen::Index j = 0; j < ch.dim_out(); ++j) {
    Mat b(denv, ch.dim_in());
    for (Eigen::Index k = 0; k < denv; ++k) b.row(k) = ks[k].row(j);
    bs.push_back(std::move(b));
  }
  return Channel(std::move(bs), ch.dim_in(), denv);
}

// sum_s q(s) N_s as a channel: Kraus union scaled by sqrt(q_s)
inline Channel convex_mixture_channel(const std::vector<Channel>& channels,
                                      const std::vector<double>& q) {
  if (channels.empty() || channels.size() != q.size())
    throw std::invalid_argument("convex_mixture_channel: size mismatch");
  double total = 0.0;
  for (double w : q) {
    if (w < -1e-12) throw std::invalid_argument("convex_mixture_channel: negative weight");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw std::invalid_argument("convex_mixture_channel: weights must sum to 1");
  std::vector<Mat> ks;
  for (std::size_t s = 0; s < channels.size(); ++s) {
    if (channels[s].dim_in() != channels[0].dim_in() ||
        channels[s].dim_out() != channels[0].dim_out())
      throw std::invalid_argument("convex_mixture_channel: incompatible members");
    if (q[s] <= 0.0) continue;
    for (const Mat& k : channels[s].kraus()) ks.push_back(std::sqrt(q[s]) * k);
  }
  return Channel(std::move(ks), channels[0].dim_in(), channels[0].dim_out());
}

class Povm {
 public:
  explicit Povm(std::vector<Mat> effects) : effects_(std::move(effects)) {
    if (effects_.empty()) throw std::invalid_argument("Povm: empty");
    const Eigen::Index d = effects_[0].rows();
    Mat s = Mat::Zero(d, d);
    for (const Mat& e : effects_) {
      if (e.rows() != d || e.cols() != d) throw std::invalid_argument("Povm: shape mismatch");
      if (max_abs(e - e.adjoint()) > tol::hermitian)
        throw std::invalid_argument("Povm: effect not Hermitian");
      if (!is_psd(e, tol::psd * 100))
        throw std::invalid_argument("Povm: effect not PSD within tolerance");
      s += e;
    }
    if (max_abs(s - Mat::Identity(d, d)) > tol::povm_sum)
      throw std::invalid_argument("Povm: effects do not sum to identity within 1e-9");
  }

  Eigen::Index dim() const { return effects_[0].rows(); }
  std::size_t size() const { return effects_.size(); }
  const Mat& effect(std::size_t i) const { return effects_[i]; }
  const std::vector<Mat>& effects() const { return effects_; }

  double outcome_probability(std::size_t i, const DensityOperator& rho) const {
    return (effects_[i] * rho.matrix()).trace().real();
  }

 private:
  std::vector<Mat> effects_;
};

}  // namespace qsr

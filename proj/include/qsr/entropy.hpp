#pragma once

#include <cmath>

#include "qsr/channels.hpp"
#include "qsr/linalg.hpp"
#include "qsr/states.hpp"

namespace qsr {

// All entropic quantities are in bits (base-2 logs).

inline double entropy_of_spectrum(const RVec& v) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double p = v(i);
    if (p > tol::eig_clamp) s -= p * std::log2(p);
  }
  return s;
}

inline double entropy(const Mat& rho) { return entropy_of_spectrum(eigvalsh(rho)); }
inline double entropy(const DensityOperator& rho) { return entropy(rho.matrix()); }

inline double binary_entropy(double q) {
  if (q <= 0.0 || q >= 1.0) return 0.0;
  return -q * std::log2(q) - (1.0 - q) * std::log2(1.0 - q);
}

// Purification on ref (x) sys with the system marginal equal to rho:
// psi = sum_i sqrt(lambda_i) |i>_ref (x) |e_i>_sys.
inline PureVector purify(const DensityOperator& rho) {
  Eigh e = eigh(rho.matrix());
  const Eigen::Index d = rho.dim();
  Vec psi = Vec::Zero(d * d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const double lam = e.values(i);
    if (lam <= 0.0) continue;
    psi += std::sqrt(lam) * kron(basis_vector(d, i), Vec(e.vectors.col(i)));
  }
  return PureVector(psi);
}

// Uhlmann fidelity, squared convention: F = ||sqrt(rho) sqrt(sigma)||_1^2.
inline double fidelity(const Mat& rho, const Mat& sigma) {
  const Mat x = sqrt_psd(rho) * sqrt_psd(sigma);
  const double f = trace_norm(x);
  return f * f;
}
inline double fidelity(const DensityOperator& rho, const DensityOperator& sigma) {
  return fidelity(rho.matrix(), sigma.matrix());
}
// pure-state branch: F(|phi>, sigma) = <phi| sigma |phi>
inline double fidelity(const PureVector& phi, const Mat& sigma) {
  return (phi.vector().adjoint() * sigma * phi.vector())(0).real();
}
inline double fidelity(const PureVector& phi, const DensityOperator& sigma) {
  return fidelity(phi, sigma.matrix());
}

inline double trace_distance(const Mat& rho, const Mat& sigma) {
  return 0.5 * trace_norm_herm(rho - sigma);
}

// F_e(rho, N) = sum_k |tr(rho A_k)|^2; equals <psi|(id (x) N)(psi psi)|psi>
// for any purification psi.
inline double entanglement_fidelity(const Mat& rho, const SubChannel& ch) {
  double f = 0.0;
  for (const Mat& k : ch.kraus()) {
    const cx t = (rho * k).trace();
    f += std::norm(t);
  }
  return f;
}
inline double entanglement_fidelity(const DensityOperator& rho, const SubChannel& ch) {
  return entanglement_fidelity(rho.matrix(), ch);
}

// (id (x) N) applied to the canonical purification of rho; ref first.
inline Mat purified_output(const DensityOperator& rho, const SubChannel& ch) {
  const PureVector psi = purify(rho);
  const SubChannel idn = tensor(
      SubChannel({Mat::Identity(rho.dim(), rho.dim())}, rho.dim(), rho.dim()), ch);
  return idn.apply(psi.projector());
}

inline double entropy_exchange(const DensityOperator& rho, const Channel& ch) {
  return entropy(purified_output(rho, ch));
}

// I_c(rho, N) = S(N(rho)) - S(Nhat(rho)) with Nhat the complementary channel.
inline double coherent_information(const DensityOperator& rho, const Channel& ch) {
  return entropy(ch.apply(rho.matrix())) - entropy(complementary(ch).apply(rho.matrix()));
}

// I(A>B, sigma) = S(sigma^B) - S(sigma) on a bipartite A (x) B state.
inline double coherent_information_state(const Mat& sigma_ab, Eigen::Index da, Eigen::Index db) {
  const Mat sb = partial_trace(sigma_ab, {da, db}, {1});
  return entropy(sb) - entropy(sigma_ab);
}

// I(X;B, rho) = S(rho^X) + S(rho^B) - S(rho) on a bipartite X (x) B state.
inline double mutual_information(const Mat& rho_xb, Eigen::Index dx, Eigen::Index db) {
  const Mat rx = partial_trace(rho_xb, {dx, db}, {0});
  const Mat rb = partial_trace(rho_xb, {dx, db}, {1});
  return entropy(rx) + entropy(rb) - entropy(rho_xb);
}

}  // namespace qsr

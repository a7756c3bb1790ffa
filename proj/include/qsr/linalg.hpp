#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <complex>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace qsr {

using cx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;

inline Mat herm(const Mat& m) { return 0.5 * (m + m.adjoint()); }

inline double max_abs(const Mat& m) { return m.cwiseAbs().maxCoeff(); }

inline Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline Vec kron(const Vec& a, const Vec& b) {
  Vec out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i)
    out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

template <typename T>
inline T kron_many(const std::vector<T>& factors) {
  if (factors.empty()) throw std::invalid_argument("kron_many: empty factor list");
  T out = factors[0];
  for (std::size_t i = 1; i < factors.size(); ++i) out = kron(out, factors[i]).eval();
  return out;
}

struct Eigh {
  RVec values;   // ascending
  Mat vectors;   // columns
};

inline Eigh eigh(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es(herm(m));
  if (es.info() != Eigen::Success) throw std::runtime_error("eigh: solver failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

inline RVec eigvalsh(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es(herm(m), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigvalsh: solver failed");
  return es.eigenvalues();
}

// f applied to the spectrum of a Hermitian matrix
template <typename F>
inline Mat herm_func(const Mat& m, F f) {
  Eigh e = eigh(m);
  RVec d(e.values.size());
  for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = f(e.values(i));
  return e.vectors * d.asDiagonal() * e.vectors.adjoint();
}

inline Mat sqrt_psd(const Mat& m) {
  return herm_func(m, [](double x) { return x > 0.0 ? std::sqrt(x) : 0.0; });
}

// pseudo-inverse power on the support; kills eigenvalues below cutoff
inline Mat pow_psd(const Mat& m, double p, double cutoff = 1e-12) {
  return herm_func(m, [&](double x) { return x > cutoff ? std::pow(x, p) : 0.0; });
}

inline Mat support_projector(const Mat& m, double cutoff = 1e-12) {
  return herm_func(m, [&](double x) { return x > cutoff ? 1.0 : 0.0; });
}

inline double trace_norm(const Mat& m) {
  Eigen::JacobiSVD<Mat> svd(m);
  return svd.singularValues().sum();
}

// trace norm of a Hermitian matrix: sum of |eigenvalues|
inline double trace_norm_herm(const Mat& m) {
  RVec v = eigvalsh(m);
  return v.cwiseAbs().sum();
}

inline double hs_norm(const Mat& m) { return m.norm(); }

inline double op_norm(const Mat& m) {
  Eigen::JacobiSVD<Mat> svd(m);
  return svd.singularValues()(0);
}

inline bool is_psd(const Mat& m, double tolerance) {
  return eigvalsh(m).minCoeff() >= -tolerance;
}

// ----- tensor-factor index bookkeeping --------------------------------------

inline Eigen::Index total_dim(const std::vector<Eigen::Index>& dims) {
  Eigen::Index d = 1;
  for (auto x : dims) d *= x;
  return d;
}

// multi-index <-> linear index, leftmost factor most significant
inline std::vector<Eigen::Index> unravel(Eigen::Index lin, const std::vector<Eigen::Index>& dims) {
  std::vector<Eigen::Index> idx(dims.size());
  for (std::size_t k = dims.size(); k-- > 0;) {
    idx[k] = lin % dims[k];
    lin /= dims[k];
  }
  return idx;
}

inline Eigen::Index ravel(const std::vector<Eigen::Index>& idx, const std::vector<Eigen::Index>& dims) {
  Eigen::Index lin = 0;
  for (std::size_t k = 0; k < dims.size(); ++k) lin = lin * dims[k] + idx[k];
  return lin;
}

// Trace out every factor not listed in keep (keep is sorted, 0-based).
inline Mat partial_trace(const Mat& rho, const std::vector<Eigen::Index>& dims,
                         const std::vector<Eigen::Index>& keep) {
  const Eigen::Index d = total_dim(dims);
  if (rho.rows() != d || rho.cols() != d)
    throw std::invalid_argument("partial_trace: dims do not match matrix");
  std::vector<Eigen::Index> kept_dims, traced;
  for (Eigen::Index f = 0; f < static_cast<Eigen::Index>(dims.size()); ++f) {
    if (std::find(keep.begin(), keep.end(), f) != keep.end()) kept_dims.push_back(dims[f]);
    else traced.push_back(f);
  }
  std::vector<Eigen::Index> traced_dims;
  for (auto f : traced) traced_dims.push_back(dims[f]);
  const Eigen::Index dk = total_dim(kept_dims);
  const Eigen::Index dt = total_dim(traced_dims);

  Mat out = Mat::Zero(dk, dk);
  std::vector<Eigen::Index> full(dims.size());
  for (Eigen::Index a = 0; a < dk; ++a) {
    const auto ai = unravel(a, kept_dims.empty() ? std::vector<Eigen::Index>{1} : kept_dims);
    for (Eigen::Index b = 0; b < dk; ++b) {
      const auto bi = unravel(b, kept_dims.empty() ? std::vector<Eigen::Index>{1} : kept_dims);
      cx acc = 0.0;
      for (Eigen::Index t = 0; t < dt; ++t) {
        const auto ti = unravel(t, traced_dims.empty() ? std::vector<Eigen::Index>{1} : traced_dims);
        // row index
        std::size_t kc = 0, tc = 0;
        for (std::size_t f = 0; f < dims.size(); ++f) {
          if (std::find(keep.begin(), keep.end(), static_cast<Eigen::Index>(f)) != keep.end())
            full[f] = kept_dims.empty() ? 0 : ai[kc++];
          else
            full[f] = traced_dims.empty() ? 0 : ti[tc++];
        }
        const Eigen::Index row = ravel(full, dims);
        kc = 0; tc = 0;
        for (std::size_t f = 0; f < dims.size(); ++f) {
          if (std::find(keep.begin(), keep.end(), static_cast<Eigen::Index>(f)) != keep.end())
            full[f] = kept_dims.empty() ? 0 : bi[kc++];
          else
            full[f] = traced_dims.empty() ? 0 : ti[tc++];
        }
        const Eigen::Index col = ravel(full, dims);
        acc += rho(row, col);
      }
      out(a, b) = acc;
    }
  }
  return out;
}

// Permutation of tensor factors.  order[k] names the old factor that lands
// at position k, i.e. new basis |i_order[0]> (x) |i_order[1]> (x) ...
inline std::vector<Eigen::Index> factor_permutation_table(const std::vector<Eigen::Index>& dims,
                                                          const std::vector<Eigen::Index>& order) {
  std::vector<Eigen::Index> new_dims(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) new_dims[k] = dims[order[k]];
  const Eigen::Index d = total_dim(dims);
  std::vector<Eigen::Index> table(d);
  for (Eigen::Index lin = 0; lin < d; ++lin) {
    const auto ni = unravel(lin, new_dims);
    std::vector<Eigen::Index> oi(dims.size());
    for (std::size_t k = 0; k < order.size(); ++k) oi[order[k]] = ni[k];
    table[lin] = ravel(oi, dims);
  }
  return table;
}

inline Mat permute_factors(const Mat& rho, const std::vector<Eigen::Index>& dims,
                           const std::vector<Eigen::Index>& order) {
  const auto table = factor_permutation_table(dims, order);
  Mat out(rho.rows(), rho.cols());
  for (Eigen::Index i = 0; i < rho.rows(); ++i)
    for (Eigen::Index j = 0; j < rho.cols(); ++j) out(i, j) = rho(table[i], table[j]);
  return out;
}

inline Vec permute_factors(const Vec& psi, const std::vector<Eigen::Index>& dims,
                           const std::vector<Eigen::Index>& order) {
  const auto table = factor_permutation_table(dims, order);
  Vec out(psi.size());
  for (Eigen::Index i = 0; i < psi.size(); ++i) out(i) = psi(table[i]);
  return out;
}

// unitary permutation matrix for n equal factors of dim d; perm[k] = old slot at new position k
inline Mat permutation_unitary(Eigen::Index d, const std::vector<Eigen::Index>& order) {
  std::vector<Eigen::Index> dims(order.size(), d);
  const auto table = factor_permutation_table(dims, order);
  const Eigen::Index D = total_dim(dims);
  Mat u = Mat::Zero(D, D);
  for (Eigen::Index i = 0; i < D; ++i) u(i, table[i]) = 1.0;
  return u;
}

inline Vec basis_vector(Eigen::Index d, Eigen::Index i) {
  Vec v = Vec::Zero(d);
  v(i) = 1.0;
  return v;
}

}  // namespace qsr

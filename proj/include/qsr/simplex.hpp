#pragma once

#include <Eigen/Dense>
#include <boost/multiprecision/cpp_int.hpp>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "qsr/config.hpp"

namespace qsr {

// Feasibility verdict for A x = b, x >= 0.  On the infeasible branch the
// certificate y separates: y^T A <= 0 componentwise and y^T b = 1.
struct LpFeasibility {
  bool feasible = false;
  Eigen::VectorXd x;
  Eigen::VectorXd certificate;
  double objective = 0.0;  // phase-1 optimum, sum of artificial variables
  bool exact = false;      // verdict re-derived in rational arithmetic
};

namespace detail {

template <typename Scalar>
struct PhaseOne {
  Scalar objective;
  std::vector<Scalar> x;  // primal point, length n
  std::vector<Scalar> y;  // simplex multipliers against the row-flipped system
};

// Dense phase-1 simplex with Bland's rule: artificial basis, minimize the
// artificial mass.  eps = 0 gives the exact-arithmetic variant (guaranteed to
// terminate); for doubles a small pivot threshold stands in for exact zero.
template <typename Scalar>
PhaseOne<Scalar> phase1_simplex(std::vector<std::vector<Scalar>> a, std::vector<Scalar> b,
                                const Scalar& eps) {
  const std::size_t m = b.size();
  const std::size_t n = m ? a[0].size() : 0;
  for (std::size_t i = 0; i < m; ++i)
    if (b[i] < Scalar(0)) {
      b[i] = -b[i];
      for (Scalar& v : a[i]) v = -v;
    }

  const std::size_t cols = n + m + 1;  // originals, artificials, rhs
  std::vector<std::vector<Scalar>> t(m, std::vector<Scalar>(cols, Scalar(0)));
  std::vector<std::size_t> basis(m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) t[i][j] = a[i][j];
    t[i][n + i] = Scalar(1);
    t[i][cols - 1] = b[i];
    basis[i] = n + i;
  }
  // reduced costs r_j = c_j - sum of column j over basic rows (c_B = 1)
  std::vector<Scalar> r(cols, Scalar(0));
  for (std::size_t j = 0; j < cols; ++j) {
    Scalar s(0);
    for (std::size_t i = 0; i < m; ++i) s += t[i][j];
    r[j] = (j >= n && j + 1 < cols ? Scalar(1) : Scalar(0)) - s;
  }

  const std::size_t guard = 64 * (m + n + 4) * (m + n + 4);
  for (std::size_t iter = 0;; ++iter) {
    if (iter > guard) throw std::runtime_error("phase1_simplex: iteration guard tripped");
    std::size_t enter = cols;
    for (std::size_t j = 0; j + 1 < cols; ++j)
      if (r[j] < -eps) {
        enter = j;
        break;
      }
    if (enter == cols) break;

    std::size_t leave = m;
    for (std::size_t i = 0; i < m; ++i) {
      if (!(t[i][enter] > eps)) continue;
      if (leave == m) {
        leave = i;
        continue;
      }
      const Scalar lhs = t[i][cols - 1] * t[leave][enter];
      const Scalar rhs = t[leave][cols - 1] * t[i][enter];
      if (lhs < rhs || (lhs == rhs && basis[i] < basis[leave])) leave = i;
    }
    if (leave == m) throw std::runtime_error("phase1_simplex: numerical breakdown");

    const Scalar piv = t[leave][enter];
    for (Scalar& v : t[leave]) v /= piv;
    for (std::size_t i = 0; i < m; ++i) {
      if (i == leave) continue;
      const Scalar f = t[i][enter];
      if (f == Scalar(0)) continue;
      for (std::size_t j = 0; j < cols; ++j) t[i][j] -= f * t[leave][j];
    }
    const Scalar f = r[enter];
    if (f != Scalar(0))
      for (std::size_t j = 0; j < cols; ++j) r[j] -= f * t[leave][j];
    basis[leave] = enter;
  }

  PhaseOne<Scalar> out;
  out.objective = -r[cols - 1];
  out.x.assign(n, Scalar(0));
  for (std::size_t i = 0; i < m; ++i)
    if (basis[i] < n) out.x[basis[i]] = t[i][cols - 1];
  // artificial i keeps cost 1, so its reduced cost is 1 - y_i
  out.y.resize(m);
  for (std::size_t i = 0; i < m; ++i) out.y[i] = Scalar(1) - r[n + i];
  return out;
}

using rational = boost::multiprecision::cpp_rational;

}  // namespace detail

// Decides feasibility of A x = b, x >= 0 by phase-1 simplex.  Phase-1 optima
// at most tol::lp_feasible count as feasible.  Marginal double verdicts on
// small instances are settled exactly in rational arithmetic on the same
// coefficients (doubles convert exactly).
inline LpFeasibility lp_feasibility(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
  if (a.rows() != b.size()) throw std::invalid_argument("lp_feasibility: shape mismatch");
  const auto m = static_cast<std::size_t>(a.rows());
  const auto n = static_cast<std::size_t>(a.cols());

  std::vector<std::vector<double>> rows(m, std::vector<double>(n));
  std::vector<double> rhs(m);
  for (std::size_t i = 0; i < m; ++i) {
    rhs[i] = b(static_cast<Eigen::Index>(i));
    for (std::size_t j = 0; j < n; ++j)
      rows[i][j] = a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  auto p1 = detail::phase1_simplex<double>(rows, rhs, 1e-11);

  LpFeasibility out;
  out.objective = p1.objective;
  const bool marginal = p1.objective > tol::lp_feasible / 10 && p1.objective < 1e-4;
  if (marginal && m * n <= 200000) {
    std::vector<std::vector<detail::rational>> qrows(m, std::vector<detail::rational>(n));
    std::vector<detail::rational> qrhs(m);
    for (std::size_t i = 0; i < m; ++i) {
      qrhs[i] = detail::rational(rhs[i]);
      for (std::size_t j = 0; j < n; ++j) qrows[i][j] = detail::rational(rows[i][j]);
    }
    auto pq = detail::phase1_simplex<detail::rational>(qrows, qrhs, detail::rational(0));
    out.exact = true;
    out.objective = static_cast<double>(pq.objective);
    if (pq.objective == 0) {
      out.feasible = true;
      out.x.resize(static_cast<Eigen::Index>(n));
      for (std::size_t j = 0; j < n; ++j)
        out.x(static_cast<Eigen::Index>(j)) = static_cast<double>(pq.x[j]);
      return out;
    }
    p1.y.clear();
    p1.y.reserve(m);
    for (const auto& v : pq.y) p1.y.push_back(static_cast<double>(v));
  } else if (p1.objective <= tol::lp_feasible) {
    out.feasible = true;
    out.x.resize(static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < n; ++j)
      out.x(static_cast<Eigen::Index>(j)) = std::max(0.0, p1.x[j]);
    return out;
  }

  // infeasible: y was computed against the row-flipped system; flipping the
  // sign back per originally-negative row restores y^T A <= 0, y^T b > 0
  out.certificate.resize(static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < m; ++i) {
    const double s = b(static_cast<Eigen::Index>(i)) < 0 ? -1.0 : 1.0;
    out.certificate(static_cast<Eigen::Index>(i)) = s * p1.y[i];
  }
  const double gap = out.certificate.dot(b);
  if (gap > 0) out.certificate /= gap;
  return out;
}

}  // namespace qsr

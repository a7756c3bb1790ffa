#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "qsr/channels.hpp"
#include "qsr/entropy.hpp"
#include "qsr/random_sampling.hpp"
#include "qsr/states.hpp"

namespace qsr {

// Each oracle evaluates both sides of a named inequality exactly and reports
// the slack.  holds means lhs <= rhs + 1e-9.  Nothing here is ever assumed
// by the construction code; these exist so the bounds the constructions rely
// on can be attacked with random instances.
struct InequalityReport {
  std::string lemma;
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
  double slack = 0.0;  // rhs - lhs

  static InequalityReport of(std::string name, double lhs, double rhs) {
    InequalityReport r;
    r.lemma = std::move(name);
    r.lhs = lhs;
    r.rhs = rhs;
    r.slack = rhs - lhs;
    r.holds = lhs <= rhs + tol::ineq_slack;
    return r;
  }
};

// |I(A>B,rho) - I(A>B,sigma)| <= 2/e + 4 log2(r) sqrt(1-f), f = F(rho,sigma),
// r the dimension of the joint space.
inline InequalityReport coherent_info_continuity_report(const DensityOperator& rho,
                                                        const DensityOperator& sigma,
                                                        Eigen::Index da, Eigen::Index db) {
  const double lhs = std::abs(coherent_information_state(rho.matrix(), da, db) -
                              coherent_information_state(sigma.matrix(), da, db));
  const double f = std::min(1.0, fidelity(rho, sigma));
  const double r = static_cast<double>(da * db);
  const double rhs = 2.0 / std::exp(1.0) + 4.0 * std::log2(r) * std::sqrt(1.0 - f);
  return InequalityReport::of("continuity", lhs, rhs);
}

// F(Psi, sigma) - F(Psi, rho) <= (1/2)||rho - sigma||_1 for pure Psi,
// stated as the lower bound F(Psi,rho) >= F(Psi,sigma) - (1/2)||rho-sigma||_1.
inline InequalityReport pure_fidelity_trace_report(const PureVector& psi,
                                                   const DensityOperator& rho,
                                                   const DensityOperator& sigma) {
  const double lhs = fidelity(psi, sigma) - 0.5 * trace_norm_herm(rho.matrix() - sigma.matrix());
  const double rhs = fidelity(psi, rho);
  return InequalityReport::of("pure-fidelity-trace", lhs, rhs);
}

// (1/N) sum_{j,l} sqrt(L_jl D_jl) <= 2 sum_j sqrt(L_jj D_jj), given entrywise
// nonnegative L, D with L_jl <= min(L_jj, L_ll) and D_jl <= max(D_jj, D_ll).
inline InequalityReport entrywise_sqrt_report(const Eigen::MatrixXd& l, const Eigen::MatrixXd& d) {
  const Eigen::Index n = l.rows();
  if (l.cols() != n || d.rows() != n || d.cols() != n)
    throw std::invalid_argument("entrywise_sqrt_report: square same-size matrices required");
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index k = 0; k < n; ++k) {
      if (l(j, k) < 0 || d(j, k) < 0)
        throw std::invalid_argument("entrywise_sqrt_report: negative entry");
      if (l(j, k) > std::min(l(j, j), l(k, k)) + 1e-12)
        throw std::invalid_argument("entrywise_sqrt_report: L premise violated");
      if (d(j, k) > std::max(d(j, j), d(k, k)) + 1e-12)
        throw std::invalid_argument("entrywise_sqrt_report: D premise violated");
    }
  double lhs = 0.0;
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index k = 0; k < n; ++k) lhs += std::sqrt(l(j, k) * d(j, k));
  lhs /= static_cast<double>(n);
  double rhs = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) rhs += 2.0 * std::sqrt(l(j, j) * d(j, j));
  return InequalityReport::of("entrywise-sqrt", lhs, rhs);
}

// F_e(rho, D o Q o A) >= 1 - eps  implies  F_e(rho, D o A) >= 1 - 3 eps,
// with Q the conjugation by an orthogonal projection q.
inline InequalityReport projection_removal_report(const DensityOperator& rho, const Channel& a,
                                                  const Mat& q, const Channel& d) {
  if (max_abs(q * q - q) > 1e-9 || max_abs(q - q.adjoint()) > 1e-9)
    throw std::invalid_argument("projection_removal_report: q is not a projection");
  const SubChannel qop({q}, q.rows(), q.rows());
  const double eps = 1.0 - entanglement_fidelity(rho, compose(SubChannel(d), compose(qop, SubChannel(a))));
  const double lhs = 1.0 - 3.0 * eps;
  const double rhs = entanglement_fidelity(rho, compose(d, a));
  return InequalityReport::of("projection-removal", lhs, rhs);
}

// Gentle measurement: tr(Lambda rho) >= 1 - eps implies
// || rho - sqrt(Lambda) rho sqrt(Lambda) / tr(Lambda rho) ||_1 <= 2 sqrt(eps).
inline InequalityReport gentle_measurement_report(const DensityOperator& rho, const Mat& lambda) {
  const RVec ev = eigvalsh(lambda);
  if (ev.minCoeff() < -tol::psd * 100 || ev.maxCoeff() > 1.0 + tol::psd * 100)
    throw std::invalid_argument("gentle_measurement_report: need 0 <= Lambda <= 1");
  const double p = (lambda * rho.matrix()).trace().real();
  if (p <= 0.0) throw std::invalid_argument("gentle_measurement_report: tr(Lambda rho) = 0");
  const double eps = std::max(0.0, 1.0 - p);
  const Mat sq = sqrt_psd(lambda);
  const Mat post = sq * rho.matrix() * sq / p;
  const double lhs = trace_norm_herm(rho.matrix() - post);
  const double rhs = 2.0 * std::sqrt(eps);
  return InequalityReport::of("gentle-measurement", lhs, rhs);
}

// Mean product bound: numbers in [0,1] with means >= 1 - eps each give
// mean(a_i b_i) >= 1 - 2 eps.
inline InequalityReport mean_product_report(const std::vector<double>& a,
                                            const std::vector<double>& b) {
  if (a.size() != b.size() || a.empty())
    throw std::invalid_argument("mean_product_report: size mismatch");
  double ma = 0.0, mb = 0.0, mab = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] < -1e-12 || a[i] > 1.0 + 1e-12 || b[i] < -1e-12 || b[i] > 1.0 + 1e-12)
      throw std::invalid_argument("mean_product_report: entries must lie in [0,1]");
    ma += a[i];
    mb += b[i];
    mab += a[i] * b[i];
  }
  const double k = static_cast<double>(a.size());
  ma /= k; mb /= k; mab /= k;
  const double eps = std::max({0.0, 1.0 - ma, 1.0 - mb});
  return InequalityReport::of("mean-product", 1.0 - 2.0 * eps, mab);
}

// ----- random instance generators -------------------------------------------

inline InequalityReport random_instance_report(const std::string& lemma, Rng rng) {
  if (lemma == "continuity") {
    const Eigen::Index da = 2 + static_cast<Eigen::Index>(rng.integer(2));
    const Eigen::Index db = 2 + static_cast<Eigen::Index>(rng.integer(2));
    const DensityOperator rho = random_density(rng, da * db);
    // interpolate toward a second random state so the fidelity sweeps [0,1]
    const DensityOperator tau = random_density(rng, da * db);
    const double w = rng.uniform();
    const DensityOperator sigma(herm((1.0 - w) * rho.matrix() + w * tau.matrix()));
    return coherent_info_continuity_report(rho, sigma, da, db);
  }
  if (lemma == "pure-fidelity-trace") {
    const Eigen::Index d = 2 + static_cast<Eigen::Index>(rng.integer(3));
    return pure_fidelity_trace_report(random_pure(rng, d), random_density(rng, d),
                                      random_density(rng, d));
  }
  if (lemma == "entrywise-sqrt") {
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng.integer(4));
    Eigen::MatrixXd l(n, n), d(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      l(i, i) = rng.uniform();
      d(i, i) = rng.uniform();
    }
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) {
        if (i == j) continue;
        l(i, j) = rng.uniform() * std::min(l(i, i), l(j, j));
        d(i, j) = rng.uniform() * std::max(d(i, i), d(j, j));
      }
    return entrywise_sqrt_report(l, d);
  }
  if (lemma == "projection-removal") {
    const Eigen::Index d1 = 2 + static_cast<Eigen::Index>(rng.integer(2));
    const Eigen::Index d2 = 2 + static_cast<Eigen::Index>(rng.integer(2));
    const DensityOperator rho = random_density(rng, d1);
    // environment sizes large enough for a Stinespring isometry in each direction
    const Eigen::Index ka = (d1 + d2 - 1) / d2 + static_cast<Eigen::Index>(rng.integer(3));
    const Eigen::Index kd = (d2 + d1 - 1) / d1 + static_cast<Eigen::Index>(rng.integer(3));
    const Channel a = random_channel(rng, d1, d2, ka);
    const Channel dec = random_channel(rng, d2, d1, kd);
    const Eigen::Index qdim = 1 + static_cast<Eigen::Index>(rng.integer(d2));
    const Mat q = random_subspace(rng, d2, qdim).projector();
    return projection_removal_report(rho, a, q, dec);
  }
  if (lemma == "gentle-measurement") {
    const Eigen::Index d = 2 + static_cast<Eigen::Index>(rng.integer(3));
    const DensityOperator rho = random_density(rng, d);
    // effect biased toward the identity so eps spans small values too
    const Mat g = ginibre(rng, d, d);
    Mat h = g * g.adjoint();
    h /= eigvalsh(h).maxCoeff();
    const double w = rng.uniform();
    const Mat lambda = herm(w * Mat::Identity(d, d) + (1.0 - w) * h);
    return gentle_measurement_report(rho, lambda);
  }
  if (lemma == "mean-product") {
    const std::size_t k = 3 + rng.integer(48);
    const double lo = 1.0 - rng.uniform(0.0, 0.5);
    std::vector<double> a(k), b(k);
    for (std::size_t i = 0; i < k; ++i) {
      a[i] = rng.uniform(lo, 1.0);
      b[i] = rng.uniform(lo, 1.0);
    }
    return mean_product_report(a, b);
  }
  throw std::invalid_argument("unknown inequality lemma '" + lemma + "'");
}

inline const std::vector<std::string>& inequality_lemmas() {
  static const std::vector<std::string> names = {
      "continuity",       "pure-fidelity-trace", "entrywise-sqrt",
      "projection-removal", "gentle-measurement", "mean-product"};
  return names;
}

struct InequalitySuiteReport {
  std::string lemma;
  std::size_t trials = 0;
  std::size_t violations = 0;
  double worst_slack = 0.0;  // minimum observed slack
};

inline InequalitySuiteReport run_inequality_trials(const std::string& lemma, std::size_t trials,
                                                   const Rng& rng) {
  InequalitySuiteReport out;
  out.lemma = lemma;
  out.trials = trials;
  out.worst_slack = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < trials; ++t) {
    const InequalityReport r = random_instance_report(lemma, rng.sub(lemma, t));
    out.worst_slack = std::min(out.worst_slack, r.slack);
    if (!r.holds) ++out.violations;
  }
  return out;
}

}  // namespace qsr

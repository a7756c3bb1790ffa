#pragma once

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "qsr/linalg.hpp"
#include "qsr/states.hpp"

namespace qsr {

// Finite set of unitaries whose uniform average reproduces the Haar one- and
// two-fold twirls.  Cardinality is reported against the dim^4 existence bound
// but not enforced: the exact Clifford constructions used here exceed it.
struct UnitaryDesign {
  std::vector<Mat> unitaries;
  Eigen::Index dim = 0;

  std::size_t size() const { return unitaries.size(); }
};

namespace detail {

// canonical representative modulo global phase: first significant entry made
// positive real, entries rounded for hashing
inline std::string phase_canonical_key(const Mat& u) {
  cx phase(1.0, 0.0);
  bool anchored = false;
  for (Eigen::Index i = 0; i < u.rows() && !anchored; ++i)
    for (Eigen::Index j = 0; j < u.cols(); ++j)
      if (std::abs(u(i, j)) > 1e-8) {
        phase = std::conj(u(i, j)) / std::abs(u(i, j));
        anchored = true;
        break;
      }
  std::string key;
  key.reserve(static_cast<std::size_t>(u.size()) * 16);
  char buf[40];
  const auto snap = [](double t) {  // kill -0.000000 vs 0.000000 key splits
    const double r = std::round(t * 1e6) / 1e6;
    return r == 0.0 ? 0.0 : r;
  };
  for (Eigen::Index i = 0; i < u.rows(); ++i)
    for (Eigen::Index j = 0; j < u.cols(); ++j) {
      const cx v = phase * u(i, j);
      std::snprintf(buf, sizeof buf, "%.6f,%.6f;", snap(v.real()), snap(v.imag()));
      key += buf;
    }
  return key;
}

inline std::vector<Mat> group_closure(std::vector<Mat> generators, std::size_t expected) {
  std::vector<Mat> elements;
  std::unordered_set<std::string> seen;
  const Eigen::Index d = generators[0].rows();
  std::vector<Mat> frontier{Mat::Identity(d, d)};
  seen.insert(phase_canonical_key(frontier[0]));
  elements.push_back(frontier[0]);
  while (!frontier.empty()) {
    std::vector<Mat> next;
    for (const Mat& u : frontier)
      for (const Mat& g : generators) {
        Mat v = g * u;
        std::string key = phase_canonical_key(v);
        if (seen.insert(std::move(key)).second) {
          elements.push_back(v);
          next.push_back(std::move(v));
        }
      }
    frontier = std::move(next);
    if (elements.size() > 2 * expected)
      throw std::runtime_error("group_closure: runaway closure, phase canonicalization failed");
  }
  if (elements.size() != expected)
    throw std::runtime_error("group_closure: got " + std::to_string(elements.size()) +
                             " elements, expected " + std::to_string(expected));
  return elements;
}

}  // namespace detail

// Single-qubit Clifford group modulo phase: 24 elements from <H, S>.
inline UnitaryDesign clifford_group_1q() {
  Mat h(2, 2), s(2, 2);
  const double r = 1.0 / std::sqrt(2.0);
  h << r, r, r, -r;
  s << 1.0, 0.0, 0.0, cx(0.0, 1.0);
  return {detail::group_closure({h, s}, 24), 2};
}

// Two-qubit Clifford group modulo phase: 11520 elements from local H, S and CZ.
inline UnitaryDesign clifford_group_2q() {
  Mat h(2, 2), s(2, 2), id2 = Mat::Identity(2, 2);
  const double r = 1.0 / std::sqrt(2.0);
  h << r, r, r, -r;
  s << 1.0, 0.0, 0.0, cx(0.0, 1.0);
  Mat cz = Mat::Identity(4, 4);
  cz(3, 3) = -1.0;
  return {detail::group_closure({kron(h, id2), kron(id2, h), kron(s, id2), kron(id2, s), cz}, 11520),
          4};
}

// Exact constructions exist here for dims 1, 2 and 4 (trivial group and the
// one- and two-qubit Clifford groups).  Larger Clifford groups are
// astronomically big, so for any other dimension callers must supply a
// candidate set and have verify_design certify it before use.
inline UnitaryDesign make_design(Eigen::Index dim) {
  if (dim == 1) return {{Mat::Identity(1, 1)}, 1};
  if (dim == 2) return clifford_group_1q();
  if (dim == 4) return clifford_group_2q();
  throw std::domain_error("make_design: no exact construction for dim " + std::to_string(dim) +
                          "; supply a candidate set and certify it with verify_design");
}

// design acting on the coordinates of a subspace
inline UnitaryDesign make_design(const Subspace& g) { return make_design(g.dim()); }

// (1/|X|) sum_U (U (x) U) rho (U (x) U)*
inline Mat twirl2(const UnitaryDesign& x, const Mat& rho) {
  const Eigen::Index d2 = x.dim * x.dim;
  if (rho.rows() != d2 || rho.cols() != d2) throw std::invalid_argument("twirl2: shape mismatch");
  Mat out = Mat::Zero(d2, d2);
  for (const Mat& u : x.unitaries) {
    const Mat uu = kron(u, u);
    out += uu * rho * uu.adjoint();
  }
  return out / static_cast<double>(x.size());
}

// Closed-form Haar two-fold twirl: projection onto the commutant of U (x) U,
// spanned by the identity and the swap, i.e. depolarization within the
// symmetric and antisymmetric subspaces.
inline Mat haar_twirl2(Eigen::Index d, const Mat& rho) {
  Mat swap = Mat::Zero(d * d, d * d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) swap(i * d + j, j * d + i) = 1.0;
  const Mat psym = 0.5 * (Mat::Identity(d * d, d * d) + swap);
  const Mat panti = 0.5 * (Mat::Identity(d * d, d * d) - swap);
  const double dsym = d * (d + 1) / 2.0, danti = d * (d - 1) / 2.0;
  Mat out = (psym * rho).trace() / dsym * psym;
  if (danti > 0) out += (panti * rho).trace() / danti * panti;
  return out;
}

struct DesignReport {
  std::size_t cardinality = 0;
  double cardinality_bound = 0.0;  // dim^4, reported not enforced
  double max_unitarity_defect = 0.0;
  double one_design_defect = 0.0;   // || avg U rho U* - pi || on a basis of inputs
  double two_design_defect = 0.0;   // entrywise superoperator distance to the Haar twirl
  bool is_two_design = false;
};

// Exact moment check: compares the two-fold twirl superoperator against the
// Haar closed form on a full operator basis, via accumulated superoperator
// matrices (column-major vec convention).
inline DesignReport verify_design(const UnitaryDesign& x, double tolerance = 1e-8) {
  const Eigen::Index d = x.dim, d2 = d * d;
  DesignReport rep;
  rep.cardinality = x.size();
  rep.cardinality_bound = std::pow(static_cast<double>(d), 4.0);
  for (const Mat& u : x.unitaries)
    rep.max_unitarity_defect =
        std::max(rep.max_unitarity_defect, max_abs(u * u.adjoint() - Mat::Identity(d, d)));

  // one-design: average of U E_ij U* must equal delta_ij pi_d
  Mat sup1 = Mat::Zero(d2, d2);
  for (const Mat& u : x.unitaries) sup1 += kron(u.conjugate(), u);
  sup1 /= static_cast<double>(x.size());
  Mat sup1_haar = Mat::Zero(d2, d2);
  {
    // vec(pi tr(rho)): tr(rho) = vec(I)^T vec(rho)
    Vec vid = Vec::Zero(d2), vpi = Vec::Zero(d2);
    for (Eigen::Index i = 0; i < d; ++i) vid(i * d + i) = 1.0;
    vpi = vid / static_cast<double>(d);
    sup1_haar = vpi * vid.transpose();
  }
  rep.one_design_defect = max_abs(sup1 - sup1_haar);

  // two-design superoperator on (C^d (x) C^d)^(x2)
  Mat sup2 = Mat::Zero(d2 * d2, d2 * d2);
  for (const Mat& u : x.unitaries) {
    const Mat uu = kron(u, u);
    sup2 += kron(uu.conjugate(), uu);
  }
  sup2 /= static_cast<double>(x.size());
  Mat sup2_haar = Mat::Zero(d2 * d2, d2 * d2);
  {
    Mat swap = Mat::Zero(d2, d2);
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = 0; j < d; ++j) swap(i * d + j, j * d + i) = 1.0;
    const Mat psym = 0.5 * (Mat::Identity(d2, d2) + swap);
    const Mat panti = 0.5 * (Mat::Identity(d2, d2) - swap);
    const double dsym = d * (d + 1) / 2.0, danti = d * (d - 1) / 2.0;
    Vec vsym = Vec::Zero(d2 * d2), vanti = Vec::Zero(d2 * d2);
    for (Eigen::Index j = 0; j < d2; ++j) {
      vsym.segment(j * d2, d2) += psym.col(j);
      vanti.segment(j * d2, d2) += panti.col(j);
    }
    // outer products vec(P) vec(P)^dagger / dim(P); P real symmetric
    sup2_haar = vsym * vsym.transpose() / dsym;
    if (danti > 0) sup2_haar += vanti * vanti.transpose() / danti;
  }
  rep.two_design_defect = max_abs(sup2 - sup2_haar);
  rep.is_two_design = rep.two_design_defect <= tolerance && rep.one_design_defect <= tolerance;
  return rep;
}

}  // namespace qsr

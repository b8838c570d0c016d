// Symmetric-matrix primitives: Jacobi spectral decomposition with eigenvalue
// clustering, numeric rank, and Moore-Penrose range/null splits.
#pragma once

#include <cmath>
#include <numeric>
#include <string>
#include <tuple>
#include <utility>

#include "qcls/core.hpp"

namespace qcls {

// Real symmetric matrix. Symmetrized as (M+M')/2 at construction; input whose
// asymmetry exceeds tol_asym * scale is rejected.
struct SymMatrix {
  std::size_t n = 0;
  Mat m;

  SymMatrix() = default;

  explicit SymMatrix(const Mat& raw, double tol_asym = 1e-8) : n(raw.rows), m(raw.rows, raw.cols) {
    if (raw.rows != raw.cols) throw DimensionMismatch("SymMatrix: input not square");
    const double scale = std::max(1.0, max_abs(raw));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        if (std::abs(raw(i, j) - raw(j, i)) > tol_asym * scale)
          throw AsymmetricInput("SymMatrix: asymmetry exceeds tolerance at (" +
                                std::to_string(i) + "," + std::to_string(j) + ")");
        m(i, j) = 0.5 * (raw(i, j) + raw(j, i));
      }
  }

  static SymMatrix zero(std::size_t n) { return SymMatrix(Mat(n, n)); }
  static SymMatrix identity(std::size_t n) { return SymMatrix(Mat::identity(n)); }

  static SymMatrix diagonal(const Vec& d) {
    Mat raw(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) raw(i, i) = d[i];
    return SymMatrix(raw);
  }

  double operator()(std::size_t i, std::size_t j) const { return m(i, j); }
  double scale() const { return std::max(1.0, max_abs(m)); }

  // x'Mx
  double quad(const Vec& x) const { return dot(x, matvec(m, x)); }
};

struct EigenCluster {
  double value = 0.0;        // representative eigenvalue
  std::size_t multiplicity = 0;
  std::size_t first_col = 0; // column range [first_col, first_col+multiplicity)
};

struct Spectrum {
  Vec eigenvalues;  // descending
  Mat basis;        // orthogonal, columns are eigenvectors
  std::vector<EigenCluster> clusters;

  double scale() const {
    double m = 1.0;
    for (double e : eigenvalues) m = std::max(m, std::abs(e));
    return m;
  }
};

namespace detail {

// One cyclic Jacobi sweep over all off-diagonal pairs.
inline void jacobi_sweep(Mat& a, Mat& v) {
  const std::size_t n = a.rows;
  for (std::size_t p = 0; p + 1 < n; ++p)
    for (std::size_t q = p + 1; q < n; ++q) {
      const double apq = a(p, q);
      if (apq == 0.0) continue;
      const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
      const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                       (std::abs(theta) + std::sqrt(theta * theta + 1.0));
      const double c = 1.0 / std::sqrt(t * t + 1.0);
      const double s = t * c;
      for (std::size_t k = 0; k < n; ++k) {
        const double akp = a(k, p), akq = a(k, q);
        a(k, p) = c * akp - s * akq;
        a(k, q) = s * akp + c * akq;
      }
      for (std::size_t k = 0; k < n; ++k) {
        const double apk = a(p, k), aqk = a(q, k);
        a(p, k) = c * apk - s * aqk;
        a(q, k) = s * apk + c * aqk;
      }
      for (std::size_t k = 0; k < n; ++k) {
        const double vkp = v(k, p), vkq = v(k, q);
        v(k, p) = c * vkp - s * vkq;
        v(k, q) = s * vkp + c * vkq;
      }
    }
}

inline double offdiag_frobenius(const Mat& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < a.cols; ++j)
      if (i != j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

}  // namespace detail

// Cyclic Jacobi eigendecomposition. Eigenvalues descending, eigenvalues closer
// than tol_cluster * scale merged into one cluster. Each eigenvector's sign is
// normalized so its largest-magnitude component is positive.
inline Spectrum spectral_decompose(const SymMatrix& s, double tol_cluster = 1e-9,
                                   const std::string& name = "matrix") {
  const std::size_t n = s.n;
  Mat a = s.m;
  Mat v = Mat::identity(n);
  const double scale = s.scale();
  const double stop = 1e-14 * scale;
  const int sweep_cap = 100;
  int sweep = 0;
  while (detail::offdiag_frobenius(a) > stop) {
    if (++sweep > sweep_cap)
      throw EigenSolverFailure("Jacobi eigensolver did not converge for " + name);
    detail::jacobi_sweep(a, v);
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

  Spectrum out;
  out.eigenvalues.resize(n);
  out.basis = Mat(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    out.eigenvalues[j] = a(order[j], order[j]);
    std::size_t imax = 0;
    double amax = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double x = std::abs(v(i, order[j]));
      if (x > amax) { amax = x; imax = i; }
    }
    const double sign = v(imax, order[j]) < 0.0 ? -1.0 : 1.0;
    for (std::size_t i = 0; i < n; ++i) out.basis(i, j) = sign * v(i, order[j]);
  }

  double emax = 1.0;
  for (double e : out.eigenvalues) emax = std::max(emax, std::abs(e));
  const double gap = tol_cluster * emax;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && out.eigenvalues[i] - out.eigenvalues[j] <= gap) ++j;
    double rep = 0.0;
    for (std::size_t k = i; k < j; ++k) rep += out.eigenvalues[k];
    out.clusters.push_back({rep / double(j - i), j - i, i});
    i = j;
  }
  return out;
}

// Number of eigenvalues with |lambda| > tol_rank * scale.
inline std::size_t numeric_rank(const Spectrum& spec, double tol_rank = 1e-9) {
  const double cutoff = tol_rank * spec.scale();
  std::size_t r = 0;
  for (double e : spec.eigenvalues)
    if (std::abs(e) > cutoff) ++r;
  return r;
}

// b = B x_b + b_perp with x_b the Moore-Penrose solve and b_perp in the
// numeric null space of B.
inline std::pair<Vec, Vec> mp_split(const SymMatrix& B, const Vec& b, double tol_rank = 1e-9) {
  if (B.n != b.size()) throw DimensionMismatch("mp_split: dimension mismatch");
  const Spectrum spec = spectral_decompose(B, tol_rank, "mp_split operand");
  const double cutoff = tol_rank * spec.scale();
  const std::size_t n = B.n;
  Vec xb(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    if (std::abs(spec.eigenvalues[j]) <= cutoff) continue;
    double proj = 0.0;
    for (std::size_t i = 0; i < n; ++i) proj += spec.basis(i, j) * b[i];
    const double coef = proj / spec.eigenvalues[j];
    for (std::size_t i = 0; i < n; ++i) xb[i] += coef * spec.basis(i, j);
  }
  const Vec b_perp = vsub(b, matvec(B.m, xb));
  return {xb, b_perp};
}

}  // namespace qcls

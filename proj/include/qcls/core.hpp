// Core dense vector/matrix utilities and error types shared by all modules.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace qcls {

using Vec = std::vector<double>;

// Small dense row-major matrix. Sized for desk-scale problems; no attempt at
// cache blocking or BLAS parity.
struct Mat {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Mat() = default;
  Mat(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  static Mat identity(std::size_t n) {
    Mat m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }
};

inline Mat transpose(const Mat& a) {
  Mat t(a.cols, a.rows);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < a.cols; ++j) t(j, i) = a(i, j);
  return t;
}

inline Mat matmul(const Mat& a, const Mat& b) {
  if (a.cols != b.rows) throw std::invalid_argument("matmul: inner dimensions differ");
  Mat c(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t k = 0; k < a.cols; ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols; ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

inline Vec matvec(const Mat& a, const Vec& x) {
  if (a.cols != x.size()) throw std::invalid_argument("matvec: dimension mismatch");
  Vec y(a.rows, 0.0);
  for (std::size_t i = 0; i < a.rows; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.cols; ++j) s += a(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

inline double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(const Vec& v) { return std::sqrt(dot(v, v)); }

inline double norm_inf(const Vec& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

inline double max_abs(const Mat& m) {
  double s = 0.0;
  for (double x : m.data) s = std::max(s, std::abs(x));
  return s;
}

inline Vec vadd(const Vec& a, const Vec& b) {
  Vec c(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] + b[i];
  return c;
}

inline Vec vsub(const Vec& a, const Vec& b) {
  Vec c(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] - b[i];
  return c;
}

inline Vec vscale(double s, const Vec& a) {
  Vec c(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) c[i] = s * a[i];
  return c;
}

// Gauss-Jordan inverse with partial pivoting. Throws on (near-)singular input.
inline Mat inverse(const Mat& a) {
  if (a.rows != a.cols) throw std::invalid_argument("inverse: matrix not square");
  const std::size_t n = a.rows;
  Mat m = a;
  Mat inv = Mat::identity(n);
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t i = col + 1; i < n; ++i)
      if (std::abs(m(i, col)) > std::abs(m(piv, col))) piv = i;
    if (std::abs(m(piv, col)) < 1e-300)
      throw std::domain_error("inverse: singular matrix");
    if (piv != col) {
      for (std::size_t j = 0; j < n; ++j) {
        std::swap(m(col, j), m(piv, j));
        std::swap(inv(col, j), inv(piv, j));
      }
    }
    const double d = m(col, col);
    for (std::size_t j = 0; j < n; ++j) {
      m(col, j) /= d;
      inv(col, j) /= d;
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (i == col) continue;
      const double f = m(i, col);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) {
        m(i, j) -= f * m(col, j);
        inv(i, j) -= f * inv(col, j);
      }
    }
  }
  return inv;
}

// ---------------------------------------------------------------------------
// Error types

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error { using Error::Error; };
struct ZeroObjectiveMatrix : Error { using Error::Error; };
struct NonConvexObjective : Error { using Error::Error; };
struct AsymmetricInput : Error { using Error::Error; };
struct SingularTransform : Error { using Error::Error; };
struct EigenSolverFailure : Error { using Error::Error; };
struct PoleProximity : Error { using Error::Error; };
struct BracketFailure : Error { using Error::Error; };
struct NotAttained : Error { using Error::Error; };
struct NoFeasiblePoints : Error { using Error::Error; };
struct NotApplicable : Error { using Error::Error; };
struct NoPositiveEigenvalue : Error { using Error::Error; };

// Which branch of the constraint-insolvability trichotomy fired.
enum class InfeasibleCase { I, II, III, EmptyLeq };

struct InfeasibleConstraint : Error {
  InfeasibleCase which;
  InfeasibleConstraint(InfeasibleCase c, const std::string& msg) : Error(msg), which(c) {}
};

// ---------------------------------------------------------------------------
// Solver configuration. All zero/definiteness tests are tolerance-based; the
// margins actually observed are recorded in the solve trace.

struct SolverConfig {
  double tol_rank = 1e-9;      // relative eigenvalue cutoff for numeric rank
  double tol_cluster = 1e-9;   // relative gap below which eigenvalues merge
  double tol_class = 1e-9;     // zero tests on delta, epsilon, k*, k1, c0, C10
  double tol_feas = 1e-8;      // constraint residual accepted on solutions
  double tol_secular = 1e-10;  // |f(lambda_hat)| target
  double tol_lambda = 1e-13;   // relative bisection bracket width
  double tol_asym = 1e-8;      // rejection threshold for asymmetric input
  double pole_guard = 1e-3;    // relative initial offset from secular poles
  int sample_count = 10;       // default sampler draw count
  unsigned long long seed = 20240901ULL;
  double sampler_box = 1.0;    // half-width for free-coordinate draws
};

}  // namespace qcls

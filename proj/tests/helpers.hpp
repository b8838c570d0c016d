// Shared fixtures and random generators for the test suites.
#pragma once

#include <random>

#include "qcls/qcls.hpp"

namespace testutil {

using namespace qcls;

inline Mat mat3(double a00, double a01, double a02, double a10, double a11, double a12,
                double a20, double a21, double a22) {
  Mat m(3, 3);
  m(0, 0) = a00; m(0, 1) = a01; m(0, 2) = a02;
  m(1, 0) = a10; m(1, 1) = a11; m(1, 2) = a12;
  m(2, 0) = a20; m(2, 1) = a21; m(2, 2) = a22;
  return m;
}

inline Mat mat2(double a00, double a01, double a10, double a11) {
  Mat m(2, 2);
  m(0, 0) = a00; m(0, 1) = a01;
  m(1, 0) = a10; m(1, 1) = a11;
  return m;
}

// The worked three-dimensional family: loss target (1,1,1), unit-sphere
// constraint, objective coupling controlled by kappa.
inline ProblemSpec appendix_problem(double kappa) {
  ProblemSpec w;
  w.A = SymMatrix(mat3(1, 0, 0, 0, 1, -1, 0, -1, 1 + kappa));
  w.B = SymMatrix::identity(3);
  w.t = {1, 1, 1};
  w.b = {0, 0, 0};
  w.k = 1.0;
  return w;
}

inline ProblemSpec sphere_problem(std::size_t n, double k = 1.0) {
  ProblemSpec w;
  w.A = SymMatrix::identity(n);
  w.B = SymMatrix::identity(n);
  w.t = Vec(n, 0.0);
  w.b = Vec(n, 0.0);
  w.k = k;
  return w;
}

inline Mat random_symmetric(std::mt19937_64& rng, std::size_t n, double amp = 1.0) {
  std::uniform_real_distribution<double> ud(-amp, amp);
  Mat m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) m(i, j) = m(j, i) = ud(rng);
  return m;
}

inline Mat random_orthogonal(std::mt19937_64& rng, std::size_t n) {
  const Spectrum s = spectral_decompose(SymMatrix(random_symmetric(rng, n)));
  return s.basis;
}

// PSD matrix with eigenvalues either 0 (probability ~1/3 beyond the first) or
// in [0.5, 3], keeping conditioning benign.
inline Mat random_psd(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> ud(0.5, 3.0);
  std::uniform_int_distribution<int> zero(0, 2);
  const Mat U = random_orthogonal(rng, n);
  Vec eig(n);
  eig[0] = ud(rng);
  for (std::size_t i = 1; i < n; ++i) eig[i] = zero(rng) == 0 ? 0.0 : ud(rng);
  Mat m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s += U(i, k) * eig[k] * U(j, k);
      m(i, j) = s;
    }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double avg = 0.5 * (m(i, j) + m(j, i));
      m(i, j) = m(j, i) = avg;
    }
  return m;
}

// Random problem guaranteed feasible (rejection-sampled).
inline ProblemSpec random_feasible_problem(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> ud(-1.5, 1.5);
  for (;;) {
    ProblemSpec w;
    w.A = SymMatrix(random_psd(rng, n));
    w.B = SymMatrix(random_symmetric(rng, n, 1.5));
    w.t = Vec(n);
    w.b = Vec(n);
    for (auto& x : w.t) x = ud(rng);
    for (auto& x : w.b) x = ud(rng);
    w.k = ud(rng);
    const FeasibilityAnalysis fa = feasibility_check(w);
    if (fa.feasible) return w;
  }
}

inline AffineMap random_affine(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> ud(-1.0, 1.0);
  for (;;) {
    Mat T = random_symmetric(rng, n, 1.0);
    for (std::size_t i = 0; i < n; ++i) T(i, i) += 2.0;  // keep well-conditioned
    Vec a(n);
    for (auto& x : a) x = ud(rng);
    try {
      return AffineMap(std::move(T), std::move(a));
    } catch (const SingularTransform&) {
    }
  }
}

}  // namespace testutil

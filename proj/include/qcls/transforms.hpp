// Affine coordinate changes x -> T^{-1}(x - a) and the named reductions:
// centred least-squares, simplified, simultaneous-diagonal, canonical, and
// dimension-reduced canonical forms.
#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "qcls/core.hpp"
#include "qcls/linalg.hpp"
#include "qcls/problem.hpp"

namespace qcls {

struct AffineMap {
  Mat T;      // nonsingular
  Mat T_inv;
  Vec a;

  AffineMap() = default;
  AffineMap(Mat t, Vec av) : T(std::move(t)), a(std::move(av)) {
    try {
      T_inv = inverse(T);
    } catch (const std::domain_error&) {
      throw SingularTransform("AffineMap: transform matrix is singular");
    }
  }

  static AffineMap linear(Mat t) {
    Vec zero(t.rows, 0.0);
    return AffineMap(std::move(t), std::move(zero));
  }

  // reduction direction: x -> x_g
  Vec forward(const Vec& x) const { return matvec(T_inv, vsub(x, a)); }
  // pullback: x_g -> x
  Vec backward(const Vec& xg) const { return vadd(matvec(T, xg), a); }
};

// Maps in the order they were applied during reduction.
struct TransformChain {
  std::vector<AffineMap> maps;

  Vec forward(const Vec& x) const {
    Vec y = x;
    for (const auto& g : maps) y = g.forward(y);
    return y;
  }

  Vec backward(const Vec& xg) const {
    Vec y = xg;
    for (auto it = maps.rbegin(); it != maps.rend(); ++it) y = it->backward(y);
    return y;
  }

  void append(AffineMap g) { maps.push_back(std::move(g)); }

  // Extend an inner chain acting on the leading r coordinates to n dimensions.
  static AffineMap embed_leading(const AffineMap& g, std::size_t n) {
    const std::size_t r = g.T.rows;
    Mat T = Mat::identity(n);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < r; ++j) T(i, j) = g.T(i, j);
    Vec a(n, 0.0);
    for (std::size_t i = 0; i < r; ++i) a[i] = g.a[i];
    return AffineMap(std::move(T), std::move(a));
  }
};

// omega -> omega_g for g = g_(T,a)
inline ProblemSpec apply_affine(const ProblemSpec& w, const AffineMap& g) {
  const std::size_t n = w.dim();
  if (g.T.rows != n) throw DimensionMismatch("apply_affine: transform dimension mismatch");
  ProblemSpec out;
  out.sense = w.sense;
  out.A = SymMatrix(matmul(transpose(g.T), matmul(w.A.m, g.T)), 1e-6);
  out.B = SymMatrix(matmul(transpose(g.T), matmul(w.B.m, g.T)), 1e-6);
  out.t = matvec(g.T_inv, vsub(w.t, g.a));
  const Vec Ba = matvec(w.B.m, g.a);
  out.b = matvec(transpose(g.T), vadd(w.b, Ba));
  out.k = w.k - dot(g.a, vadd(vscale(2.0, w.b), Ba));
  return out;
}

// ---------------------------------------------------------------------------
// Centred least-squares form: A_g = diag(I_r, O), t_g = 0.

struct CentredForm {
  ProblemSpec problem;
  AffineMap map;
  std::size_t r = 0;
};

inline CentredForm to_centred_ls(const ProblemSpec& w, const Validation& v,
                                 const SolverConfig& cfg = {}) {
  const std::size_t n = v.n, r = v.rank_A;
  // T_A = U_A diag(D_A^{-1}, I_{n-r})
  Mat T(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    const double s = j < r ? 1.0 / std::sqrt(v.spec_A.eigenvalues[j]) : 1.0;
    for (std::size_t i = 0; i < n; ++i) T(i, j) = s * v.spec_A.basis(i, j);
  }
  AffineMap g(std::move(T), w.t);
  ProblemSpec centred = apply_affine(w, g);
  // A_g and t_g are identity/zero by construction; set them exactly.
  Mat A(n, n);
  for (std::size_t i = 0; i < r; ++i) A(i, i) = 1.0;
  centred.A = SymMatrix(A);
  centred.t = Vec(n, 0.0);
  (void)cfg;
  return {std::move(centred), std::move(g), r};
}

// ---------------------------------------------------------------------------
// Simplified form (r < n): B takes the block pattern
//   [ B11  C10  O ]
//   [ C10'  O   O ]
//   [  O    O  G0 ]
// separating null(A) along the range and null spaces of B00.

struct SimplifiedFormData {
  std::size_t r = 0;
  std::size_t s0 = 0;   // rank of B00
  Mat B11;              // r x r
  Mat C10;              // r x (n-r-s0)
  Vec gamma0;           // s0 nonsingular diagonal values
  Vec b1;               // r
  Vec c0;               // n-r-s0
  Vec d0;               // s0
  double k = 0.0;       // constraint constant of the simplified problem
  double k1 = 0.0;      // k + d0' G0^{-1} d0
};

inline SimplifiedFormData extract_simplified_data(const ProblemSpec& w, std::size_t r,
                                                  std::size_t s0) {
  const std::size_t n = w.dim();
  const std::size_t n0 = n - r, nf = n0 - s0;  // nf = free (y0) dimension
  SimplifiedFormData d;
  d.r = r;
  d.s0 = s0;
  d.B11 = Mat(r, r);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < r; ++j) d.B11(i, j) = w.B(i, j);
  d.C10 = Mat(r, nf);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < nf; ++j) d.C10(i, j) = w.B(i, r + j);
  d.gamma0.resize(s0);
  for (std::size_t j = 0; j < s0; ++j) d.gamma0[j] = w.B(r + nf + j, r + nf + j);
  d.b1.assign(w.b.begin(), w.b.begin() + r);
  d.c0.assign(w.b.begin() + r, w.b.begin() + r + nf);
  d.d0.assign(w.b.begin() + r + nf, w.b.end());
  d.k = w.k;
  d.k1 = w.k;
  for (std::size_t j = 0; j < s0; ++j) d.k1 += d.d0[j] * d.d0[j] / d.gamma0[j];
  return d;
}

struct SimplifiedForm {
  ProblemSpec problem;
  AffineMap map;
  SimplifiedFormData data;
};

// Lemma 5.2 construction. Null-space coordinates of B00 come first, then the
// nonsingular diagonal block; the sign of each Gamma0 basis column is chosen
// so that the induced d0 entries are nonpositive.
inline SimplifiedForm to_simplified_form(const ProblemSpec& w, std::size_t r,
                                         const SolverConfig& cfg = {}) {
  const std::size_t n = w.dim();
  if (r >= n) throw DimensionMismatch("to_simplified_form: requires r < n");
  const std::size_t n0 = n - r;

  Mat B00(n0, n0);
  for (std::size_t i = 0; i < n0; ++i)
    for (std::size_t j = 0; j < n0; ++j) B00(i, j) = w.B(r + i, r + j);
  const Spectrum spec0 = spectral_decompose(SymMatrix(B00), cfg.tol_cluster, "B00");
  const double cutoff = cfg.tol_rank * spec0.scale();

  std::vector<std::size_t> null_cols, range_cols;
  for (std::size_t j = 0; j < n0; ++j) {
    if (std::abs(spec0.eigenvalues[j]) <= cutoff) null_cols.push_back(j);
    else range_cols.push_back(j);
  }
  const std::size_t s0 = range_cols.size(), nf = null_cols.size();

  Vec b0(n0);
  for (std::size_t i = 0; i < n0; ++i) b0[i] = w.b[r + i];

  // U0 columns: null-space basis first, then Gamma0 basis (sign-normalized).
  Mat U0(n0, n0);
  Vec gamma0(s0);
  for (std::size_t j = 0; j < nf; ++j)
    for (std::size_t i = 0; i < n0; ++i) U0(i, j) = spec0.basis(i, null_cols[j]);
  for (std::size_t j = 0; j < s0; ++j) {
    const std::size_t src = range_cols[j];
    gamma0[j] = spec0.eigenvalues[src];
    double proj = 0.0;
    for (std::size_t i = 0; i < n0; ++i) proj += spec0.basis(i, src) * b0[i];
    const double sign = proj > 0.0 ? -1.0 : 1.0;
    for (std::size_t i = 0; i < n0; ++i) U0(i, nf + j) = sign * spec0.basis(i, src);
  }

  // D10 = B10 U0 restricted to the Gamma0 columns
  Mat B10(r, n0);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < n0; ++j) B10(i, j) = w.B(i, r + j);
  const Mat B10U0 = matmul(B10, U0);

  // T = diag(I_r, U0) * shear, shear bottom-left block = -G0^{-1} D10'
  Mat T = Mat(n, n);
  for (std::size_t i = 0; i < r; ++i) T(i, i) = 1.0;
  for (std::size_t i = 0; i < n0; ++i)
    for (std::size_t j = 0; j < n0; ++j) T(r + i, r + j) = U0(i, j);
  Mat shear = Mat::identity(n);
  for (std::size_t i = 0; i < s0; ++i)
    for (std::size_t j = 0; j < r; ++j)
      shear(r + nf + i, j) = -B10U0(j, nf + i) / gamma0[i];
  AffineMap g = AffineMap::linear(matmul(T, shear));

  ProblemSpec simplified = apply_affine(w, g);
  // Zero the blocks that vanish by construction.
  Mat B = simplified.B.m;
  for (std::size_t i = 0; i < nf; ++i)
    for (std::size_t j = 0; j < nf; ++j) B(r + i, r + j) = 0.0;
  for (std::size_t i = 0; i < s0; ++i) {
    for (std::size_t j = 0; j < r + nf; ++j) {
      B(r + nf + i, j) = 0.0;
      B(j, r + nf + i) = 0.0;
    }
    for (std::size_t j = 0; j < s0; ++j)
      B(r + nf + i, r + nf + j) = i == j ? gamma0[i] : 0.0;
  }
  simplified.B = SymMatrix(B);
  simplified.A = w.A;  // diag(I_r, O) unchanged under T in the group
  simplified.t = Vec(n, 0.0);

  SimplifiedFormData data = extract_simplified_data(simplified, r, s0);
  return {std::move(simplified), std::move(g), std::move(data)};
}

// Further transformation diag(U1, I_{n-r}) making B11 -> diag(O, Gamma1);
// preserves simplified form.
inline SimplifiedForm to_simultaneous_diagonal(const ProblemSpec& w, const SimplifiedFormData& d,
                                               const SolverConfig& cfg = {}) {
  const std::size_t n = w.dim(), r = d.r;
  const Spectrum spec1 = spectral_decompose(SymMatrix(d.B11), cfg.tol_cluster, "B11");
  const double cutoff = cfg.tol_rank * spec1.scale();
  std::vector<std::size_t> null_cols, range_cols;
  for (std::size_t j = 0; j < r; ++j) {
    if (std::abs(spec1.eigenvalues[j]) <= cutoff) null_cols.push_back(j);
    else range_cols.push_back(j);
  }
  Mat T = Mat::identity(n);
  std::size_t col = 0;
  for (std::size_t j : null_cols) {
    for (std::size_t i = 0; i < r; ++i) T(i, col) = spec1.basis(i, j);
    ++col;
  }
  for (std::size_t j : range_cols) {
    for (std::size_t i = 0; i < r; ++i) T(i, col) = spec1.basis(i, j);
    ++col;
  }
  AffineMap g = AffineMap::linear(std::move(T));
  ProblemSpec out = apply_affine(w, g);
  out.A = w.A;
  out.t = Vec(n, 0.0);
  // B11 is diagonal by construction; clean roundoff there.
  Mat B = out.B.m;
  const std::size_t s1 = range_cols.size();
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < r; ++j) {
      if (i == j)
        B(i, j) = i < r - s1 ? 0.0 : spec1.eigenvalues[range_cols[i - (r - s1)]];
      else
        B(i, j) = 0.0;
    }
  out.B = SymMatrix(B);
  SimplifiedFormData data = extract_simplified_data(out, r, d.s0);
  return {std::move(out), std::move(g), std::move(data)};
}

// ---------------------------------------------------------------------------
// Canonical form: full least-squares, B* = diag(O_{m0}, g1 I_{m1}, ..., gq I_{mq}),
// target supported on the first coordinate of each eigenspace, linear term on
// the first null-space coordinate.

struct CanonicalData {
  std::size_t q = 0;    // distinct nonzero eigenvalues
  std::size_t s = 0;    // rank of B
  std::size_t m0 = 0;   // null-space dimension
  Vec gammas;           // g1 > ... > gq
  std::vector<std::size_t> mults;
  Vec lengths;          // l1..lq (projections of b onto eigenspaces)
  double l0 = 0.0;
  Vec delta;            // |gi|^{-1} li
  double epsilon = 0.0; // l0
  double k_star = 0.0;
};

struct CanonicalForm {
  ProblemSpec problem;  // omega*
  AffineMap map;
  CanonicalData data;
};

namespace detail {

// Orthogonal matrix whose first column is the given unit vector, via a
// Householder reflection mapping u1 to it.
inline Mat orthogonal_with_first_column(const Vec& u) {
  const std::size_t m = u.size();
  Mat H = Mat::identity(m);
  Vec v = u;
  v[0] -= 1.0;
  const double vn2 = dot(v, v);
  if (vn2 < 1e-30) return H;  // u already equals u1
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) H(i, j) -= 2.0 * v[i] * v[j] / vn2;
  // H maps u1 -> u up to reflection sign; fix the first column to u exactly.
  for (std::size_t i = 0; i < m; ++i) H(i, 0) = u[i];
  return H;
}

}  // namespace detail

// Requires A = I, t = 0, B with a positive eigenvalue (caller negates first
// otherwise).
inline CanonicalForm to_canonical_form(const ProblemSpec& w, const SolverConfig& cfg = {}) {
  const std::size_t n = w.dim();
  const Spectrum spec = spectral_decompose(w.B, cfg.tol_cluster, "B");
  const double cutoff = cfg.tol_rank * spec.scale();

  CanonicalData cd;
  std::vector<std::size_t> null_cols;
  struct Block { double gamma; std::vector<std::size_t> cols; };
  std::vector<Block> blocks;
  for (const auto& cl : spec.clusters) {
    std::vector<std::size_t> cols(cl.multiplicity);
    for (std::size_t i = 0; i < cl.multiplicity; ++i) cols[i] = cl.first_col + i;
    if (std::abs(cl.value) <= cutoff)
      null_cols.insert(null_cols.end(), cols.begin(), cols.end());
    else
      blocks.push_back({cl.value, cols});
  }
  if (blocks.empty() || blocks.front().gamma <= cutoff)
    throw NoPositiveEigenvalue(
        "to_canonical_form: B has no positive eigenvalue (caller must negate first)");

  cd.q = blocks.size();
  cd.m0 = null_cols.size();
  cd.s = n - cd.m0;

  // T_B columns: null block first, then eigenvalue blocks descending.
  Mat TB(n, n);
  std::size_t col = 0;
  for (std::size_t j : null_cols) {
    for (std::size_t i = 0; i < n; ++i) TB(i, col) = spec.basis(i, j);
    ++col;
  }
  std::vector<std::size_t> block_off(cd.q);
  for (std::size_t bi = 0; bi < cd.q; ++bi) {
    block_off[bi] = col;
    cd.gammas.push_back(blocks[bi].gamma);
    cd.mults.push_back(blocks[bi].cols.size());
    for (std::size_t j : blocks[bi].cols) {
      for (std::size_t i = 0; i < n; ++i) TB(i, col) = spec.basis(i, j);
      ++col;
    }
  }

  const Vec bt = matvec(transpose(TB), w.b);  // (c', d1', ..., dq')'

  Vec c(bt.begin(), bt.begin() + cd.m0);
  cd.l0 = norm2(c);
  cd.epsilon = cd.l0;

  // U_B = diag(U0, U1, ..., Uq); first column of Ui is sign(gi) di/|di|.
  Mat UB = Mat::identity(n);
  auto place = [&](const Mat& Ui, std::size_t off) {
    for (std::size_t i = 0; i < Ui.rows; ++i)
      for (std::size_t j = 0; j < Ui.cols; ++j) UB(off + i, off + j) = Ui(i, j);
  };
  const double bscale = std::max(1.0, norm_inf(w.b));
  if (cd.m0 > 0 && cd.l0 > cfg.tol_class * bscale)
    place(detail::orthogonal_with_first_column(vscale(1.0 / cd.l0, c)), 0);

  Vec v(n, 0.0);  // translation seed (0', g1^{-1} d1', ..., gq^{-1} dq')'
  for (std::size_t bi = 0; bi < cd.q; ++bi) {
    const std::size_t off = block_off[bi], m = cd.mults[bi];
    Vec di(bt.begin() + off, bt.begin() + off + m);
    const double li = norm2(di);
    cd.lengths.push_back(li);
    cd.delta.push_back(li / std::abs(cd.gammas[bi]));
    if (li > cfg.tol_class * bscale) {
      const double s = cd.gammas[bi] < 0.0 ? -1.0 : 1.0;
      place(detail::orthogonal_with_first_column(vscale(s / li, di)), off);
    } else {
      cd.lengths.back() = 0.0;
      cd.delta.back() = 0.0;
    }
    for (std::size_t i = 0; i < m; ++i) v[off + i] = di[i] / cd.gammas[bi];
  }

  cd.k_star = w.k;
  for (std::size_t bi = 0; bi < cd.q; ++bi)
    cd.k_star += cd.lengths[bi] * cd.lengths[bi] / cd.gammas[bi];

  const Mat T = matmul(TB, UB);
  Vec a = matvec(TB, v);
  for (double& x : a) x = -x;
  AffineMap g(T, a);

  // omega* assembled by construction, zeros exact.
  ProblemSpec star;
  star.sense = w.sense;
  star.A = SymMatrix::identity(n);
  Vec diagB(n, 0.0);
  Vec tstar(n, 0.0), bstar(n, 0.0);
  for (std::size_t bi = 0; bi < cd.q; ++bi)
    for (std::size_t i = 0; i < cd.mults[bi]; ++i) diagB[block_off[bi] + i] = cd.gammas[bi];
  star.B = SymMatrix::diagonal(diagB);
  for (std::size_t bi = 0; bi < cd.q; ++bi) tstar[block_off[bi]] = cd.delta[bi];
  if (cd.m0 > 0) bstar[0] = cd.epsilon;
  star.t = tstar;
  star.b = bstar;
  star.k = cd.k_star;

  return {std::move(star), std::move(g), std::move(cd)};
}

// ---------------------------------------------------------------------------
// Dimension-reduced canonical form: one variable per distinct nonzero
// eigenvalue plus, when present and active, one null-space variable.

struct DrcfSpec {
  std::size_t n_bar = 0;
  bool has_y = false;    // m0 > 0 and epsilon > 0
  Vec Delta;             // diagonal of B**: (0,) gammas
  Vec w0;                // target: (0,) delta
  double epsilon = 0.0;  // linear coefficient on y (0 when has_y is false)
  double k_star = 0.0;
  bool regular = true;

  std::size_t q() const { return w0.size() - (has_y ? 1 : 0); }
  double gamma(std::size_t i) const { return Delta[i + (has_y ? 1 : 0)]; }
  double delta(std::size_t i) const { return w0[i + (has_y ? 1 : 0)]; }
};

inline DrcfSpec dimension_reduce(const CanonicalData& cd, const SolverConfig& cfg = {}) {
  DrcfSpec d;
  const double eps_zero = cfg.tol_class * std::max(1.0, cd.epsilon);
  d.has_y = cd.m0 > 0 && cd.epsilon > eps_zero;
  d.n_bar = cd.q + (d.has_y ? 1 : 0);
  if (d.has_y) {
    d.Delta.push_back(0.0);
    d.w0.push_back(0.0);
    d.epsilon = cd.epsilon;
  }
  for (std::size_t i = 0; i < cd.q; ++i) {
    d.Delta.push_back(cd.gammas[i]);
    d.w0.push_back(cd.delta[i]);
  }
  d.k_star = cd.k_star;
  d.regular = true;  // the m0>0, eps=0 null block is dropped here (optimal y = 0)
  return d;
}

}  // namespace qcls

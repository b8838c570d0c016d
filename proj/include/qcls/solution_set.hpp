// Uniform representation of solution sets (empty, finite, or uncountable)
// with feasibility-checked sampling and pullback to original coordinates.
#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "qcls/core.hpp"
#include "qcls/linalg.hpp"
#include "qcls/transforms.hpp"

namespace qcls {

// Blocks partition the solve-coordinate vector into contiguous ranges, each
// describing the set of values that coordinate range may take.
namespace block {

struct Pinned {
  Vec values;
};

// {-magnitude, +magnitude} on a single coordinate
struct SignPair {
  double magnitude = 0.0;
};

// ||x|| = radius in R^dim
struct Sphere {
  std::size_t dim = 0;
  double radius = 0.0;
};

// offset + span(basis columns); basis empty means the single point offset,
// square basis means all of R^dim
struct AffineSubspace {
  std::size_t dim = 0;
  Vec offset;
  std::vector<Vec> basis;  // orthonormal directions
};

// {z : (z + G0^{-1} d0)' G0 (z + G0^{-1} d0) = alpha}
struct QuadricSlice {
  Vec gamma0;
  Vec d0;
  double alpha = 0.0;
};

// x0 = (y0, z0) with alpha(y0) = k1 - 2 c0'y0, z0 in the alpha(y0) slice,
// ranging over all y0 whose level is attainable.
struct UnionOverLinear {
  Vec c0;      // nonzero
  Vec gamma0;
  Vec d0;
  double k1 = 0.0;
};

// {x : Q(x) <= 0} for Q(x) = x'Bx + 2b'x - k, with a known interior point.
struct QuadricRegion {
  Mat B;
  Vec b;
  double k = 0.0;
  Vec inside;  // point with Q <= 0
};

}  // namespace block

using SetBlock = std::variant<block::Pinned, block::SignPair, block::Sphere,
                              block::AffineSubspace, block::QuadricSlice,
                              block::UnionOverLinear, block::QuadricRegion>;

inline std::size_t block_dim(const SetBlock& b) {
  return std::visit(
      [](const auto& x) -> std::size_t {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, block::Pinned>) return x.values.size();
        else if constexpr (std::is_same_v<T, block::SignPair>) return 1;
        else if constexpr (std::is_same_v<T, block::Sphere>) return x.dim;
        else if constexpr (std::is_same_v<T, block::AffineSubspace>) return x.dim;
        else if constexpr (std::is_same_v<T, block::QuadricSlice>) return x.gamma0.size();
        else if constexpr (std::is_same_v<T, block::UnionOverLinear>)
          return x.c0.size() + x.gamma0.size();
        else return x.b.size();
      },
      b);
}

struct SolutionSet {
  double infimum = 0.0;
  bool attained = true;
  std::vector<SetBlock> blocks;          // in solve coordinates
  std::optional<Vec> representative;     // in original coordinates
  TransformChain chain;                  // original -> solve coordinates
  // For non-attained sets: produces a feasible point (solve coordinates) with
  // loss at most eta.
  std::function<Vec(double eta)> approach;

  std::size_t solve_dim() const {
    std::size_t d = 0;
    for (const auto& b : blocks) d += block_dim(b);
    return d;
  }
};

namespace detail {

inline Vec gaussian_direction(std::mt19937_64& rng, std::size_t dim) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Vec v(dim);
  double n2 = 0.0;
  do {
    n2 = 0.0;
    for (auto& x : v) {
      x = nd(rng);
      n2 += x * x;
    }
  } while (n2 < 1e-12);
  const double inv = 1.0 / std::sqrt(n2);
  for (auto& x : v) x *= inv;
  return v;
}

// A point on {z : (z + G0^{-1}d0)' G0 (z + G0^{-1}d0) = alpha}.
inline Vec sample_quadric_slice(std::mt19937_64& rng, const Vec& gamma0, const Vec& d0,
                                double alpha) {
  const std::size_t s0 = gamma0.size();
  Vec center(s0);
  for (std::size_t i = 0; i < s0; ++i) center[i] = -d0[i] / gamma0[i];
  if (alpha == 0.0) {
    bool has_pos = false, has_neg = false;
    for (double g : gamma0) (g > 0.0 ? has_pos : has_neg) = true;
    if (!(has_pos && has_neg)) return center;  // definite: single point
    // null cone: balance positive and negative parts
    Vec v = gaussian_direction(rng, s0);
    double pos = 0.0, neg = 0.0;
    for (std::size_t i = 0; i < s0; ++i) {
      const double q = gamma0[i] * v[i] * v[i];
      if (q > 0.0) pos += q; else neg -= q;
    }
    if (pos < 1e-12 || neg < 1e-12) return center;  // fall back to the apex
    const double scale_neg = std::sqrt(pos / neg);
    Vec z = center;
    for (std::size_t i = 0; i < s0; ++i)
      z[i] += gamma0[i] > 0.0 ? v[i] : scale_neg * v[i];
    return z;
  }
  for (int attempt = 0; attempt < 256; ++attempt) {
    const Vec v = gaussian_direction(rng, s0);
    double rho = 0.0;
    for (std::size_t i = 0; i < s0; ++i) rho += gamma0[i] * v[i] * v[i];
    if (std::abs(rho) < 1e-10 || rho * alpha < 0.0) continue;
    const double r = std::sqrt(alpha / rho);
    Vec z = center;
    for (std::size_t i = 0; i < s0; ++i) z[i] += r * v[i];
    return z;
  }
  throw NoFeasiblePoints("quadric slice sampler: level not attainable");
}

inline void sample_block(std::mt19937_64& rng, const SetBlock& blk, double box, Vec& out) {
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, block::Pinned>) {
          out.insert(out.end(), x.values.begin(), x.values.end());
        } else if constexpr (std::is_same_v<T, block::SignPair>) {
          std::uniform_int_distribution<int> coin(0, 1);
          out.push_back(coin(rng) ? x.magnitude : -x.magnitude);
        } else if constexpr (std::is_same_v<T, block::Sphere>) {
          Vec v = gaussian_direction(rng, x.dim);
          for (double c : v) out.push_back(x.radius * c);
        } else if constexpr (std::is_same_v<T, block::AffineSubspace>) {
          Vec p = x.offset;
          std::uniform_real_distribution<double> ud(-box, box);
          for (const Vec& dir : x.basis) {
            const double c = ud(rng);
            for (std::size_t i = 0; i < p.size(); ++i) p[i] += c * dir[i];
          }
          out.insert(out.end(), p.begin(), p.end());
        } else if constexpr (std::is_same_v<T, block::QuadricSlice>) {
          Vec z = sample_quadric_slice(rng, x.gamma0, x.d0, x.alpha);
          out.insert(out.end(), z.begin(), z.end());
        } else if constexpr (std::is_same_v<T, block::UnionOverLinear>) {
          bool has_pos = false, has_neg = false;
          for (double g : x.gamma0) (g > 0.0 ? has_pos : has_neg) = true;
          std::uniform_real_distribution<double> ud(-box, box);
          const double cn2 = dot(x.c0, x.c0);
          for (int attempt = 0;; ++attempt) {
            Vec y0(x.c0.size());
            for (auto& yi : y0) yi = ud(rng);
            double alpha = x.k1 - 2.0 * dot(x.c0, y0);
            const bool ok = (alpha == 0.0) || (alpha > 0.0 && has_pos) ||
                            (alpha < 0.0 && has_neg) || x.gamma0.empty();
            if (!ok && attempt < 256) continue;
            if (!ok) {
              // project y0 onto the alpha = 0 hyperplane
              const double shift = alpha / (2.0 * cn2);
              for (std::size_t i = 0; i < y0.size(); ++i) y0[i] += shift * x.c0[i];
              alpha = 0.0;
            }
            out.insert(out.end(), y0.begin(), y0.end());
            if (!x.gamma0.empty()) {
              Vec z = sample_quadric_slice(rng, x.gamma0, x.d0, alpha);
              out.insert(out.end(), z.begin(), z.end());
            }
            return;
          }
        } else {  // QuadricRegion
          std::uniform_real_distribution<double> ud(-box, box);
          Vec draw(x.b.size());
          for (auto& c : draw) c = ud(rng);
          auto qval = [&](const Vec& p) {
            return dot(p, matvec(x.B, p)) + 2.0 * dot(x.b, p) - x.k;
          };
          if (qval(draw) <= 0.0) {
            out.insert(out.end(), draw.begin(), draw.end());
            return;
          }
          // walk from the interior point toward the draw, staying inside
          double lo = 0.0, hi = 1.0;
          auto at = [&](double s) {
            Vec p(x.inside.size());
            for (std::size_t i = 0; i < p.size(); ++i)
              p[i] = x.inside[i] + s * (draw[i] - x.inside[i]);
            return p;
          };
          for (int it = 0; it < 60; ++it) {
            const double mid = 0.5 * (lo + hi);
            (qval(at(mid)) <= 0.0 ? lo : hi) = mid;
          }
          std::uniform_real_distribution<double> us(0.0, lo);
          Vec p = at(us(rng));
          out.insert(out.end(), p.begin(), p.end());
        }
      },
      blk);
}

}  // namespace detail

// Draw `count` members, each mapped to original coordinates through the
// chain. Deterministic for a fixed seed.
inline std::vector<Vec> sample(const SolutionSet& set, int count, unsigned long long seed,
                               double box = 1.0) {
  if (!set.attained) throw NotAttained("sample: solution set is empty (infimum not attained)");
  std::mt19937_64 rng(seed);
  std::vector<Vec> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    Vec x;
    for (const auto& blk : set.blocks) detail::sample_block(rng, blk, box, x);
    out.push_back(set.chain.backward(x));
  }
  return out;
}

// Attach/extend the chain mapping original coordinates to the set's solve
// coordinates; the representative is mapped eagerly, block geometry is kept
// and composed with the chain at sampling time.
inline SolutionSet pull_back(SolutionSet set, const TransformChain& chain) {
  TransformChain combined = chain;
  for (const auto& g : set.chain.maps) combined.append(g);
  set.chain = std::move(combined);
  if (set.representative) set.representative = chain.backward(*set.representative);
  return set;
}

// ---------------------------------------------------------------------------
// Solve trace: every tolerant branch taken, with its margin.

struct TraceEntry {
  std::string stage;
  std::string decision;
  std::map<std::string, double> margins;
};

struct SolveReport {
  SolutionSet outcome;
  std::vector<TraceEntry> trace;
  std::vector<std::string> warnings;
  std::optional<DrcfSpec> drcf;          // present when the secular stage ran
  std::optional<double> lambda_hat;      // present for interior-multiplier solves

  const TraceEntry* find(const std::string& stage) const {
    for (const auto& e : trace)
      if (e.stage == stage) return &e;
    return nullptr;
  }
};

}  // namespace qcls

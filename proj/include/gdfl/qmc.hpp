#pragma once

// Low-discrepancy sequences (Halton, Sobol) and primitive integer directions.

#include "gdfl/core.hpp"
#include "gdfl/detail/sobol_table.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <unordered_set>
#include <vector>

namespace gdfl {

/// Thrown when no further primitive direction can be produced.
class DirectionsExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline bool is_prime(std::uint64_t v) {
  if (v < 2) return false;
  for (std::uint64_t d = 2; d * d <= v; ++d)
    if (v % d == 0) return false;
  return true;
}

/// First `count` primes, ascending.
inline std::vector<std::uint32_t> first_primes(std::size_t count) {
  std::vector<std::uint32_t> out;
  out.reserve(count);
  for (std::uint32_t c = 2; out.size() < count; ++c)
    if (is_prime(c)) out.push_back(c);
  return out;
}

/// Radical inverse of `index` in `base`.
inline double halton(std::uint64_t index, std::uint32_t base) {
  if (index < 1) throw UsageError("halton: index must be at least 1");
  if (!is_prime(base)) throw UsageError("halton: base must be prime");
  double result = 0.0;
  double f = 1.0 / base;
  while (index > 0) {
    result += f * static_cast<double>(index % base);
    index /= base;
    f /= base;
  }
  return result;
}

namespace detail {

// Direction numbers v_j (j = 0..31) per dimension, scaled to 32 bits.
class SobolDirections {
 public:
  static constexpr int kBits = 32;

  static const SobolDirections& instance() {
    static const SobolDirections table;
    return table;
  }

  const std::array<std::uint32_t, kBits>& operator[](std::size_t dim) const { return v_[dim]; }

 private:
  SobolDirections() : v_(kSobolMaxDim) {
    std::size_t pos = 0;
    for (std::size_t d = 0; d < kSobolMaxDim; ++d) {
      const std::uint32_t poly = kSobolData[pos++];
      auto& v = v_[d];
      if (poly == 1) {  // van der Corput
        ++pos;
        for (int j = 0; j < kBits; ++j) v[j] = 1u << (kBits - 1 - j);
        continue;
      }
      const int s = std::bit_width(poly) - 1;
      std::array<std::uint32_t, kBits> mdir{};
      for (int j = 0; j < s; ++j) mdir[j] = kSobolData[pos++];
      for (int j = s; j < kBits; ++j) {
        std::uint32_t mj = mdir[j - s] ^ (mdir[j - s] << s);
        for (int k = 1; k < s; ++k) {
          const std::uint32_t a_k = (poly >> (s - k)) & 1u;
          if (a_k) mj ^= mdir[j - k] << k;
        }
        mdir[j] = mj;
      }
      for (int j = 0; j < kBits; ++j) v[j] = mdir[j] << (kBits - 1 - j);
    }
  }

  std::vector<std::array<std::uint32_t, kBits>> v_;
};

}  // namespace detail

/// Largest dimension supported by sobol_point.
inline constexpr std::size_t sobol_max_dim() { return detail::kSobolMaxDim; }

/// Point `index` of the unscrambled Sobol sequence in gray-code order
/// (index 0 is the origin). Direction numbers: Joe & Kuo, new-joe-kuo-6.21201.
inline Vector sobol_point(std::uint64_t index, std::size_t dim) {
  if (dim < 1 || dim > detail::kSobolMaxDim)
    throw UsageError("sobol_point: dimension must lie in [1, " + std::to_string(detail::kSobolMaxDim) + "]");
  if (index >= (std::uint64_t{1} << detail::SobolDirections::kBits))
    throw UsageError("sobol_point: index exceeds 2^32 - 1");
  const auto& table = detail::SobolDirections::instance();
  const std::uint64_t gray = index ^ (index >> 1);
  Vector out(static_cast<Eigen::Index>(dim));
  for (std::size_t d = 0; d < dim; ++d) {
    std::uint32_t acc = 0;
    for (int b = 0; b < detail::SobolDirections::kBits; ++b)
      if ((gray >> b) & 1u) acc ^= table[d][b];
    out[static_cast<Eigen::Index>(d)] = static_cast<double>(acc) * 0x1.0p-32;
  }
  return out;
}

/// Unit vector from Sobol point `index` mapped to [-1, 1]^n. Indices whose
/// image is (numerically) the origin are skipped; `index` is advanced past the
/// index actually used.
inline Vector dense_unit_direction(std::uint64_t& index, std::size_t n) {
  if (n < 1) throw UsageError("dense_unit_direction: n must be at least 1");
  for (;; ++index) {
    Vector w = 2.0 * sobol_point(index, n).array() - 1.0;
    const double norm = w.norm();
    if (norm >= 1e-12) {
      ++index;
      return w / norm;
    }
  }
}

/// Cursor over dense_unit_direction, starting at Sobol index 1 + seed.
class DenseDirectionStream {
 public:
  DenseDirectionStream(std::size_t n, std::uint64_t seed) : n_(n), index_(1 + seed) {}
  Vector next() { return dense_unit_direction(index_, n_); }
  std::uint64_t index() const { return index_; }

 private:
  std::size_t n_;
  std::uint64_t index_;
};

/// Nonzero with gcd(|d_1|, ..., |d_m|) = 1.
inline bool is_primitive(const IntVector& d) {
  std::int64_t g = 0;
  for (Eigen::Index i = 0; i < d.size(); ++i) g = std::gcd(g, d[i]);
  return g == 1;
}

inline bool is_feasible_direction(const IntVector& d, const IntVector& z, const Box& box) {
  if (d.size() != z.size() || z.size() != box.m()) throw UsageError("is_feasible_direction: dimension mismatch");
  return is_primitive(d) && box.contains_z(z + d);
}

struct IntVectorHash {
  std::size_t operator()(const IntVector& v) const noexcept {
    std::uint64_t h = 0x84222325cbf29ce4ULL ^ static_cast<std::uint64_t>(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) h = detail::splitmix64(h ^ static_cast<std::uint64_t>(v[i]));
    return static_cast<std::size_t>(h);
  }
};

struct IntVectorEqual {
  bool operator()(const IntVector& a, const IntVector& b) const noexcept {
    return a.size() == b.size() && a == b;
  }
};

using DirectionIndex = std::unordered_set<IntVector, IntVectorHash, IntVectorEqual>;

/// Halton-driven source of primitive integer vectors.
///
/// Each draw takes the next point u of the m-dimensional Halton sequence
/// (bases: first m primes), forms round(r * (2u - 1)) and divides by the gcd
/// of its entries. Zero vectors and vectors already known are rejected; after
/// 64 consecutive rejections the radius r doubles.
class PrimitiveDirectionGenerator {
 public:
  static constexpr int kRejectionsBeforeGrowth = 64;
  static constexpr std::int64_t kMaxRadius = std::int64_t{1} << 40;

  PrimitiveDirectionGenerator() = default;
  PrimitiveDirectionGenerator(std::size_t m, std::uint64_t seed)
      : m_(m), bases_(first_primes(m)), index_(1 + seed) {
    if (m < 1) throw UsageError("PrimitiveDirectionGenerator: m must be at least 1");
  }

  std::size_t m() const { return m_; }
  std::int64_t radius() const { return radius_; }
  std::uint64_t index() const { return index_; }

  template <class Known>
  IntVector next(const Known& is_known) {
    if (m_ == 1 && is_known(unit(1)) && is_known(unit(-1)))
      throw DirectionsExhausted("only +1 and -1 are primitive in one dimension");
    IntVector d(static_cast<Eigen::Index>(m_));
    for (;;) {
      const double r = static_cast<double>(radius_);
      for (std::size_t j = 0; j < m_; ++j) {
        const double u = halton(index_, bases_[j]);
        d[static_cast<Eigen::Index>(j)] = static_cast<std::int64_t>(std::llround(r * (2.0 * u - 1.0)));
      }
      ++index_;
      std::int64_t g = 0;
      for (Eigen::Index i = 0; i < d.size(); ++i) g = std::gcd(g, d[i]);
      if (g != 0) {
        if (g != 1) d /= g;
        if (!is_known(d)) {
          rejections_ = 0;
          return d;
        }
      }
      if (++rejections_ >= kRejectionsBeforeGrowth) {
        rejections_ = 0;
        if (radius_ >= kMaxRadius) throw DirectionsExhausted("direction generator radius overflow");
        radius_ *= 2;
      }
    }
  }

 private:
  IntVector unit(std::int64_t sign) const {
    IntVector v(1);
    v[0] = sign;
    return v;
  }

  std::size_t m_ = 0;
  std::vector<std::uint32_t> bases_;
  std::uint64_t index_ = 1;
  std::int64_t radius_ = 1;
  int rejections_ = 0;
};

/// Next primitive vector not contained in `existing`.
inline IntVector next_primitive_direction(PrimitiveDirectionGenerator& state, const DirectionIndex& existing) {
  return state.next([&](const IntVector& d) { return existing.count(d) > 0; });
}

/// Ordered primitive directions with per-direction integer stepsize memory,
/// the discrete sufficient-decrease parameter xi and the enrichment cursor.
class PrimitiveSet {
 public:
  PrimitiveSet() = default;
  PrimitiveSet(std::size_t m, double xi, std::size_t cap, std::uint64_t seed)
      : xi_(xi), cap_(cap), generator_(m, seed) {
    if (!(xi > 0.0)) throw UsageError("PrimitiveSet: xi must be positive");
    if (cap < 1) throw UsageError("PrimitiveSet: cap must be at least 1");
  }

  std::size_t size() const { return dirs_.size(); }
  std::size_t cap() const { return cap_; }
  bool full() const { return dirs_.size() >= cap_; }

  const IntVector& direction(std::size_t i) const { return dirs_[i]; }
  const std::vector<IntVector>& directions() const { return dirs_; }
  std::int64_t alpha(std::size_t i) const { return alphas_[i]; }
  const std::vector<std::int64_t>& alphas() const { return alphas_; }
  void set_alpha(std::size_t i, std::int64_t a) { alphas_[i] = a; }
  void reset_alphas() { std::fill(alphas_.begin(), alphas_.end(), std::int64_t{1}); }

  double xi() const { return xi_; }
  void set_xi(double xi) { xi_ = xi; }

  bool contains(const IntVector& d) const { return index_.count(d) > 0; }
  const DirectionIndex& index() const { return index_; }

  /// Appends a new primitive direction with stepsize memory 1.
  bool insert(const IntVector& d) {
    if (full() || !is_primitive(d) || contains(d)) return false;
    dirs_.push_back(d);
    alphas_.push_back(1);
    index_.insert(d);
    return true;
  }

  PrimitiveDirectionGenerator& generator() { return generator_; }
  const PrimitiveDirectionGenerator& generator() const { return generator_; }

 private:
  std::vector<IntVector> dirs_;
  std::vector<std::int64_t> alphas_;
  DirectionIndex index_;
  double xi_ = 1.0;
  std::size_t cap_ = 1;
  PrimitiveDirectionGenerator generator_;
};

/// D_0 = {+e_1, -e_1, ..., +e_m, -e_m}, truncated to `cap`; all memories 1.
inline PrimitiveSet initial_direction_set(std::size_t m, std::size_t cap, double xi0, std::uint64_t seed = 0) {
  PrimitiveSet set(m, xi0, cap, seed);
  for (std::size_t i = 0; i < m && !set.full(); ++i) {
    for (std::int64_t sign : {1, -1}) {
      IntVector e = IntVector::Zero(static_cast<Eigen::Index>(m));
      e[static_cast<Eigen::Index>(i)] = sign;
      if (!set.insert(e)) break;
    }
  }
  return set;
}

}  // namespace gdfl

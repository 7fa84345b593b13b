#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

/// Core value types and numeric utilities shared by every module:
/// the signature matrix, error types, deterministic summation and a
/// small stdlib-independent RNG used by all seeded generators.
namespace csgrav {

struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct JetExhausted : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SingularValue : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Tolerance below which a linear part is treated as non-invertible.
inline constexpr double kDetTol = 1e-12;

/// Diagonal quadratic form eta of dimension m with entries +-1.
/// Fixes the orthogonal group K = { A : A eta A^T = eta } and the
/// splitting gl(m) = k (+) p used throughout.
struct Signature {
  int m = 3;
  Eigen::VectorXd diag;

  Signature() : diag(3) { diag << -1.0, 1.0, 1.0; }

  Signature(int m_, Eigen::VectorXd d) : m(m_), diag(std::move(d)) {
    if (m < 1 || diag.size() != m) throw DimensionError("Signature: bad dimension");
    for (int i = 0; i < m; ++i)
      if (diag[i] != 1.0 && diag[i] != -1.0)
        throw std::invalid_argument("Signature: entries must be exactly +1 or -1");
  }

  static Signature lorentz3() { return Signature(); }

  Eigen::MatrixXd eta() const { return diag.asDiagonal(); }
  // eta is involutive, so it equals its own inverse.
  Eigen::MatrixXd eta_inv() const { return eta(); }
};

/// Levi-Civita symbol on three indices, eps_{012} = +1 (0-based).
inline double levi_civita3(int i, int j, int k) {
  if (i == j || j == k || i == k) return 0.0;
  if ((i == 0 && j == 1 && k == 2) || (i == 1 && j == 2 && k == 0) ||
      (i == 2 && j == 0 && k == 1))
    return 1.0;
  return -1.0;
}

namespace detail {
inline double pairwise_sum_range(const double* v, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += v[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum_range(v, half) + pairwise_sum_range(v + half, n - half);
}
}  // namespace detail

/// Deterministic pairwise tree summation in index order. The reduction
/// shape depends only on the length, so results are bit-identical
/// regardless of how the inputs were produced (serial or parallel fill).
inline double pairwise_sum(const std::vector<double>& v) {
  return v.empty() ? 0.0 : detail::pairwise_sum_range(v.data(), v.size());
}

namespace threads {
inline int& count() {
  static int n = 1;
  return n;
}
inline void set(int n) { count() = n < 1 ? 1 : n; }
inline int get() { return count(); }
}  // namespace threads

/// Runs fn(i) for i in [0, n) over the configured worker count. Each
/// index is processed exactly once and workers write disjoint slots,
/// so output never depends on the thread count.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  const int workers = threads::get();
  if (workers <= 1 || n < 64) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  const std::size_t chunk = (n + workers - 1) / static_cast<std::size_t>(workers);
  for (int w = 0; w < workers; ++w) {
    const std::size_t lo = static_cast<std::size_t>(w) * chunk;
    if (lo >= n) break;
    const std::size_t hi = std::min(n, lo + chunk);
    pool.emplace_back([lo, hi, &fn] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

/// SplitMix64 generator. Used instead of std::mt19937 distributions so
/// that seeded runs do not depend on the standard library implementation.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1).
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Uniform integer in [lo, hi] inclusive.
  int uniform_int(int lo, int hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<int>(next_u64() % span);
  }

  Eigen::VectorXd uniform_vector(int n, double lo, double hi) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = uniform(lo, hi);
    return v;
  }

  Eigen::MatrixXd uniform_matrix(int r, int c, double lo, double hi) {
    Eigen::MatrixXd m(r, c);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j) m(i, j) = uniform(lo, hi);
    return m;
  }

 private:
  std::uint64_t state_;
};

}  // namespace csgrav

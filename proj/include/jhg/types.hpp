#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace jhg {

using PlayerId = std::size_t;
using Rng = std::mt19937_64;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dense row-major matrix; small sizes only (player counts stay under 64).
template <class T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<T> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const T> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  const std::vector<T>& data() const { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

using RealMatrix = Matrix<double>;
using AllocationMatrix = Matrix<int>;

/// One player's token allocation for one round. The entry at `owner` is the
/// number of kept tokens; other entries are gives (> 0) or attacks (< 0).
struct AllocationVector {
  PlayerId owner = 0;
  std::vector<int> tokens;

  AllocationVector() = default;
  AllocationVector(PlayerId who, std::vector<int> entries) : owner(who), tokens(std::move(entries)) {}

  std::size_t size() const { return tokens.size(); }
  int keep() const { return tokens.at(owner); }

  static AllocationVector all_keep(PlayerId who, std::size_t players, int budget) {
    AllocationVector a(who, std::vector<int>(players, 0));
    a.tokens[who] = budget;
    return a;
  }

  bool operator==(const AllocationVector&) const = default;
};

inline AllocationVector row_allocation(const AllocationMatrix& m, PlayerId who) {
  auto r = m.row(who);
  return AllocationVector(who, std::vector<int>(r.begin(), r.end()));
}

inline AllocationMatrix stack_allocations(std::span<const AllocationVector> rows) {
  const std::size_t n = rows.size();
  AllocationMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i].size() != n) throw Error("allocation row " + std::to_string(i) + " has wrong length");
    for (std::size_t j = 0; j < n; ++j) m(i, j) = rows[i].tokens[j];
  }
  return m;
}

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}
}  // namespace detail

/// Deterministic child generator derived from a seed and a few stream labels.
inline Rng derive_rng(std::uint64_t seed, std::uint64_t a = 0, std::uint64_t b = 0, std::uint64_t c = 0) {
  std::uint64_t h = detail::splitmix64(seed);
  for (std::uint64_t v : {a, b, c}) h = detail::splitmix64(h ^ v);
  return Rng(h);
}

}  // namespace jhg

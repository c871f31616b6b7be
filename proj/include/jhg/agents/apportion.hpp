#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

namespace jhg::detail {

/// Splits `total` integer tokens proportionally to non-negative weights using
/// largest remainders; ties go to the lower index. All-zero weights yield zeros.
inline std::vector<int> apportion(int total, std::span<const double> weights) {
  std::vector<int> out(weights.size(), 0);
  const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (total <= 0 || sum <= 0.0) return out;
  std::vector<double> rem(weights.size());
  int used = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double exact = total * weights[i] / sum;
    out[i] = static_cast<int>(std::floor(exact));
    rem[i] = exact - out[i];
    used += out[i];
  }
  std::vector<std::size_t> order(weights.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rem[a] > rem[b]; });
  for (std::size_t k = 0; used < total && k < order.size(); ++k) {
    if (weights[order[k]] <= 0.0) continue;
    ++out[order[k]];
    ++used;
  }
  return out;
}

inline int round_tokens(double x) { return static_cast<int>(std::lround(x)); }

}  // namespace jhg::detail

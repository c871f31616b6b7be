#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/distributions/chi_squared.hpp>

#include "jhg/engine.hpp"

namespace jhg {

inline constexpr std::size_t kMetricCount = 11;

inline constexpr std::array<std::string_view, kMetricCount> kMetricNames = {
    "mean_popularity", "gini_index",          "pct_give",  "pct_keep", "pct_take",    "evolution_coefficient",
    "immediate_reciprocity", "overall_reciprocity", "density", "entropy", "polarization"};

struct MetricVector {
  double mean_popularity = 0;
  double gini_index = 0;
  double pct_give = 0;
  double pct_keep = 0;
  double pct_take = 0;
  double evolution_coefficient = 0;
  double immediate_reciprocity = 0;
  double overall_reciprocity = 0;
  double density = 0;
  double entropy = 0;
  double polarization = 0;

  std::array<double, kMetricCount> values() const {
    return {mean_popularity,       gini_index,          pct_give, pct_keep, pct_take,    evolution_coefficient,
            immediate_reciprocity, overall_reciprocity, density,  entropy,  polarization};
  }
  static MetricVector from_values(const std::array<double, kMetricCount>& v) {
    return {v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8], v[9], v[10]};
  }
  bool operator==(const MetricVector&) const = default;
};

struct PopulationSample {
  std::string label;
  std::vector<MetricVector> games;
};

namespace detail {
inline void require_rounds(const GameLog& log, int min_rounds, const char* what) {
  if (log.rounds() < min_rounds)
    throw Error(std::string(what) + " needs at least " + std::to_string(min_rounds) + " round(s)");
}
}  // namespace detail

struct ActionShares {
  double give = 0, keep = 0, take = 0;
};

/// Percentages of all allocated tokens used to give, keep and take.
inline ActionShares action_shares(const GameLog& log) {
  detail::require_rounds(log, 1, "action_shares");
  double give = 0, keep = 0, take = 0;
  for (const auto& x : log.allocations)
    for (std::size_t i = 0; i < x.rows(); ++i)
      for (std::size_t j = 0; j < x.cols(); ++j) {
        const int v = x(i, j);
        if (i == j)
          keep += v;
        else if (v > 0)
          give += v;
        else
          take -= v;
      }
  const double total = give + keep + take;
  return {100.0 * give / total, 100.0 * keep / total, 100.0 * take / total};
}

/// Standard Gini coefficient; an all-zero vector gives 0.
inline double gini(std::span<const double> p) {
  const double n = static_cast<double>(p.size());
  const double sum = std::accumulate(p.begin(), p.end(), 0.0);
  if (p.empty() || sum <= 0.0) return 0.0;
  double diff = 0.0;
  for (double a : p)
    for (double b : p) diff += std::abs(a - b);
  return diff / (2.0 * n * sum);
}

/// Gini of the post-round popularity vectors, averaged over rounds.
inline double gini_index(const GameLog& log) {
  detail::require_rounds(log, 1, "gini_index");
  double s = 0.0;
  for (int t = 1; t <= log.rounds(); ++t) s += gini(log.popularity[t]);
  return s / log.rounds();
}

/// Mean post-round popularity relative to the initial mean, averaged over rounds.
inline double mean_popularity(const GameLog& log) {
  detail::require_rounds(log, 1, "mean_popularity");
  auto mean = [](const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); };
  const double base = mean(log.popularity.front());
  if (base <= 0.0) throw Error("mean_popularity: initial mean popularity is zero");
  double s = 0.0;
  for (int t = 1; t <= log.rounds(); ++t) s += mean(log.popularity[t]);
  return s / (log.rounds() * base);
}

/// Mean normalized L1 change of each player's allocation between consecutive rounds.
inline double evolution_coefficient(const GameLog& log, int lag = 1) {
  detail::require_rounds(log, lag + 1, "evolution_coefficient");
  const std::size_t n = log.config.player_count;
  const double N = log.config.tokens_per_round;
  double s = 0.0;
  std::size_t count = 0;
  for (int t = 0; t + lag < log.rounds(); ++t)
    for (std::size_t i = 0; i < n; ++i) {
      double d = 0.0;
      for (std::size_t j = 0; j < n; ++j) d += std::abs(log.allocations[t + lag](i, j) - log.allocations[t](i, j));
      s += d / (2.0 * N);
      ++count;
    }
  return s / static_cast<double>(count);
}

struct Reciprocity {
  double immediate = 0, overall = 0;
};

/// Immediate: share of gives answered by the recipient in the next round.
/// Overall: min-overlap of whole-game cumulative gives in both directions.
inline Reciprocity reciprocity(const GameLog& log) {
  detail::require_rounds(log, 2, "reciprocity");
  const std::size_t n = log.config.player_count;
  auto give = [](const AllocationMatrix& x, std::size_t i, std::size_t j) { return std::max(0, x(i, j)); };
  double matched = 0.0, offered = 0.0;
  for (int t = 0; t + 1 < log.rounds(); ++t)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        const int g = give(log.allocations[t], i, j);
        offered += g;
        matched += std::min(g, give(log.allocations[t + 1], j, i));
      }
  RealMatrix total(n, n);
  for (const auto& x : log.allocations)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) total(i, j) += give(x, i, j);
  double both = 0.0, all = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      both += std::min(total(i, j), total(j, i));
      all += total(i, j);
    }
  return {offered > 0 ? matched / offered : 0.0, all > 0 ? both / all : 0.0};
}

/// Share of ordered pairs with a positive give, averaged over rounds.
inline double density(const GameLog& log) {
  detail::require_rounds(log, 1, "density");
  const std::size_t n = log.config.player_count;
  double s = 0.0;
  for (const auto& x : log.allocations) {
    std::size_t links = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) links += i != j && x(i, j) > 0;
    s += static_cast<double>(links) / static_cast<double>(n * (n - 1));
  }
  return s / log.rounds();
}

/// Normalized Shannon entropy of each player's give distribution, averaged
/// over players and rounds; non-givers count as 0.
inline double entropy(const GameLog& log) {
  detail::require_rounds(log, 1, "entropy");
  const std::size_t n = log.config.player_count;
  if (n < 3) return 0.0;
  const double norm = std::log(static_cast<double>(n - 1));
  double s = 0.0;
  for (const auto& x : log.allocations)
    for (std::size_t i = 0; i < n; ++i) {
      double total = 0.0;
      for (std::size_t j = 0; j < n; ++j)
        if (i != j && x(i, j) > 0) total += x(i, j);
      if (total <= 0.0) continue;
      double h = 0.0;
      for (std::size_t j = 0; j < n; ++j)
        if (i != j && x(i, j) > 0) {
          const double q = x(i, j) / total;
          h -= q * std::log(q);
        }
      s += h / norm;
    }
  return s / static_cast<double>(n * log.rounds());
}

/// Modularity of `groups` (community label per node) on a symmetric weight matrix.
inline double modularity(const RealMatrix& w, const std::vector<std::size_t>& groups) {
  const std::size_t n = w.rows();
  std::vector<double> k(n, 0.0);
  double two_m = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      k[i] += w(i, j);
      two_m += w(i, j);
    }
  if (two_m <= 0.0) return 0.0;
  double q = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (groups[i] == groups[j]) q += w(i, j) - k[i] * k[j] / two_m;
  return q / two_m;
}

/// Greedy agglomeration (Clauset-Newman-Moore style): merge the community pair
/// with the largest modularity gain while the gain is positive.
inline std::vector<std::size_t> greedy_communities(const RealMatrix& w) {
  const std::size_t n = w.rows();
  std::vector<std::size_t> label(n);
  std::iota(label.begin(), label.end(), 0);
  double two_m = 0.0;
  for (double x : w.data()) two_m += x;
  if (two_m <= 0.0) return label;

  // e(a,b): fraction of edge ends between communities; a(c): degree fraction.
  RealMatrix e(n, n);
  std::vector<double> a(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      e(i, j) = w(i, j) / two_m;
      a[i] += e(i, j);
    }
  std::vector<char> alive(n, 1);
  for (;;) {
    double best = 0.0;
    std::size_t bi = n, bj = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (!alive[i]) continue;
      for (std::size_t j = i + 1; j < n; ++j) {
        if (!alive[j]) continue;
        const double gain = 2.0 * (e(i, j) - a[i] * a[j]);
        if (gain > best + 1e-15) {
          best = gain;
          bi = i;
          bj = j;
        }
      }
    }
    if (bi == n) break;
    const double internal = e(bi, bi) + e(bj, bj) + 2.0 * e(bi, bj);
    for (std::size_t k = 0; k < n; ++k) {
      if (k == bi || k == bj) continue;
      e(bi, k) += e(bj, k);
      e(k, bi) = e(bi, k);
    }
    e(bi, bi) = internal;
    a[bi] += a[bj];
    alive[bj] = 0;
    for (std::size_t v = 0; v < n; ++v)
      if (label[v] == bj) label[v] = bi;
  }
  return label;
}

inline RealMatrix symmetric_give_matrix(const GameLog& log) {
  const std::size_t n = log.config.player_count;
  RealMatrix w(n, n);
  for (const auto& x : log.allocations)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j && x(i, j) > 0) {
          w(i, j) += x(i, j);
          w(j, i) += x(i, j);
        }
  return w;
}

/// Modularity of the greedy partition of the symmetrized cumulative give network, in [0,1].
inline double polarization(const GameLog& log) {
  detail::require_rounds(log, 1, "polarization");
  const RealMatrix w = symmetric_give_matrix(log);
  return std::clamp(modularity(w, greedy_communities(w)), 0.0, 1.0);
}

inline MetricVector compute_metric_vector(const GameLog& log) {
  MetricVector m;
  m.mean_popularity = mean_popularity(log);
  m.gini_index = gini_index(log);
  const auto shares = action_shares(log);
  m.pct_give = shares.give;
  m.pct_keep = shares.keep;
  m.pct_take = shares.take;
  m.evolution_coefficient = log.rounds() >= 2 ? evolution_coefficient(log) : 0.0;
  if (log.rounds() >= 2) {
    const auto r = reciprocity(log);
    m.immediate_reciprocity = r.immediate;
    m.overall_reciprocity = r.overall;
  }
  m.density = density(log);
  m.entropy = entropy(log);
  m.polarization = polarization(log);
  return m;
}

struct Comparison {
  double mahalanobis = 0.0;
  double p_value = 1.0;
};

inline constexpr double kCovarianceRidge = 1e-6;

/// Mahalanobis distance of the agent mean from the human sample (human
/// covariance with a small ridge) and its chi-square tail probability.
inline Comparison compare_populations(const PopulationSample& agents, const PopulationSample& humans) {
  if (humans.games.size() < 2) throw Error("compare_populations: need at least two human games");
  if (agents.games.empty()) throw Error("compare_populations: no agent games");
  constexpr int d = static_cast<int>(kMetricCount);
  using Vec = Eigen::Matrix<double, d, 1>;
  using Mat = Eigen::Matrix<double, d, d>;
  auto to_vec = [](const MetricVector& m) {
    const auto v = m.values();
    return Vec(Eigen::Map<const Vec>(v.data()));
  };
  Vec mu_h = Vec::Zero(), mu_a = Vec::Zero();
  for (const auto& g : humans.games) mu_h += to_vec(g);
  mu_h /= static_cast<double>(humans.games.size());
  for (const auto& g : agents.games) mu_a += to_vec(g);
  mu_a /= static_cast<double>(agents.games.size());

  Mat cov = Mat::Zero();
  for (const auto& g : humans.games) {
    const Vec c = to_vec(g) - mu_h;
    cov += c * c.transpose();
  }
  cov /= static_cast<double>(humans.games.size() - 1);
  const double trace = cov.trace();
  if (!(trace > 0.0)) throw Error("compare_populations: human covariance is singular");
  cov.diagonal().array() += kCovarianceRidge * trace / d;
  const Eigen::LLT<Mat> llt(cov);
  if (llt.info() != Eigen::Success) throw Error("compare_populations: covariance not positive definite");

  const Vec diff = mu_a - mu_h;
  const double d2 = std::max(0.0, diff.dot(llt.solve(diff)));
  const boost::math::chi_squared chi(static_cast<double>(d));
  return {std::sqrt(d2), d2 == 0.0 ? 1.0 : boost::math::cdf(boost::math::complement(chi, d2))};
}

}  // namespace jhg

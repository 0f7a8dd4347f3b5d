#pragma once

// Reference implementations used only by the tests. They follow the textbook
// definitions directly and share no code with the library beyond its types.

#include "harmrec/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

namespace oracle {

using harmrec::ItemSet;
using harmrec::Matrix;
using harmrec::Vector;

inline Vector plain_scores(const Matrix& items, const Vector& u) {
  Vector s(items.cols());
  for (Eigen::Index v = 0; v < items.cols(); ++v) {
    double dot = 0.0;
    for (Eigen::Index i = 0; i < items.rows(); ++i) dot += items(i, v) * u(i);
    s(v) = std::exp(dot);
  }
  return s;
}

// Two-stage choice: accept the recommendation with probability g(s_E) and pick within E
// proportionally to score, otherwise pick from the whole catalog proportionally to score.
inline Vector choice_given_rec(const Matrix& items, const ItemSet& rec, const Vector& u, double c) {
  const Vector s = plain_scores(items, u);
  double s_rec = 0.0;
  for (int v : rec) s_rec += s(v);
  const double accept = s_rec / (s_rec + c);
  Vector p = (1.0 - accept) * s / s.sum();
  for (int v : rec) p(v) += accept * s(v) / s_rec;
  return p;
}

// Monte-Carlo simulation of the same two-stage process.
inline Vector simulate_choice(const Matrix& items, const ItemSet& rec, const Vector& u, double c,
                              std::size_t draws, std::uint64_t seed) {
  const Vector s = plain_scores(items, u);
  double s_rec = 0.0;
  for (int v : rec) s_rec += s(v);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> rec_w, all_w(s.data(), s.data() + s.size());
  for (int v : rec) rec_w.push_back(s(v));
  std::discrete_distribution<int> in_rec(rec_w.begin(), rec_w.end());
  std::discrete_distribution<int> organic(all_w.begin(), all_w.end());
  Vector counts = Vector::Zero(s.size());
  for (std::size_t t = 0; t < draws; ++t) {
    if (!rec.empty() && unif(rng) < s_rec / (s_rec + c)) {
      counts(rec[static_cast<std::size_t>(in_rec(rng))]) += 1.0;
    } else {
      counts(organic(rng)) += 1.0;
    }
  }
  return counts / static_cast<double>(draws);
}

// Euclidean projection onto {y >= 0, sum y = r} by enumerating supports and checking KKT.
inline Vector kkt_simplex(const Vector& x, double r = 1.0) {
  const auto n = static_cast<int>(x.size());
  for (int mask = 1; mask < (1 << n); ++mask) {
    double sum = 0.0;
    int size = 0;
    for (int i = 0; i < n; ++i) {
      if (mask >> i & 1) {
        sum += x(i);
        ++size;
      }
    }
    const double tau = (sum - r) / size;
    bool ok = true;
    Vector y = Vector::Zero(n);
    for (int i = 0; i < n && ok; ++i) {
      if (mask >> i & 1) {
        y(i) = x(i) - tau;
        ok = y(i) >= -1e-12;
      } else {
        ok = x(i) - tau <= 1e-12;
      }
    }
    if (ok) return y.cwiseMax(0.0);
  }
  return Vector::Constant(n, std::numeric_limits<double>::quiet_NaN());
}

// Euclidean projection onto {0 <= y <= 1, sum y <= k} by enumerating which coordinates sit at
// 0, at 1 or strictly between, for both states of the sum constraint, and checking KKT.
inline Vector kkt_capped_simplex(const Vector& x, double k) {
  const auto n = static_cast<int>(x.size());
  int total = 1;
  for (int i = 0; i < n; ++i) total *= 3;
  for (int code = 0; code < total; ++code) {
    std::vector<int> state(static_cast<std::size_t>(n));
    int rest = code;
    int free = 0, ones = 0;
    double free_sum = 0.0;
    for (int i = 0; i < n; ++i) {
      state[static_cast<std::size_t>(i)] = rest % 3;  // 0: lower, 1: free, 2: upper
      rest /= 3;
      if (state[static_cast<std::size_t>(i)] == 1) {
        ++free;
        free_sum += x(i);
      }
      if (state[static_cast<std::size_t>(i)] == 2) ++ones;
    }
    for (int active = 0; active < 2; ++active) {
      double lo = 0.0, hi = active ? std::numeric_limits<double>::infinity() : 0.0;
      if (active && free > 0) lo = hi = (free_sum + ones - k) / free;
      if (active && free == 0 && std::abs(ones - k) > 1e-12) continue;
      // the multiplier mu must satisfy every coordinate's sign condition
      for (int i = 0; i < n; ++i) {
        const int st = state[static_cast<std::size_t>(i)];
        if (st == 0) lo = std::max(lo, x(i));       // x_i - mu <= 0
        if (st == 2) hi = std::min(hi, x(i) - 1.0); // x_i - mu >= 1
      }
      if (lo > hi + 1e-12 || hi < -1e-12) continue;
      const double mu = active ? std::max(lo, 0.0) : 0.0;
      if (!active && lo > 1e-12) continue;
      Vector y(n);
      bool ok = true;
      for (int i = 0; i < n && ok; ++i) {
        const int st = state[static_cast<std::size_t>(i)];
        y(i) = st == 0 ? 0.0 : st == 2 ? 1.0 : x(i) - mu;
        if (st == 1) ok = y(i) >= -1e-12 && y(i) <= 1.0 + 1e-12;
      }
      if (!ok) continue;
      if (active && std::abs(y.sum() - k) > 1e-9) continue;
      if (!active && y.sum() > k + 1e-12) continue;
      return y;
    }
  }
  return Vector::Constant(n, std::numeric_limits<double>::quiet_NaN());
}

// All subsets of `items` with at most k elements.
inline std::vector<ItemSet> small_subsets(const ItemSet& items, int k) {
  std::vector<ItemSet> out;
  const auto n = static_cast<int>(items.size());
  for (int mask = 0; mask < (1 << n); ++mask) {
    ItemSet set;
    for (int i = 0; i < n; ++i) {
      if (mask >> i & 1) set.push_back(items[static_cast<std::size_t>(i)]);
    }
    if (static_cast<int>(set.size()) <= k) out.push_back(set);
  }
  return out;
}

}  // namespace oracle

#include "harmrec/projection.hpp"

#include <algorithm>
#include <functional>
#include <vector>

namespace harmrec {

Vector project_simplex(const Vector& x, double radius) {
  if (x.size() == 0) return x;
  if (!x.allFinite()) throw ConfigError("cannot project a non-finite vector");
  std::vector<double> sorted(x.data(), x.data() + x.size());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double threshold = 0.0;
  for (std::size_t j = 0; j < sorted.size(); ++j) {
    cumulative += sorted[j];
    const double candidate = (cumulative - radius) / static_cast<double>(j + 1);
    if (sorted[j] - candidate > 0.0) threshold = candidate;
  }
  return (x.array() - threshold).max(0.0).matrix();
}

Vector project_capped_simplex(const Vector& x, double k) {
  if (!x.allFinite()) throw ConfigError("cannot project a non-finite vector");
  auto clipped = [&](double tau) { return (x.array() - tau).max(0.0).min(1.0).matrix().eval(); };
  Vector y = clipped(0.0);
  if (y.sum() <= k) return y;

  // sum(clip(x - tau)) is piecewise linear and non-increasing in tau with kinks at
  // x_i - 1 and x_i; locate the segment where it crosses k and solve it exactly.
  std::vector<double> kinks;
  kinks.reserve(static_cast<std::size_t>(2 * x.size()));
  for (Index i = 0; i < x.size(); ++i) {
    if (x(i) - 1.0 > 0.0) kinks.push_back(x(i) - 1.0);
    if (x(i) > 0.0) kinks.push_back(x(i));
  }
  std::sort(kinks.begin(), kinks.end());
  double lo = 0.0;
  for (double hi : kinks) {
    if (clipped(hi).sum() <= k) {
      const double mid = 0.5 * (lo + hi);
      double free_sum = 0.0;
      double ones = 0.0;
      int free_count = 0;
      for (Index i = 0; i < x.size(); ++i) {
        const double t = x(i) - mid;
        if (t >= 1.0) {
          ones += 1.0;
        } else if (t > 0.0) {
          free_sum += x(i);
          ++free_count;
        }
      }
      const double tau = free_count > 0 ? (free_sum + ones - k) / free_count : hi;
      return clipped(std::clamp(tau, lo, hi));
    }
    lo = hi;
  }
  return clipped(lo);
}

}  // namespace harmrec

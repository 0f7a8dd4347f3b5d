#pragma once

#include "harmrec/types.hpp"

namespace harmrec {

/// Euclidean projection onto {y >= 0, sum(y) = radius}. O(m log m).
Vector project_simplex(const Vector& x, double radius = 1.0);

/// Euclidean projection onto {0 <= y <= 1, sum(y) <= k}. O(m log m).
Vector project_capped_simplex(const Vector& x, double k);

}  // namespace harmrec

#pragma once

#include <optional>

#include "brace/environment.hpp"

namespace brace {

// Maximum absolute row sum (the l-infinity operator norm).
double inf_norm(const Matrix& m);

double sigma_min(const Matrix& m);

// Left inverse of a square or tall matrix with full column rank: the ordinary
// inverse when square, the least-squares pseudo-inverse when tall. Absent when
// the matrix is wide or its smallest singular value is <= kSingularThreshold.
struct LeftInverse {
  Matrix matrix;
  double inf_norm = 0.0;
  double sigma_min = 0.0;
};

std::optional<LeftInverse> left_inverse(const Matrix& m);

}  // namespace brace

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "monocon/errors.hpp"

namespace monocon {

// Dense row-major matrices are the universal carrier for batches, weights,
// gradients and spectra. Training and analysis run in 64-bit throughout;
// 32-bit appears only as the EMB1 storage type.
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Matrix = MatrixX<double>;
using Index = Eigen::Index;

inline bool all_finite(const Matrix& m) {
  return m.allFinite();
}

// External inputs (files, user-provided matrices) must be finite; values
// produced internally are not re-checked on the hot path.
inline void require_finite(const Matrix& m, const std::string& context) {
  if (!m.allFinite()) {
    throw DomainError(context + ": non-finite entry");
  }
}

inline std::string shape_str(Index rows, Index cols) {
  return std::to_string(rows) + "x" + std::to_string(cols);
}

inline std::string shape_str(const Matrix& m) {
  return shape_str(m.rows(), m.cols());
}

}  // namespace monocon

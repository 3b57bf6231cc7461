#pragma once

#include <Eigen/Dense>
#include <limits>
#include <span>
#include <vector>

namespace gigan {

/// Row-major dense matrix; rows are samples throughout the library.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Log-probability of an impossible event. Produced only by explicit zero
/// checks, never by overflow.
inline constexpr double kLogZero = -std::numeric_limits<double>::infinity();

/// Columns of `m` listed in `cols`, in that order.
Matrix slice_columns(const Matrix& m, const std::vector<int>& cols);
/// Rows of `m` listed in `rows`, in that order.
Matrix slice_rows(const Matrix& m, std::span<const int> rows);

}  // namespace gigan

#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace rtlr {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
// Compressed-row storage with sorted column indices, so assembly is
// reproducible and row blocks are contiguous during sweeps.
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Triplet = Eigen::Triplet<double>;

}  // namespace rtlr

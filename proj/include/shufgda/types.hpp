#ifndef SHUFGDA_TYPES_HPP
#define SHUFGDA_TYPES_HPP

#include <Eigen/Dense>

#include <cstdint>

namespace shufgda {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
/// Row-major storage so that a sample (one row) is contiguous.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Index = Eigen::Index;

}  // namespace shufgda

#endif  // SHUFGDA_TYPES_HPP

#pragma once

#include <complex>
#include <Eigen/Dense>

namespace sonn {

using cd = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

// Per-node matrices never exceed 10x10 (n <= 5); fixed capacity avoids heap traffic in hot loops.
using SMat = Eigen::Matrix<cd, Eigen::Dynamic, Eigen::Dynamic, 0, 10, 10>;

inline constexpr int kMaxRank = 5;

}  // namespace sonn

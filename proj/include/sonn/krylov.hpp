#pragma once

#include <functional>

#include "sonn/types.hpp"

namespace sonn {

// Krylov vectors are nodes x k complex arrays; the inner product is the Frobenius one.
using KVec = Eigen::MatrixXcd;
using LinearMap = std::function<void(const KVec& in, KVec& out)>;

struct GmresResult {
  int iterations = 0;
  double relativeResidual = 1.0;
  bool converged = false;
};

// Right-preconditioned restarted GMRES for A x = b; x holds the initial guess on entry.
GmresResult gmres(const LinearMap& A, const LinearMap& Minv, const KVec& b, KVec& x, double relTol, int restart,
                  int maxIterations);

}  // namespace sonn

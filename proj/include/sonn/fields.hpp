#pragma once

#include <vector>

#include "sonn/types.hpp"

namespace sonn {

// Per-node dim x dim complex matrices. Column a + b*dim of data holds entry (a,b) across all nodes,
// so entrywise differentiation works on contiguous columns.
struct MatrixField {
  int dim = 0;
  Eigen::MatrixXcd data;

  MatrixField() = default;
  MatrixField(int nodes, int dim) : dim(dim), data(Eigen::MatrixXcd::Zero(nodes, dim * dim)) {}

  int nodes() const { return static_cast<int>(data.rows()); }
  static int col(int a, int b, int dim) { return a + b * dim; }

  SMat at(int p) const {
    SMat M(dim, dim);
    for (int b = 0; b < dim; ++b)
      for (int a = 0; a < dim; ++a) M(a, b) = data(p, a + b * dim);
    return M;
  }

  template <typename Derived>
  void set(int p, const Eigen::MatrixBase<Derived>& M) {
    for (int b = 0; b < dim; ++b)
      for (int a = 0; a < dim; ++a) data(p, a + b * dim) = M(a, b);
  }

  Vec entry(int a, int b) const { return data.col(a + b * dim); }
};

}  // namespace sonn

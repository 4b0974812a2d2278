#include "sonn/krylov.hpp"

#include <cmath>
#include <vector>

namespace sonn {

namespace {

cd dot(const KVec& a, const KVec& b) { return (a.conjugate().cwiseProduct(b)).sum(); }

}  // namespace

GmresResult gmres(const LinearMap& A, const LinearMap& Minv, const KVec& b, KVec& x, double relTol, int restart,
                  int maxIterations) {
  GmresResult res;
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    x.setZero(b.rows(), b.cols());
    res.converged = true;
    res.relativeResidual = 0.0;
    return res;
  }
  KVec r(b.rows(), b.cols()), w(b.rows(), b.cols()), z(b.rows(), b.cols());
  std::vector<KVec> V;
  Eigen::MatrixXcd Hm;
  std::vector<cd> cs, sn, gvec;
  int total = 0;
  while (total < maxIterations) {
    A(x, w);
    r = b - w;
    double beta = r.norm();
    res.relativeResidual = beta / bnorm;
    if (res.relativeResidual <= relTol) {
      res.converged = true;
      break;
    }
    const int m = restart;
    V.assign(1, r / beta);
    Hm.setZero(m + 1, m);
    cs.assign(m, 0.0);
    sn.assign(m, 0.0);
    gvec.assign(m + 1, 0.0);
    gvec[0] = beta;
    int k = 0;
    for (; k < m && total < maxIterations; ++k, ++total) {
      Minv(V[k], z);
      A(z, w);
      for (int i = 0; i <= k; ++i) {
        Hm(i, k) = dot(V[i], w);
        w -= Hm(i, k) * V[i];
      }
      // one reorthogonalization pass keeps the basis clean for long cycles
      for (int i = 0; i <= k; ++i) {
        const cd c = dot(V[i], w);
        Hm(i, k) += c;
        w -= c * V[i];
      }
      const double hnext = w.norm();
      Hm(k + 1, k) = hnext;
      for (int i = 0; i < k; ++i) {
        const cd t = std::conj(cs[i]) * Hm(i, k) + std::conj(sn[i]) * Hm(i + 1, k);
        Hm(i + 1, k) = -sn[i] * Hm(i, k) + cs[i] * Hm(i + 1, k);
        Hm(i, k) = t;
      }
      const cd a = Hm(k, k);
      const double bb = std::abs(Hm(k + 1, k));
      const double den = std::sqrt(std::norm(a) + bb * bb);
      if (den == 0.0) {
        cs[k] = 1.0;
        sn[k] = 0.0;
      } else {
        cs[k] = a / den;
        sn[k] = Hm(k + 1, k) / den;
      }
      Hm(k, k) = std::conj(cs[k]) * a + std::conj(sn[k]) * Hm(k + 1, k);
      Hm(k + 1, k) = 0.0;
      gvec[k + 1] = -sn[k] * gvec[k];
      gvec[k] = std::conj(cs[k]) * gvec[k];
      res.relativeResidual = std::abs(gvec[k + 1]) / bnorm;
      if (hnext > 0.0) V.push_back(w / hnext);
      if (res.relativeResidual <= relTol || hnext == 0.0) {
        ++k;
        ++total;
        break;
      }
    }
    // back substitution on the triangular system
    Eigen::VectorXcd y(k);
    for (int i = k - 1; i >= 0; --i) {
      cd s = gvec[i];
      for (int j = i + 1; j < k; ++j) s -= Hm(i, j) * y(j);
      y(i) = s / Hm(i, i);
    }
    KVec update = KVec::Zero(b.rows(), b.cols());
    for (int i = 0; i < k; ++i) update += y(i) * V[i];
    Minv(update, z);
    x += z;
    if (res.relativeResidual <= relTol) {
      res.converged = true;
      break;
    }
  }
  res.iterations = total;
  return res;
}

}  // namespace sonn

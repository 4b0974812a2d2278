#include "sonn/bundle.hpp"

#include <cmath>
#include <stdexcept>

namespace sonn {

HiggsTuple HiggsTuple::zero(int n) {
  HiggsTuple q;
  q.n = n;
  q.coefficients.assign(n, {});
  return q;
}

int HiggsTuple::degree(int j) const {
  if (j < 1 || j > n) throw std::out_of_range("HiggsTuple::degree: j out of range");
  return j == n ? n : 2 * j;
}

cd HiggsTuple::eval(int j, cd z) const {
  if (j < 1 || j > n) throw std::out_of_range("HiggsTuple::eval: j out of range");
  const auto& c = coefficients[j - 1];
  cd acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * z + *it;
  return acc;
}

bool HiggsTuple::is_zero() const {
  for (const auto& c : coefficients)
    for (const auto& a : c)
      if (a != cd(0.0)) return false;
  return true;
}

std::vector<int> FiltrationIndex::indices(int k) const {
  if (k < 0 || k > 2 * n) throw std::out_of_range("FiltrationIndex::indices: k out of range");
  std::vector<int> out(k);
  for (int i = 0; i < k; ++i) out[i] = i;
  return out;
}

namespace {

int weight_index_of_power(int n, int p) {
  if (p > 0) return n - p - 1;
  if (p == 0) return n - 1;
  return n - p;
}

}  // namespace

Mat BundleSpec::sigma_matrix() const {
  const int d = 2 * n;
  Mat S = Mat::Zero(d, d);
  for (int b = 0; b < d; ++b) S(b, sigma[b]) = 1.0;
  return S;
}

Mat BundleSpec::qtilde() const {
  Mat Q = Mat::Zero(2 * n, 2 * n);
  Q.topLeftCorner(n, n) = QV.entries;
  Q.bottomRightCorner(n, n) = -QW.entries;
  return Q;
}

BundleSpec build_bundle(int n) {
  if (n < 1) throw std::invalid_argument("build_bundle: n must be >= 1");
  if (n > kMaxRank) throw std::invalid_argument("build_bundle: n must be <= 5");
  BundleSpec s;
  s.n = n;
  const int d = 2 * n;

  Mat qv = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i) qv(i, n - 1 - i) = 1.0;
  Mat qw = Mat::Zero(n, n);
  for (int i = 0; i < n - 1; ++i) qw(i, n - 2 - i) = 1.0;
  qw(n - 1, n - 1) = 1.0;
  s.QV = {qv, Ordering::block};
  s.QW = {qw, Ordering::block};

  s.sigma.assign(d, -1);
  for (int i = 1; i <= n; ++i) s.sigma[i - 1] = weight_index_of_power(n, n + 1 - 2 * i);
  for (int j = 1; j < n; ++j) s.sigma[n + j - 1] = weight_index_of_power(n, n - 2 * j);
  s.sigma[d - 1] = n;  // O'
  s.oPrimeSlot = n;
  s.oSlot = n - 1;

  s.power.assign(d, 0);
  s.summand.assign(d, 0);
  for (int w = 0; w < d; ++w) {
    if (w <= n - 1) s.power[w] = n - 1 - w;
    else if (w == n) s.power[w] = 0;
    else s.power[w] = n - w;
  }
  for (int b = 0; b < d; ++b) s.summand[s.sigma[b]] = b < n ? 0 : 1;

  const Mat S = s.sigma_matrix();
  Mat blockPairing = Mat::Zero(d, d);
  blockPairing.topLeftCorner(n, n) = qv;
  blockPairing.bottomRightCorner(n, n) = qw;
  s.C = {S.transpose() * blockPairing * S, Ordering::weight};
  s.filtration.n = n;
  if (n == 1) {
    s.degenerate = true;
    s.note = "degenerate: symmetric space is a point";
  }
  return s;
}

Mat eta_matrix(const BundleSpec& spec, const HiggsTuple& q, cd z) {
  const int n = spec.n;
  if (q.n != n) throw std::invalid_argument("eta_matrix: HiggsTuple rank mismatch");
  Mat eta = Mat::Zero(n, n);
  for (int j = 0; j < n; ++j) eta(0, j) = q.eval(j + 1, z);
  for (int i = 1; i < n; ++i) {
    eta(i, i - 1) = 1.0;
    for (int j = i; j <= n - 2; ++j) eta(i, j) = q.eval(j - i + 1, z);
  }
  return eta;
}

ThetaPair theta_matrices(const BundleSpec& spec, const HiggsTuple& q, cd z) {
  const int n = spec.n;
  const Mat eta = eta_matrix(spec, q, z);
  // Q_W is a signed permutation, so its inverse is exact
  const Mat qwInv = spec.QW.entries.transpose();
  const Mat etaDagger = qwInv * eta.transpose() * spec.QV.entries;
  Mat A = Mat::Zero(2 * n, 2 * n);
  A.topRightCorner(n, n) = eta;
  A.bottomLeftCorner(n, n) = etaDagger;
  const Mat S = spec.sigma_matrix();
  return {A, S.transpose() * A * S};
}

double skew_residual(const BundleSpec& spec, const Mat& Ablock) {
  const Mat Q = spec.qtilde();
  return (Ablock.transpose() * Q + Q * Ablock).norm();
}

std::vector<double> hX_constants(int n) {
  if (n < 1) throw std::invalid_argument("hX_constants: n must be >= 1");
  auto t = [n](int l) { return l * (2.0 * n - 1.0 - l) / 2.0; };
  double pre = 1.0;
  for (int l = 1; l <= n - 1; ++l) pre *= t(l);
  std::vector<double> a(2 * n - 1);
  double cum = 1.0;
  for (int k = 1; k <= 2 * n - 1; ++k) {
    a[k - 1] = cum / pre;
    cum *= t(k);
  }
  return a;
}

Eigen::VectorXd hX_diagonal(const BundleSpec& spec, double g) {
  const int n = spec.n;
  const auto a = hX_constants(n);
  const double G = 0.5 * g;
  Eigen::VectorXd h(2 * n);
  for (int w = 0; w < 2 * n; ++w) {
    if (w <= n - 1) h(w) = a[w] * std::pow(G, w + 1 - n);
    else if (w == n) h(w) = 1.0;
    else h(w) = a[w - 1] * std::pow(G, w - n);
  }
  return h;
}

Mat hX_metric(const BundleSpec& spec, double g) {
  return hX_diagonal(spec, g).cast<cd>().asDiagonal();
}

double higgs_norm_sq(const Mat& A, const Mat& H, double g) {
  const Mat B = H.ldlt().solve(A.adjoint() * H);
  return 2.0 * (A * B).trace().real() / g;
}

}  // namespace sonn

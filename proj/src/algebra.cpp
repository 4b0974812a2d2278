#include "sonn/algebra.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace sonn {

namespace {

void require_square(const Mat& M, const char* what) {
  if (M.rows() != M.cols()) throw std::invalid_argument(std::string(what) + ": matrix is not square");
}

// H = L L^*, lower L with positive diagonal.
Mat cholesky_lower(const Mat& H) {
  Eigen::LLT<Mat> llt(H);
  if (llt.info() != Eigen::Success) throw std::runtime_error("metric is not positive definite");
  return llt.matrixL();
}

// Coordinates in which h becomes the standard inner product: x' = L^* x.
Mat to_orthonormal(const Mat& X, const Mat& L) { return L.adjoint() * X; }

Mat endo_to_orthonormal(const Mat& f, const Mat& L) {
  return L.adjoint() * f * L.adjoint().triangularView<Eigen::Upper>().solve(Mat::Identity(L.rows(), L.cols()));
}

Mat orthonormal_basis(const Mat& X) {
  Eigen::ColPivHouseholderQR<Mat> qr(X);
  const int rank = static_cast<int>(qr.rank());
  Mat Q = qr.householderQ();
  return Q.leftCols(rank);
}

}  // namespace

double TriangularIdentityReport::max() const {
  return std::max({diagonalViolation, rowViolation, middleViolation});
}

PairingMatrix standard_pairing(int n) {
  if (n < 1) throw std::invalid_argument("standard_pairing: n must be >= 1");
  const int d = 2 * n;
  Mat C = Mat::Zero(d, d);
  for (int i = 0; i < d; ++i) C(i, d - 1 - i) = 1.0;
  // middle block: slots n and n+1 (1-based) pair with themselves
  C(n - 1, n) = 0.0;
  C(n, n - 1) = 0.0;
  C(n - 1, n - 1) = 1.0;
  C(n, n) = 1.0;
  return {C, Ordering::weight};
}

double compatibility_residual(const Mat& H, const PairingMatrix& C) {
  require_square(H, "compatibility_residual");
  if (H.rows() != C.entries.rows() || C.entries.rows() != C.entries.cols())
    throw std::invalid_argument("compatibility_residual: dimension mismatch");
  Eigen::FullPivLU<Mat> lu(C.entries.conjugate());
  if (!lu.isInvertible()) throw std::invalid_argument("compatibility_residual: pairing is singular");
  const Mat lhs = H * lu.solve(H.transpose());
  return (lhs - C.entries).norm() / C.entries.norm();
}

Mat random_hermitian(int dim, std::mt19937_64& rng, double amplitude) {
  std::normal_distribution<double> N(0.0, 1.0);
  Mat M(dim, dim);
  for (int i = 0; i < dim; ++i) {
    M(i, i) = amplitude * N(rng);
    for (int j = i + 1; j < dim; ++j) {
      const double re = N(rng), im = N(rng);
      M(i, j) = amplitude * cd(re, im) / std::sqrt(2.0);
      M(j, i) = std::conj(M(i, j));
    }
  }
  return M;
}

Mat hermitian_exp(const Mat& M) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (M + M.adjoint()));
  const Mat& V = es.eigenvectors();
  Mat E = V * es.eigenvalues().array().exp().matrix().asDiagonal() * V.adjoint();
  return 0.5 * (E + E.adjoint());
}

Mat project_compatible_generator(const Mat& M, const PairingMatrix& C) {
  const Mat& c = C.entries;
  if ((c * c.conjugate() - Mat::Identity(c.rows(), c.cols())).norm() > 1e-12)
    throw std::invalid_argument("project_compatible_generator: requires C conj(C) = I");
  return 0.5 * (M - c * M.conjugate() * c);
}

CompatibleMetric sample_compatible_metric(int dim, const PairingMatrix& C, std::uint64_t seed, double amplitude,
                                          const std::vector<int>* groups) {
  if (dim != C.dim() || dim % 2 != 0) throw std::invalid_argument("sample_compatible_metric: dim must equal 2n = dim(C)");
  std::mt19937_64 rng(seed);
  Mat M = random_hermitian(dim, rng, amplitude);
  if (groups) {
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j)
        if ((*groups)[i] != (*groups)[j]) M(i, j) = 0.0;
  }
  M = project_compatible_generator(M, C);
  return {hermitian_exp(M), C};
}

TriangularTransition gram_schmidt_transition(const Mat& H) {
  require_square(H, "gram_schmidt_transition");
  const int d = static_cast<int>(H.rows());
  // H = U^* U with U upper triangular: row k of U is the k-th Gram-Schmidt step.
  Mat U = Mat::Zero(d, d);
  for (int k = 0; k < d; ++k) {
    cd pivot = H(k, k);
    for (int j = 0; j < k; ++j) pivot -= std::norm(U(j, k));
    if (!(pivot.real() > 0.0) || !std::isfinite(pivot.real()))
      throw std::runtime_error("gram_schmidt_transition: leading minor " + std::to_string(k + 1) +
                               " is not positive");
    const double ukk = std::sqrt(pivot.real());
    U(k, k) = ukk;
    for (int l = k + 1; l < d; ++l) {
      cd s = H(k, l);
      for (int j = 0; j < k; ++j) s -= std::conj(U(j, k)) * U(j, l);
      U(k, l) = s / ukk;
    }
  }
  Mat P = U.triangularView<Eigen::Upper>().solve(Mat::Identity(d, d));
  return {P, U};
}

TriangularIdentityReport check_triangular_identities(const TriangularTransition& T, const PairingMatrix& C) {
  if (C.ordering != Ordering::weight)
    throw std::invalid_argument("check_triangular_identities: pairing must be weight ordered");
  const Mat& P = T.P;
  const Mat& Pi = T.inverseP;
  const int d = static_cast<int>(P.rows());
  if (d % 2 != 0 || d != C.dim()) throw std::invalid_argument("check_triangular_identities: dimension mismatch");
  const int n = d / 2;
  TriangularIdentityReport r;
  // 0-based: slot i pairs with d-1-i
  for (int i = 0; i < d; ++i)
    r.diagonalViolation = std::max(r.diagonalViolation, std::abs(std::abs(P(i, i)) - std::abs(Pi(d - 1 - i, d - 1 - i))));
  const int rn = n - 1;
  for (int j = 0; j < d; ++j) {
    if (j == n - 1 || j == n) continue;
    r.rowViolation = std::max(r.rowViolation, std::abs(std::abs(P(rn, j)) - std::abs(Pi(d - 1 - j, rn))));
  }
  r.middleViolation = std::abs(std::norm(Pi(rn, rn)) - std::norm(P(rn, rn)) - std::norm(P(rn, rn + 1)));
  return r;
}

std::vector<double> leading_minors(const Mat& H) {
  const auto T = gram_schmidt_transition(H);
  std::vector<double> m(H.rows() + 1, 1.0);
  for (int k = 0; k < H.rows(); ++k) m[k + 1] = m[k] * std::norm(T.inverseP(k, k));
  return m;
}

std::vector<double> slot_metrics(const Mat& H) {
  const auto T = gram_schmidt_transition(H);
  std::vector<double> h(H.rows());
  for (int k = 0; k < H.rows(); ++k) h[k] = std::norm(T.inverseP(k, k));
  return h;
}

RealStructure real_structure(const Mat& H, const PairingMatrix& C, double tol) {
  const double res = compatibility_residual(H, C);
  if (res > tol)
    throw std::runtime_error("real_structure: metric is not compatible (residual " + std::to_string(res) + ")");
  Eigen::FullPivLU<Mat> lu(C.entries);
  return {lu.solve(H.conjugate())};
}

double h_norm(const Mat& f, const Mat& H) { return endo_to_orthonormal(f, cholesky_lower(H)).norm(); }

double h_vector_norm(const Vec& v, const Mat& H) { return std::sqrt(std::abs((v.adjoint() * H * v)(0, 0))); }

double subspace_angle(const Mat& A, const Mat& B, const Mat& H) {
  const Mat L = cholesky_lower(H);
  const Mat QA = orthonormal_basis(to_orthonormal(A, L));
  const Mat QB = orthonormal_basis(to_orthonormal(B, L));
  if (QA.cols() == 0 || QB.cols() == 0) return QA.cols() == QB.cols() ? 0.0 : 1.0;
  const Mat R = QA - QB * (QB.adjoint() * QA);
  Eigen::JacobiSVD<Mat> svd(R);
  double s = svd.singularValues()(0);
  if (QA.cols() > QB.cols()) s = std::max(s, 1.0);
  return std::min(s, 1.0);
}

HEigen h_self_adjoint_eigen(const Mat& s, const Mat& H) {
  const Mat L = cholesky_lower(H);
  Mat sp = endo_to_orthonormal(s, L);
  sp = 0.5 * (sp + sp.adjoint());
  Eigen::SelfAdjointEigenSolver<Mat> es(sp);
  // back to the original frame: x = L^{-*} x'
  Mat V = L.adjoint().triangularView<Eigen::Upper>().solve(es.eigenvectors());
  return {es.eigenvalues(), V};
}

namespace {

struct Cluster {
  double value;
  std::vector<int> members;
};

std::vector<Cluster> cluster_spectrum(const Eigen::VectorXd& vals, double rel = 1e-6) {
  std::vector<Cluster> out;
  for (int k = 0; k < vals.size(); ++k) {
    if (!out.empty() && std::abs(vals(k) / out.back().value - 1.0) <= rel) {
      out.back().members.push_back(k);
    } else {
      out.push_back({vals(k), {k}});
    }
  }
  return out;
}

Mat columns(const Mat& V, const std::vector<int>& idx) {
  Mat out(V.rows(), static_cast<int>(idx.size()));
  for (size_t c = 0; c < idx.size(); ++c) out.col(c) = V.col(idx[c]);
  return out;
}

}  // namespace

double kappa_eigenspace_angle(const Mat& H1, const Mat& H2, const PairingMatrix& C) {
  const Mat s = H1.ldlt().solve(H2);
  const auto eig = h_self_adjoint_eigen(s, H1);
  const auto K = real_structure(H1, C).K;
  const auto clusters = cluster_spectrum(eig.values);
  double worst = 0.0;
  for (const auto& c : clusters) {
    const double target = 1.0 / c.value;
    const Cluster* match = nullptr;
    double best = 1e300;
    for (const auto& o : clusters) {
      const double dist = std::abs(std::log(o.value / target));
      if (dist < best) {
        best = dist;
        match = &o;
      }
    }
    const Mat Va = columns(eig.vectors, c.members);
    const Mat kVa = K * Va.conjugate();
    worst = std::max(worst, subspace_angle(kVa, columns(eig.vectors, match->members), H1));
  }
  return worst;
}

double quasi_cyclic_volume(const Mat& f, const Vec& e, const Mat& H) {
  const int m = static_cast<int>(f.rows());
  const int k = std::max(m - 1, 0);
  Mat W(m, k);
  Vec w = e;
  for (int j = 0; j < k; ++j) {
    W.col(j) = w;
    w = f * w;
  }
  if (k == 0) return 1.0;
  const Mat G = W.adjoint() * H * W;
  const double det = G.determinant().real();
  return std::sqrt(std::max(det, 0.0));
}

double quasi_cyclic_eps0(int m, double normF, double rho) {
  const double expo = 0.5 * (m - 1) * (m - 2);
  const double denom = 2.0 * (m - 1) * std::pow(1.0 + normF, expo);
  return std::min(1.0, rho / denom);
}

StabilityReport quasi_cyclic_stability_margin(const Mat& f, const Mat& f1, const Vec& e, const Mat& H, double rho,
                                              std::optional<double> A) {
  StabilityReport r;
  const int m = static_cast<int>(f.rows());
  const double nf = h_norm(f, H);
  const double bound = A ? std::max(*A, nf) : nf;
  const double ne = h_vector_norm(e, H);
  const double vol = quasi_cyclic_volume(f, e, H);
  r.eps0 = quasi_cyclic_eps0(m, bound, rho);
  r.perturbation = h_norm(f - f1, H);
  const double threshold = 0.5 * rho * std::pow(ne, m - 1);
  if (A && nf > *A) {
    r.note = "precondition violated: |f|_h exceeds A";
  } else if (rho * std::pow(ne, m - 1) > vol * (1.0 + 1e-12)) {
    r.note = "precondition violated: rho |e|^(m-1) exceeds |w(f,e)|";
  } else if (r.perturbation > r.eps0) {
    r.note = "precondition violated: |f - f1|_h exceeds eps0";
  } else {
    r.preconditionsMet = true;
  }
  r.slack = quasi_cyclic_volume(f1, e, H) - threshold;
  r.holds = r.slack > 0.0;
  if (!r.preconditionsMet) r.holds = false;
  return r;
}

NuSplitReport nu_split_bound(const Mat& f, const Mat& s, const Mat& H, double nu, const PairingMatrix* C) {
  NuSplitReport r;
  r.nu = nu;
  const int d = static_cast<int>(H.rows());
  const int n = std::max(d / 2, 1);
  const auto eig = h_self_adjoint_eigen(s, H);
  const auto clusters = cluster_spectrum(eig.values, 1e-9);
  std::vector<double> S;
  for (const auto& c : clusters)
    if (c.value > 1.0 + 1e-12) S.push_back(c.value);
  r.spectrumAboveOne = S;
  const Mat L = cholesky_lower(H);
  const Mat fp = endo_to_orthonormal(f, L);
  const Mat sp = endo_to_orthonormal(s, L);
  r.commutator = (fp * sp - sp * fp).norm();
  if (S.empty()) {
    r.identityCase = true;
    r.holds = true;
    return r;
  }
  const double maxS = S.back();
  if (!(nu > 0.0) || nu > std::min(1.0, maxS - 1.0) * (1.0 + 1e-12))
    throw std::invalid_argument("nu_split_bound: nu must lie in (0, min(1, max S - 1)]");
  // c_0 = 1, first gap above nu/(2n) splits S into S_0 and S_1
  const double gap = 0.5 * nu / n;
  int m0 = static_cast<int>(S.size());
  double prev = 1.0;
  for (size_t i = 0; i < S.size(); ++i) {
    if (S[i] - prev > gap) {
      m0 = static_cast<int>(i) + 1;
      break;
    }
    prev = S[i];
  }
  r.splitIndex = m0;
  const double lower = (m0 >= 2) ? S[m0 - 2] : 1.0;
  const double cut = 0.5 * (lower + S[m0 - 1]);
  std::vector<int> idxE, idxU, idxK;
  for (int k = 0; k < d; ++k) {
    const double a = eig.values(k);
    if (a > cut) idxU.push_back(k);
    else if (a < 1.0 / cut) idxK.push_back(k);
    else idxE.push_back(k);
  }
  r.dimE = static_cast<int>(idxE.size());
  r.dimU = static_cast<int>(idxU.size());
  r.dimKappaU = static_cast<int>(idxK.size());
  // eigenvectors in the orthonormal frame
  const Mat Q = L.adjoint() * eig.vectors;
  Mat ft = Mat::Zero(d, d);
  for (const auto* idx : {&idxE, &idxU, &idxK}) {
    if (idx->empty()) continue;
    const Mat B = columns(Q, *idx);
    const Mat Pi = B * B.adjoint();
    ft += Pi * fp * Pi;
  }
  r.lhs = (fp - ft).norm();
  r.bound = r.commutator * std::pow(10.0 * n, 3) / nu;
  r.slack = r.bound - r.lhs;
  r.holds = r.slack >= 0.0;
  if (C && !idxU.empty()) {
    const auto K = real_structure(H, *C).K;
    const Mat U = columns(eig.vectors, idxU);
    r.kappaAngle = subspace_angle(K * U.conjugate(), columns(eig.vectors, idxK), H);
  }
  return r;
}

}  // namespace sonn

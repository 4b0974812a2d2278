#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "sonn/types.hpp"

namespace sonn {

enum class Ordering { block, weight };

// Non-degenerate complex symmetric pairing together with the frame ordering it is written in.
struct PairingMatrix {
  Mat entries;
  Ordering ordering = Ordering::weight;

  int dim() const { return static_cast<int>(entries.rows()); }
};

// Standard weight-ordered pairing of dimension 2n: anti-diagonal ones except the middle 2x2 identity block.
PairingMatrix standard_pairing(int n);

struct CompatibleMetric {
  Mat H;
  PairingMatrix pairing;
};

// v = e P is h-orthonormal, so P^* H P = I and H = (P^-1)^* P^-1.
struct TriangularTransition {
  Mat P;
  Mat inverseP;
};

// kappa(v) = K conj(v).
struct RealStructure {
  Mat K;
};

struct TriangularIdentityReport {
  double diagonalViolation = 0.0;  // |P_ii| vs |P^-1_{2n+1-i,2n+1-i}|
  double rowViolation = 0.0;       // |P_nj| vs |P^-1_{2n+1-j,n}|, j outside {n,n+1}
  double middleViolation = 0.0;    // |P^-1_nn|^2 vs |P_nn|^2 + |P_n,n+1|^2
  double max() const;
};

struct StabilityReport {
  bool preconditionsMet = false;
  bool holds = false;
  double slack = 0.0;  // |w(f1,e)| - (rho/2)|e|^{m-1}
  double eps0 = 0.0;
  double perturbation = 0.0;
  std::string note;
};

struct NuSplitReport {
  bool identityCase = false;
  bool holds = true;
  double lhs = 0.0;          // |f - f~|_h
  double commutator = 0.0;   // |[f,s]|_h
  double bound = 0.0;        // nu^-1 (10n)^3 |[f,s]|_h
  double slack = 0.0;
  double nu = 0.0;
  int splitIndex = 0;        // m(0)
  std::vector<double> spectrumAboveOne;
  int dimE = 0, dimU = 0, dimKappaU = 0;
  double kappaAngle = -1.0;  // angle between kappa(U) and the reciprocal eigenspaces, if a pairing was given
};

double compatibility_residual(const Mat& H, const PairingMatrix& C);

Mat random_hermitian(int dim, std::mt19937_64& rng, double amplitude);
Mat hermitian_exp(const Mat& M);
Mat project_compatible_generator(const Mat& M, const PairingMatrix& C);

// groups[i] labels the summand of index i; entries linking different labels are zeroed (e.g. V vs W).
CompatibleMetric sample_compatible_metric(int dim, const PairingMatrix& C, std::uint64_t seed,
                                          double amplitude = 0.5,
                                          const std::vector<int>* groups = nullptr);

TriangularTransition gram_schmidt_transition(const Mat& H);
TriangularIdentityReport check_triangular_identities(const TriangularTransition& T, const PairingMatrix& C);

// Leading principal minors det(H|F_k), k = 0..dim (index 0 holds 1).
std::vector<double> leading_minors(const Mat& H);
// Slot metrics h_k = det(F_k)/det(F_{k-1}).
std::vector<double> slot_metrics(const Mat& H);

RealStructure real_structure(const Mat& H, const PairingMatrix& C, double tol = 1e-8);

// h-norm of an endomorphism: Frobenius norm in an h-orthonormal frame.
double h_norm(const Mat& f, const Mat& H);
double h_vector_norm(const Vec& v, const Mat& H);

// Sine of the largest principal angle between span(A) and span(B) in the h geometry.
double subspace_angle(const Mat& A, const Mat& B, const Mat& H);

// Eigen-decomposition of an h-self-adjoint s; columns of vectors are h-orthonormal.
struct HEigen {
  Eigen::VectorXd values;
  Mat vectors;
};
HEigen h_self_adjoint_eigen(const Mat& s, const Mat& H);

// Largest kappa(V_a) vs V_{1/a} angle over the eigenspaces of s = H1^-1 H2, kappa built from H1.
double kappa_eigenspace_angle(const Mat& H1, const Mat& H2, const PairingMatrix& C);

double quasi_cyclic_volume(const Mat& f, const Vec& e, const Mat& H);
double quasi_cyclic_eps0(int m, double normF, double rho);
StabilityReport quasi_cyclic_stability_margin(const Mat& f, const Mat& f1, const Vec& e, const Mat& H,
                                              double rho, std::optional<double> A = std::nullopt);

NuSplitReport nu_split_bound(const Mat& f, const Mat& s, const Mat& H, double nu,
                             const PairingMatrix* C = nullptr);

}  // namespace sonn

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sonn/bundle.hpp"
#include "sonn/domain.hpp"
#include "sonn/fields.hpp"

namespace sonn {

// Margins log det(h_X|F_k) - log det(h|F_k), k = 1..2n, over interior nodes.
struct DominationReport {
  int n = 0;
  double tolerance = 0.0;
  std::vector<double> minMargin;   // per k
  std::vector<double> maxMargin;   // per k
  Eigen::MatrixXd margins;         // nodes x 2n, boundary rows included
  double maxPositiveMargin = 0.0;
  bool pass = false;               // all minima >= -tolerance
  bool strictSomewhere = false;    // some margin >= strictThreshold
  double strictThreshold = 0.0;
};

DominationReport domination_report(const MatrixField& h, const BundleSpec& spec, const DiskGrid& grid,
                                   double tolerance = 1e-8, double strictThreshold = 1e-6);

// Identities for a single compatible metric H in the weight frame, with Higgs matrix A (may be empty).
struct StructuralSample {
  double minorSymmetry = 0.0;   // max_k |det F_k - det F_{2n-k}| / max(1, |det F_k|)
  double slotProduct = 0.0;     // max_k |h_k h_{2n-k+1} - 1|
  double middleMinor = 0.0;     // n odd: |det F_n - det F_{n+1}| relative
  double middleSlots = 0.0;     // n odd: max(|H_n - 1|, |H_{n+1} - 1|)
  double gamma = 0.0;           // |gamma| (n even) or |gamma'| (n odd) in the h-orthonormal frame
  double max() const;
};

StructuralSample structural_sample(const Mat& H, const Mat& A, const BundleSpec& spec);

struct StructuralReport {
  StructuralSample worst;
  double tolerance = 0.0;
  bool pass = false;
  std::string gammaName;  // "gamma" or "gamma'"
};

StructuralReport structural_identities(const MatrixField& h, const MatrixField& A, const BundleSpec& spec,
                                       const DiskGrid& grid, double tolerance);

struct EnergyReport {
  int n = 0;
  Vec higgsNorm;           // |theta|^2 per node
  Vec energy;              // (2n - 2) |theta|^2
  Vec wn;                  // -2 sum_{k<n} v_k
  double bound = 0.0;      // 2n(n-1)^2(2n-1)/3
  double minMargin = 0.0;  // min over interior of e - bound
  double maxMargin = 0.0;
  double chainMinMargin = 0.0;  // min over interior of |theta|^2 - S exp(w_n / S)
  double tolerance = 0.0;
  bool boundHolds = false;
  bool chainHolds = false;
  bool strictSomewhere = false;
};

EnergyReport energy_report(const MatrixField& h, const MatrixField& A, const BundleSpec& spec, const DiskGrid& grid,
                           double tolerance = 1e-6);

// phi(x) = (e^x - 1) / x with phi(0) = 1.
double expm1_ratio(double x);

struct VkReport {
  int n = 0;
  Eigen::MatrixXd v;              // nodes x n, v_k in column k-1
  Eigen::MatrixXd c;              // nodes x n, coefficients c_k
  Eigen::MatrixXd lhs;            // nodes x n, 1/2 Delta v_k + coupling terms
  double delta = 0.0;
  double scale = 0.0;
  double spacing = 0.0;
  double minLhs = 0.0;            // min over interior and k
  double supInteriorV = 0.0;      // max over k of sup_interior v_k
  double supBoundaryV = 0.0;
  int flaggedNodes = 0;           // nodes with lhs in [-10 delta, -delta)
  bool inequalitiesHold = false;
  bool maximumPrinciple = false;  // sup interior <= sup boundary + delta
  bool nonpositive = false;       // all interior v_k <= vTolerance
  double vTolerance = 0.0;
  // Syntactic hypotheses of the cooperative maximum principle on the assembled matrix.
  bool cooperative = false;
  bool fullyCoupled = false;
  bool unitSuperSolution = false;
};

// Coefficient matrix (c_{i,j}) of the linear system at one node.
Eigen::MatrixXd vk_coupling_matrix(const Eigen::VectorXd& c, int n);

VkReport vk_cooperative_check(const MatrixField& h, const BundleSpec& spec, const PolarCalculus& calc,
                              double vTolerance = 1e-8);


// Worst observed values over seeded random compatible (V+W block-diagonal) metrics.
struct AlgebraSuiteReport {
  int n = 0;
  int samples = 0;
  std::uint64_t seed = 0;
  double compatibility = 0.0;
  double determinant = 0.0;       // |det h - 1|
  double triangular = 0.0;        // Gram-Schmidt transition identities
  double minorSymmetry = 0.0;     // relative |det F_k - det F_{2n-k}|
  double kappaInvolution = 0.0;   // |K conj(K) - I|
  double kappaEigenspace = 0.0;   // sine of the kappa(V_a) vs V_{1/a} angle
  double gamma = 0.0;             // gamma (n even) or gamma' (n odd)
  double middleSlots = 0.0;       // n odd: |H_n - 1|, |H_{n+1} - 1|
};

AlgebraSuiteReport algebra_suite(int n, int samples, std::uint64_t seed);

// Random polynomial q and point z, n in 1..5.
struct SkewSuiteReport {
  int samples = 0;
  double worst = 0.0;
};
SkewSuiteReport skew_suite(int samples, std::uint64_t seed);

struct PerturbationSuiteReport {
  int samples = 0;
  int stabilityHolds = 0;
  int stabilityPreconditions = 0;
  double stabilityMinSlack = 0.0;
  int splitHolds = 0;
  double splitMinSlack = 0.0;
  double splitMinRelativeSlack = 0.0;  // slack / bound
};
PerturbationSuiteReport perturbation_suite(int samples, std::uint64_t seed, int maxN = 4);

}  // namespace sonn

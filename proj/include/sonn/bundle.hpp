#pragma once

#include <string>
#include <vector>

#include "sonn/algebra.hpp"

namespace sonn {

// q_j as polynomial coefficient lists in z, j = 1..n. q_j is a 2j-differential for j < n and q_n an n-differential.
struct HiggsTuple {
  int n = 0;
  std::vector<std::vector<cd>> coefficients;

  static HiggsTuple zero(int n);
  int degree(int j) const;
  cd eval(int j, cd z) const;
  bool is_zero() const;
};

// Weight-frame indices of F_k are {0, ..., k-1}.
struct FiltrationIndex {
  int n = 0;
  std::vector<int> indices(int k) const;
};

struct BundleSpec {
  int n = 0;
  PairingMatrix QV, QW;       // block ordering
  PairingMatrix C;            // weight ordering
  std::vector<int> sigma;     // block index -> weight index
  std::vector<int> power;     // K-power of each weight slot (O' has 0)
  std::vector<int> summand;   // per weight slot: 0 for V, 1 for W
  int oSlot = -1;             // weight index of O
  int oPrimeSlot = -1;        // weight index of O'
  FiltrationIndex filtration;
  bool degenerate = false;
  std::string note;

  Mat sigma_matrix() const;   // (b, w) = 1 iff sigma[b] = w
  Mat qtilde() const;         // diag(Q_V, -Q_W), block ordering
};

BundleSpec build_bundle(int n);

Mat eta_matrix(const BundleSpec& spec, const HiggsTuple& q, cd z);

struct ThetaPair {
  Mat block;
  Mat weight;
};
ThetaPair theta_matrices(const BundleSpec& spec, const HiggsTuple& q, cd z);

// ||A^T Qt + Qt A||_F for the block-ordered Higgs field.
double skew_residual(const BundleSpec& spec, const Mat& Ablock);

// a_{k,n}, k = 1..2n-1.
std::vector<double> hX_constants(int n);

// Diagonal of h_X in the weight frame at conformal factor g; the line metric on K^-1 is g/2.
Eigen::VectorXd hX_diagonal(const BundleSpec& spec, double g);
Mat hX_metric(const BundleSpec& spec, double g);

// |theta|^2_{h,g_X} = 2 tr(A H^-1 A^* H) / g.
double higgs_norm_sq(const Mat& A, const Mat& H, double g);

inline double base_higgs_norm_sq(int n) { return n * (n - 1.0) * (2.0 * n - 1.0) / 3.0; }

}  // namespace sonn

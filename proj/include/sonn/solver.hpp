#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "sonn/bundle.hpp"
#include "sonn/domain.hpp"
#include "sonn/fields.hpp"

namespace sonn {

enum class Method { newton, heat_flow };

std::string to_string(Method m);
Method method_from_string(const std::string& s);

struct SolverConfig {
  Method method = Method::newton;
  double residualTol = 1e-8;
  int maxIterations = 40;         // Newton steps
  int maxFlowSteps = 20000;       // heat-flow steps
  int gmresRestart = 80;
  int gmresMaxIterations = 800;
  double flowStep = 0.05;         // initial heat-flow step
  double flowStepMax = 2.0;
  int maxHalvings = 30;
  // Subtract the discrete curvature defect of h_X so that h_X solves the discrete q = 0 problem exactly.
  bool baseCorrection = true;
  int compatProjectEvery = 0;     // 0 disables the per-k-step projection onto compatible metrics
};

struct IterationRecord {
  int iteration = 0;
  double supResidual = 0.0;
  double l2Residual = 0.0;
  double step = 0.0;
  int krylovIterations = 0;
};

struct ResidualReport {
  std::string method;
  bool converged = false;
  int iterations = 0;
  double supResidual = 0.0;             // equation actually solved
  double supResidualUncorrected = 0.0;  // plain discrete residual, no h_X defect subtracted
  double compatibilityDrift = 0.0;      // max per-node compatibility residual
  double blockDrift = 0.0;              // max off-block entry relative to h_X
  double positivityMinEig = 0.0;        // min eigenvalue of h_X^{-1/2} h h_X^{-1/2}
  std::vector<IterationRecord> trace;
};

struct SolveResult {
  MatrixField H;
  ResidualReport report;
};

// theta(q) in the weight frame at every node.
MatrixField sample_theta(const BundleSpec& spec, const HiggsTuple& q, const DiskGrid& grid);
MatrixField hX_field(const BundleSpec& spec, const DiskGrid& grid);

// Per node i Lambda(F(H) + [theta, theta^{*H}]) written in an H-orthonormal frame (Hermitian).
MatrixField hitchin_residual(const MatrixField& H, const MatrixField& A, const PolarCalculus& calc);
double sup_interior_norm(const MatrixField& R, const DiskGrid& grid);

// Analytic directional derivative of the Hermitian residual form E(H) = H i Lambda(...) along dH.
MatrixField hermitian_residual_form(const MatrixField& H, const MatrixField& A, const PolarCalculus& calc);
MatrixField hermitian_residual_jvp(const MatrixField& H, const MatrixField& dH, const MatrixField& A,
                                   const PolarCalculus& calc);

// h_X^{1/2} exp(M(phi)) h_X^{1/2} with M(phi) = amplitude (cos(phi) M1 + sin(phi) M2), M1, M2 seeded block-diagonal
// compatible generators. Compatible and V+W block-diagonal at every node; used as alternative Dirichlet data.
MatrixField perturbed_boundary(const BundleSpec& spec, const DiskGrid& grid, double amplitude, std::uint64_t seed);

// Nearest compatible metric: geometric mean of H and C conj(H)^-1 C.
Mat compatible_projection(const Mat& H, const Mat& C);

SolveResult solve_dirichlet(const BundleSpec& spec, const HiggsTuple& q, const DiskGrid& grid,
                            const MatrixField& boundary, const SolverConfig& config,
                            const MatrixField* initial = nullptr);

struct ExhaustionStep {
  double radius = 0.0;
  ResidualReport report;
};

struct ExhaustionReport {
  std::vector<double> radii;
  double probeRadius = 0.0;
  std::vector<ExhaustionStep> steps;
  std::vector<double> differences;  // d_i between consecutive radii
  std::vector<double> rates;        // d_i / d_{i+1}
  bool monotoneTail = false;        // d decreasing over the last two steps
};

ExhaustionReport exhaustion_sequence(const BundleSpec& spec, const HiggsTuple& q, const std::vector<double>& radii,
                                     double probeRadius, int Nr, int Nphi, const SolverConfig& config);

struct SimpsonReport {
  MatrixField s;                 // h2 = h1 s
  Vec traceS;
  Vec laplaceTerm;               // sqrt(-1) Lambda dbar d tr(s) = -(1/2) Delta tr(s)
  Vec logLaplaceTerm;            // same for log tr(s)
  double maxTrace = 0.0;
  double maxTraceBoundary = 0.0;
  double maxTraceInterior = 0.0;
  double supLaplace = 0.0;       // max over interior
  double supLogLaplace = 0.0;
  double delta = 0.0;
  bool subharmonic = false;
  bool logSubharmonic = false;
  bool maxOnBoundary = false;
};

SimpsonReport metric_pair_diagnostics(const MatrixField& h1, const MatrixField& h2, const PolarCalculus& calc,
                                      double delta);

// sup over probe points of |log spec(H2^-1 H1)|, both fields interpolated from their own grids.
double probe_distance(const MatrixField& H1, const PolarCalculus& c1, const MatrixField& H2,
                      const PolarCalculus& c2, double probeRadius);

}  // namespace sonn

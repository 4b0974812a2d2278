#include <cmath>
#include <random>

#include "doctest.h"
#include "sonn/solver.hpp"

using namespace sonn;

namespace {

HiggsTuple top_differential(int n, cd c) {
  HiggsTuple q = HiggsTuple::zero(n);
  q.coefficients[n - 1] = {c};
  return q;
}

double log_spectrum_distance(const MatrixField& H1, const MatrixField& H2) {
  double worst = 0.0;
  for (int p = 0; p < H1.nodes(); ++p) {
    Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(Mat(H1.at(p)), Mat(H2.at(p)), Eigen::EigenvaluesOnly);
    worst = std::max(worst, es.eigenvalues().array().log().abs().maxCoeff());
  }
  return worst;
}

// Smooth block-diagonal Hermitian perturbation vanishing on the boundary.
MatrixField smooth_direction(const BundleSpec& spec, const DiskGrid& grid, std::uint64_t seed) {
  const int d = 2 * spec.n;
  std::mt19937_64 rng(seed);
  Mat M1 = random_hermitian(d, rng, 1.0), M2 = random_hermitian(d, rng, 1.0);
  MatrixField dH(grid.nodes(), d);
  for (int p = 0; p < grid.nodes(); ++p) {
    const cd z = grid.z(p);
    const double bump = grid.R * grid.R - std::norm(z);
    const Eigen::VectorXd D = hX_diagonal(spec, grid.gAt(p)).cwiseSqrt();
    Mat M = bump * (M1 + z.real() * M2);
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        if (spec.summand[a] != spec.summand[b]) M(a, b) = 0.0;
    dH.set(p, D.asDiagonal() * M * D.asDiagonal());
  }
  return dH;
}

}  // namespace

TEST_CASE("sampled Higgs field matches the pointwise construction") {
  const auto spec = build_bundle(3);
  const auto grid = build_grid(0.5, 10, 16);
  const auto q = top_differential(3, cd(0.2, -0.1));
  const auto A = sample_theta(spec, q, grid);
  for (int p : {0, 37, grid.nodes() - 1})
    CHECK((Mat(A.at(p)) - theta_matrices(spec, q, grid.z(p)).weight).norm() == 0.0);
}

TEST_CASE("residual at h_X is Hermitian and converges at second order") {
  for (int n : {2, 3}) {
    const auto spec = build_bundle(n);
    double prev = 0.0, prevD = 0.0;
    for (int s : {24, 48, 96}) {
      const auto grid = build_grid(0.7, s, 2 * s);
      PolarCalculus calc(grid);
      const auto R = hitchin_residual(hX_field(spec, grid), sample_theta(spec, HiggsTuple::zero(n), grid), calc);
      for (int p = 0; p < grid.nodes(); p += 97) CHECK((Mat(R.at(p)) - Mat(R.at(p)).adjoint()).norm() < 1e-12);
      const double sup = sup_interior_norm(R, grid);
      if (prev > 0.0) {
        CHECK(prev / sup >= 3.4);
        CHECK(std::log(prev / sup) / std::log(prevD / grid.spacing()) >= 1.8);
      }
      prev = sup;
      prevD = grid.spacing();
    }
  }
}

TEST_CASE("trivial rank-one case has vanishing residual at the unit metric") {
  const auto spec = build_bundle(1);
  const auto grid = build_grid(0.6, 16, 32);
  PolarCalculus calc(grid);
  MatrixField I(grid.nodes(), 2);
  for (int p = 0; p < grid.nodes(); ++p) I.set(p, Mat::Identity(2, 2));
  const auto q = top_differential(1, cd(0.7, 0.2));
  const auto R = hitchin_residual(I, sample_theta(spec, q, grid), calc);
  CHECK(sup_interior_norm(R, grid) < 1e-12);
}

TEST_CASE("residual reports the location of a non-positive node") {
  const auto spec = build_bundle(2);
  const auto grid = build_grid(0.6, 12, 16);
  PolarCalculus calc(grid);
  auto H = hX_field(spec, grid);
  H.set(5, -Mat::Identity(4, 4));
  CHECK_THROWS_WITH_AS(hitchin_residual(H, sample_theta(spec, HiggsTuple::zero(2), grid), calc),
                       doctest::Contains("node 5"), std::runtime_error);
}

TEST_CASE("analytic directional derivative matches central finite differences") {
  for (int n : {2, 3}) {
    const auto spec = build_bundle(n);
    const auto grid = build_grid(0.6, 16, 32);
    PolarCalculus calc(grid);
    const auto A = sample_theta(spec, top_differential(n, cd(0.3, 0.1)), grid);
    const auto H = hX_field(spec, grid);
    const auto dH = smooth_direction(spec, grid, 17 + n);
    const auto J = hermitian_residual_jvp(H, dH, A, calc);
    const double eps = 1e-5;
    MatrixField Hp = H, Hm = H;
    Hp.data += eps * dH.data;
    Hm.data -= eps * dH.data;
    const auto Ep = hermitian_residual_form(Hp, A, calc), Em = hermitian_residual_form(Hm, A, calc);
    const Eigen::MatrixXcd fd = (Ep.data - Em.data) / (2.0 * eps);
    CHECK((fd - J.data).norm() / J.data.norm() < 1e-6);
  }
}

TEST_CASE("Toda-type slot perturbation: linear response matches finite differences") {
  // h_X scaled by e^u on slot 0 and e^-u on its mirror slot 2n-1
  const auto spec = build_bundle(2);
  const auto grid = build_grid(0.6, 16, 32);
  PolarCalculus calc(grid);
  const auto A = sample_theta(spec, HiggsTuple::zero(2), grid);
  const auto H = hX_field(spec, grid);
  MatrixField dH(grid.nodes(), 4);
  for (int p = 0; p < grid.nodes(); ++p) {
    const double u = (0.36 - std::norm(grid.z(p))) * std::cos(grid.phi[grid.slot(p)]);
    Mat M = Mat::Zero(4, 4);
    M(0, 0) = u * H.at(p)(0, 0);
    M(3, 3) = -u * H.at(p)(3, 3);
    dH.set(p, M);
  }
  const auto J = hermitian_residual_jvp(H, dH, A, calc);
  const double eps = 1e-5;
  MatrixField Hp = H, Hm = H;
  Hp.data += eps * dH.data;
  Hm.data -= eps * dH.data;
  const Eigen::MatrixXcd fd =
      (hermitian_residual_form(Hp, A, calc).data - hermitian_residual_form(Hm, A, calc).data) / (2.0 * eps);
  CHECK((fd - J.data).norm() / J.data.norm() < 1e-6);
}

TEST_CASE("Dirichlet solve recovers h_X for q = 0 without the defect correction") {
  const auto spec = build_bundle(2);
  const auto grid = build_grid(0.5, 32, 64);
  SolverConfig cfg;
  cfg.baseCorrection = false;
  const auto res = solve_dirichlet(spec, HiggsTuple::zero(2), grid, hX_field(spec, grid), cfg);
  CHECK(res.report.converged);
  CHECK(res.report.supResidual <= 1e-8);
  CHECK(res.report.iterations <= 25);
  CHECK(log_spectrum_distance(res.H, hX_field(spec, grid)) <= 1e-3);
}

TEST_CASE("with the defect correction h_X is the exact discrete solution for q = 0") {
  const auto spec = build_bundle(3);
  const auto grid = build_grid(0.7, 24, 48);
  const auto res = solve_dirichlet(spec, HiggsTuple::zero(3), grid, hX_field(spec, grid), SolverConfig{});
  CHECK(res.report.iterations == 0);
  CHECK(res.report.supResidual < 1e-12);
}

TEST_CASE("solves are deterministic, keep the boundary and stay compatible") {
  const auto spec = build_bundle(2);
  const auto grid = build_grid(0.7, 24, 48);
  const auto q = top_differential(2, cd(0.05, 0.0));
  const auto bd = hX_field(spec, grid);
  const auto a = solve_dirichlet(spec, q, grid, bd, SolverConfig{});
  const auto b = solve_dirichlet(spec, q, grid, bd, SolverConfig{});
  REQUIRE(a.report.trace.size() == b.report.trace.size());
  for (size_t i = 0; i < a.report.trace.size(); ++i) CHECK(a.report.trace[i].supResidual == b.report.trace[i].supResidual);
  CHECK((a.H.data - b.H.data).norm() == 0.0);
  for (int j = 0; j < grid.Nphi; ++j) {
    const int p = grid.index(grid.Nr - 1, j);
    CHECK((Mat(a.H.at(p)) - Mat(bd.at(p))).norm() <= 1e-14 * Mat(bd.at(p)).norm());
  }
  CHECK(a.report.compatibilityDrift <= 100.0 * 1e-8);
  CHECK(a.report.blockDrift == 0.0);
  CHECK(a.report.positivityMinEig > 0.0);
}

TEST_CASE("Newton and heat flow agree") {
  const auto spec = build_bundle(2);
  const auto grid = build_grid(0.7, 24, 48);
  const auto q = top_differential(2, cd(0.1, 0.0));
  SolverConfig flow;
  flow.method = Method::heat_flow;
  const auto a = solve_dirichlet(spec, q, grid, hX_field(spec, grid), SolverConfig{});
  const auto b = solve_dirichlet(spec, q, grid, hX_field(spec, grid), flow);
  CHECK(b.report.converged);
  CHECK(log_spectrum_distance(a.H, b.H) <= 1e-7);
}

TEST_CASE("non-convergence raises an error carrying the trace") {
  const auto spec = build_bundle(2);
  const auto grid = build_grid(0.7, 16, 32);
  SolverConfig cfg;
  cfg.maxIterations = 1;
  cfg.residualTol = 1e-14;
  CHECK_THROWS_WITH_AS(solve_dirichlet(spec, top_differential(2, 0.5), grid, hX_field(spec, grid), cfg),
                       doctest::Contains("trace"), std::runtime_error);
}

TEST_CASE("compatible projection fixes compatible metrics and repairs others") {
  const auto spec = build_bundle(2);
  const Mat H = sample_compatible_metric(4, spec.C, 9, 0.6, &spec.summand).H;
  CHECK((compatible_projection(H, spec.C.entries) - H).norm() < 1e-12);
  std::mt19937_64 rng(2);
  Mat G = hermitian_exp(random_hermitian(4, rng, 0.5));
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      if (spec.summand[a] != spec.summand[b]) G(a, b) = 0.0;
  CHECK(compatibility_residual(G, spec.C) > 1e-3);
  CHECK(compatibility_residual(compatible_projection(G, spec.C.entries), spec.C) < 1e-12);
}

TEST_CASE("perturbed boundary data is compatible") {
  const auto spec = build_bundle(3);
  const auto grid = build_grid(0.7, 12, 16);
  const auto H = perturbed_boundary(spec, grid, 0.2, 4);
  for (int p = 0; p < grid.nodes(); ++p) CHECK(compatibility_residual(Mat(H.at(p)), spec.C) < 1e-12);
}

TEST_CASE("exhaustion validates its inputs") {
  const auto spec = build_bundle(2);
  const auto q = HiggsTuple::zero(2);
  CHECK_THROWS_WITH_AS(exhaustion_sequence(spec, q, {0.5, 0.85, 0.7}, 0.3, 16, 32, SolverConfig{}),
                       "exhaustion_sequence: radii must be strictly increasing", std::invalid_argument);
  CHECK_THROWS_AS(exhaustion_sequence(spec, q, {0.5, 0.7}, 0.5, 16, 32, SolverConfig{}), std::invalid_argument);
}

TEST_CASE("exhaustion with q = 0 only sees interpolation error") {
  // exact answer is h_X on every disk, so differences shrink with the grid
  const auto spec = build_bundle(2);
  const auto coarse = exhaustion_sequence(spec, HiggsTuple::zero(2), {0.5, 0.7, 0.85}, 0.3, 24, 48, SolverConfig{});
  const auto fine = exhaustion_sequence(spec, HiggsTuple::zero(2), {0.5, 0.7, 0.85}, 0.3, 48, 96, SolverConfig{});
  for (size_t i = 0; i < coarse.differences.size(); ++i) {
    CHECK(coarse.differences[i] < 1e-4);
    CHECK(fine.differences[i] <= coarse.differences[i] / 3.0);
  }
}

TEST_CASE("metric pair diagnostics of identical metrics") {
  const auto spec = build_bundle(2);
  const auto grid = build_grid(0.7, 24, 48);
  PolarCalculus calc(grid);
  const auto H = hX_field(spec, grid);
  const auto r = metric_pair_diagnostics(H, H, calc, 1e-8);
  for (int p = 0; p < grid.nodes(); ++p) CHECK(std::abs(r.traceS(p) - 4.0) < 1e-12);
  CHECK(std::abs(r.supLaplace) < 1e-9);
  CHECK(r.subharmonic);
  const auto other = build_grid(0.7, 12, 16);
  CHECK_THROWS_AS(metric_pair_diagnostics(H, hX_field(spec, other), calc, 1e-8), std::invalid_argument);
}

#include <cmath>
#include <random>

#include "doctest.h"
#include "sonn/bundle.hpp"
#include "sonn/domain.hpp"

using namespace sonn;

TEST_CASE("bundle construction validates n") {
  CHECK_THROWS_AS(build_bundle(0), std::invalid_argument);
  CHECK_THROWS_AS(build_bundle(6), std::invalid_argument);
  CHECK(build_bundle(1).degenerate);
  CHECK_FALSE(build_bundle(2).degenerate);
}

TEST_CASE("sigma is a permutation and splits weight slots into V and W halves") {
  for (int n = 1; n <= 5; ++n) {
    const auto s = build_bundle(n);
    const Mat S = s.sigma_matrix();
    CHECK((S.transpose() * S - Mat::Identity(2 * n, 2 * n)).norm() == 0.0);
    int v = 0;
    for (int w = 0; w < 2 * n; ++w) v += s.summand[w] == 0;
    CHECK(v == n);
    CHECK(s.oPrimeSlot == n);
  }
}

TEST_CASE("Horner evaluation agrees with the monomial sum") {
  HiggsTuple q = HiggsTuple::zero(3);
  q.coefficients[1] = {cd(1.0, 2.0), cd(-0.5, 0.0), cd(0.25, -1.0)};
  const cd z(0.3, -0.4);
  const cd direct = q.coefficients[1][0] + q.coefficients[1][1] * z + q.coefficients[1][2] * z * z;
  CHECK(std::abs(q.eval(2, z) - direct) < 1e-15);
  CHECK(q.degree(1) == 2);
  CHECK(q.degree(2) == 4);
  CHECK(q.degree(3) == 3);
  CHECK_THROWS_AS(q.eval(4, z), std::out_of_range);
  CHECK_FALSE(q.is_zero());
  CHECK(HiggsTuple::zero(3).is_zero());
}

TEST_CASE("Higgs field is skew for the orthogonal pairing") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> N(0.0, 1.0);
  for (int n = 1; n <= 5; ++n) {
    const auto spec = build_bundle(n);
    for (int t = 0; t < 10; ++t) {
      HiggsTuple q = HiggsTuple::zero(n);
      for (auto& c : q.coefficients) c = {cd(N(rng), N(rng)), cd(N(rng), N(rng))};
      const auto th = theta_matrices(spec, q, cd(0.3 * N(rng), 0.3 * N(rng)));
      CHECK(skew_residual(spec, th.block) <= 1e-14);
      const Mat S = spec.sigma_matrix();
      CHECK((S.transpose() * th.block * S - th.weight).norm() < 1e-14);
    }
  }
}

TEST_CASE("h_X at the origin for n = 2 uses the line metric g/2") {
  const auto spec = build_bundle(2);
  const Eigen::VectorXd h = hX_diagonal(spec, conformal_factor(0.0));
  CHECK(h(0) == doctest::Approx(0.5));
  CHECK(h(1) == doctest::Approx(1.0));
  CHECK(h(2) == doctest::Approx(1.0));
  CHECK(h(3) == doctest::Approx(2.0));
}

TEST_CASE("h_X is compatible with the pairing at every radius") {
  for (int n = 1; n <= 5; ++n) {
    const auto spec = build_bundle(n);
    for (double r : {0.0, 0.3, 0.8, 0.95}) {
      const Mat H = hX_metric(spec, conformal_factor(r));
      CHECK(compatibility_residual(H, spec.C) < 1e-12);
    }
  }
}

TEST_CASE("Higgs norm of the base bundle is n(n-1)(2n-1)/3") {
  // 2, 10, 28, 60 for n = 2..5
  const double expected[] = {0.0, 0.0, 2.0, 10.0, 28.0, 60.0};
  for (int n = 2; n <= 5; ++n) {
    const auto spec = build_bundle(n);
    CHECK(base_higgs_norm_sq(n) == doctest::Approx(expected[n]));
    for (double r : {0.0, 0.4, 0.9}) {
      const double g = conformal_factor(r);
      const Mat A = theta_matrices(spec, HiggsTuple::zero(n), cd(r, 0.0)).weight;
      CHECK(std::abs(higgs_norm_sq(A, hX_metric(spec, g), g) - expected[n]) < 1e-12);
    }
  }
}

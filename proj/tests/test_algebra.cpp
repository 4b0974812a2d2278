#include <cmath>
#include <random>

#include "doctest.h"
#include "sonn/algebra.hpp"
#include "sonn/bundle.hpp"
#include "sonn/diagnostics.hpp"

using namespace sonn;

TEST_CASE("standard pairing is symmetric and squares to the identity under conjugation") {
  for (int n = 1; n <= 5; ++n) {
    const Mat C = standard_pairing(n).entries;
    CHECK((C - C.transpose()).norm() == 0.0);
    CHECK((C * C.conjugate() - Mat::Identity(2 * n, 2 * n)).norm() < 1e-15);
  }
}

TEST_CASE("compatibility residual rejects mismatched dimensions") {
  CHECK_THROWS_AS(compatibility_residual(Mat::Identity(3, 3), standard_pairing(2)), std::invalid_argument);
}

TEST_CASE("hermitian exponential of a diagonal matrix matches scalar exp") {
  Mat D = Mat::Zero(3, 3);
  D(0, 0) = 0.3;
  D(1, 1) = -1.2;
  D(2, 2) = 2.0;
  const Mat E = hermitian_exp(D);
  CHECK(std::abs(E(0, 0) - std::exp(0.3)) < 1e-13);
  CHECK(std::abs(E(1, 1) - std::exp(-1.2)) < 1e-13);
  CHECK(std::abs(E(2, 2) - std::exp(2.0)) < 1e-12);
}

TEST_CASE("sampled compatible metrics satisfy the pairing identity and have unit determinant") {
  for (int n = 1; n <= 4; ++n) {
    const auto spec = build_bundle(n);
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      const Mat H = sample_compatible_metric(2 * n, spec.C, seed, 0.7, &spec.summand).H;
      CHECK(compatibility_residual(H, spec.C) < 1e-10);
      CHECK(std::abs(H.determinant() - 1.0) < 1e-10);
      CHECK((H - H.adjoint()).norm() < 1e-14);
      Eigen::SelfAdjointEigenSolver<Mat> es(H);
      CHECK(es.eigenvalues().minCoeff() > 0.0);
      for (int a = 0; a < 2 * n; ++a)
        for (int b = 0; b < 2 * n; ++b)
          if (spec.summand[a] != spec.summand[b]) CHECK(std::abs(H(a, b)) < 1e-14);
    }
  }
}

TEST_CASE("Gram-Schmidt on a hand-computed 2x2 metric") {
  // H = U^* U with U = [[2, 1], [0, 2]]
  Mat H(2, 2);
  H << 4.0, 2.0, 2.0, 5.0;
  const auto T = gram_schmidt_transition(H);
  CHECK(std::abs(T.inverseP(0, 0) - 2.0) < 1e-15);
  CHECK(std::abs(T.inverseP(0, 1) - 1.0) < 1e-15);
  CHECK(std::abs(T.inverseP(1, 1) - 2.0) < 1e-15);
  const auto m = leading_minors(H);
  CHECK(m[1] == doctest::Approx(4.0));
  CHECK(m[2] == doctest::Approx(16.0));
  const auto s = slot_metrics(H);
  CHECK(s[0] == doctest::Approx(4.0));
  CHECK(s[1] == doctest::Approx(4.0));
}

TEST_CASE("Gram-Schmidt transition is upper triangular and orthonormalizes") {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 20; ++t) {
    const Mat H = hermitian_exp(random_hermitian(6, rng, 0.8));
    const auto T = gram_schmidt_transition(H);
    CHECK((T.P.adjoint() * H * T.P - Mat::Identity(6, 6)).norm() < 1e-11);
    CHECK((T.P * T.inverseP - Mat::Identity(6, 6)).norm() < 1e-11);
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < i; ++j) CHECK(std::abs(T.P(i, j)) == 0.0);
  }
}

TEST_CASE("Gram-Schmidt reports the failing leading minor") {
  Mat H(2, 2);
  H << 1.0, 2.0, 2.0, 1.0;
  CHECK_THROWS_WITH_AS(gram_schmidt_transition(H), "gram_schmidt_transition: leading minor 2 is not positive",
                       std::runtime_error);
}

TEST_CASE("real structure represents the metric through the pairing") {
  const auto spec = build_bundle(3);
  std::mt19937_64 rng(11);
  for (int t = 0; t < 10; ++t) {
    const Mat H = sample_compatible_metric(6, spec.C, rng(), 0.5, &spec.summand).H;
    const Mat K = real_structure(H, spec.C).K;
    const Mat u = random_hermitian(6, rng, 1.0).col(0), v = random_hermitian(6, rng, 1.0).col(1);
    // h(u, v) = v^* H u = C(u, kappa v)
    const cd lhs = (v.adjoint() * H * u)(0, 0);
    const cd rhs = ((K * v.conjugate()).transpose() * spec.C.entries * u)(0, 0);
    CHECK(std::abs(lhs - rhs) < 1e-12);
    CHECK((K * K.conjugate() - Mat::Identity(6, 6)).norm() < 1e-10);
  }
}

TEST_CASE("real structure refuses incompatible metrics") {
  Mat H = Mat::Identity(4, 4);
  H(0, 0) = 3.0;
  CHECK_THROWS_AS(real_structure(H, standard_pairing(2)), std::runtime_error);
}

TEST_CASE("h-norms and subspace angles in the flat metric") {
  const Mat I = Mat::Identity(4, 4);
  CHECK(h_norm(I, I) == doctest::Approx(2.0));
  Mat A = Mat::Zero(4, 1), B = Mat::Zero(4, 1);
  A(0, 0) = 1.0;
  B(1, 0) = 1.0;
  CHECK(subspace_angle(A, A, I) == doctest::Approx(0.0));
  CHECK(subspace_angle(A, B, I) == doctest::Approx(1.0));
}

TEST_CASE("quasi-cyclic volume of a Jordan block and eps0 closed form") {
  Mat f = Mat::Zero(3, 3);
  f(1, 0) = 1.0;
  f(2, 1) = 1.0;
  Vec e = Vec::Zero(3);
  e(0) = 1.0;
  // e, f e = e1, e2: unit Gram determinant
  CHECK(quasi_cyclic_volume(f, e, Mat::Identity(3, 3)) == doctest::Approx(1.0));
  // rho / (2 (m-1) (1+|f|)^((m-1)(m-2)/2)) = 1 / (2 * 2 * 2)
  CHECK(quasi_cyclic_eps0(3, 1.0, 1.0) == doctest::Approx(0.125));
  CHECK(quasi_cyclic_eps0(3, 0.0, 100.0) == doctest::Approx(1.0));
}

TEST_CASE("stability margin flags violated preconditions") {
  Mat f = Mat::Zero(3, 3);
  f(1, 0) = 1.0;
  f(2, 1) = 1.0;
  Vec e = Vec::Zero(3);
  e(0) = 1.0;
  const Mat I = Mat::Identity(3, 3);
  const auto r = quasi_cyclic_stability_margin(f, f, e, I, 2.0);
  CHECK_FALSE(r.preconditionsMet);
  CHECK_FALSE(r.holds);
  const auto ok = quasi_cyclic_stability_margin(f, f + 0.01 * I, e, I, 1.0);
  CHECK(ok.preconditionsMet);
  CHECK(ok.holds);
}

TEST_CASE("nu-split bound: identity, commuting pairs and invalid nu") {
  const Mat I = Mat::Identity(4, 4);
  Mat f = Mat::Zero(4, 4);
  f(0, 1) = 1.0;
  CHECK(nu_split_bound(f, I, I, 0.5).identityCase);
  Mat s = Mat::Zero(4, 4);
  s.diagonal() << 3.0, 1.0, 1.0, 1.0 / 3.0;
  Mat d = Mat::Zero(4, 4);
  d.diagonal() << 1.0, 2.0, 3.0, 4.0;
  const auto r = nu_split_bound(d, s, I, 1.0);
  CHECK(r.lhs == doctest::Approx(0.0));
  CHECK(r.holds);
  CHECK_THROWS_AS(nu_split_bound(d, s, I, 5.0), std::invalid_argument);
}

TEST_CASE("algebra suite is reproducible for a fixed seed") {
  const auto a = algebra_suite(3, 50, 7);
  const auto b = algebra_suite(3, 50, 7);
  CHECK(a.compatibility == b.compatibility);
  CHECK(a.kappaEigenspace == b.kappaEigenspace);
  CHECK(a.gamma == b.gamma);
}

TEST_CASE("perturbation lemmas hold on seeded instances") {
  const auto p = perturbation_suite(50, 21);
  CHECK(p.stabilityPreconditions == p.samples);
  CHECK(p.stabilityHolds == p.samples);
  CHECK(p.splitHolds == p.samples);
  CHECK(p.splitMinSlack >= 0.0);
}

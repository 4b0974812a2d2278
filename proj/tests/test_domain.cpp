#include <cmath>
#include <functional>

#include "doctest.h"
#include "sonn/domain.hpp"

using namespace sonn;

namespace {

Vec sample(const DiskGrid& grid, const std::function<cd(cd)>& f) {
  Vec u(grid.nodes());
  for (int p = 0; p < grid.nodes(); ++p) u(p) = f(grid.z(p));
  return u;
}

double interior_error(const DiskGrid& grid, const Vec& got, const std::function<cd(cd)>& exact) {
  double e = 0.0;
  for (int p = 0; p < grid.nodes(); ++p)
    if (!grid.boundary(p)) e = std::max(e, std::abs(got(p) - exact(grid.z(p))));
  return e;
}

double all_error(const DiskGrid& grid, const Vec& got, const std::function<cd(cd)>& exact) {
  double e = 0.0;
  for (int p = 0; p < grid.nodes(); ++p) e = std::max(e, std::abs(got(p) - exact(grid.z(p))));
  return e;
}

}  // namespace

TEST_CASE("conformal factor of the Poincare disk") {
  CHECK(conformal_factor(0.0) == doctest::Approx(4.0));
  CHECK(conformal_factor(0.5) == doctest::Approx(4.0 / (0.75 * 0.75)));
}

TEST_CASE("grid construction") {
  const auto g = build_grid(0.7, 16, 32);
  CHECK(g.nodes() == 16 * 32);
  CHECK(g.r.back() == doctest::Approx(0.7));
  for (int i = 1; i < g.Nr; ++i) CHECK(g.r[i] > g.r[i - 1]);
  CHECK(g.r.front() > 0.0);
  CHECK(g.boundary(g.index(15, 3)));
  CHECK_FALSE(g.boundary(g.index(14, 3)));
  CHECK_THROWS_AS(build_grid(1.0, 16, 32), std::invalid_argument);
  CHECK_THROWS_AS(build_grid(0.5, 16, 31), std::invalid_argument);
  CHECK_THROWS_AS(build_grid(0.5, 4, 32), std::invalid_argument);
}

TEST_CASE("Fornberg weights on a uniform stencil") {
  const auto w = fd_weights(0.0, {-0.1, 0.0, 0.1}, 2);
  CHECK(w[1][0] == doctest::Approx(-5.0));
  CHECK(w[1][1] == doctest::Approx(0.0));
  CHECK(w[1][2] == doctest::Approx(5.0));
  CHECK(w[2][0] == doctest::Approx(100.0));
  CHECK(w[2][1] == doctest::Approx(-200.0));
  CHECK(w[2][2] == doctest::Approx(100.0));
}

TEST_CASE("complex derivatives of z and |z|^2") {
  const auto grid = build_grid(0.6, 24, 48);
  PolarCalculus calc(grid);
  const Vec z = sample(grid, [](cd w) { return w; });
  CHECK(all_error(grid, calc.dz(z), [](cd) { return cd(1.0); }) < 1e-12);
  CHECK(all_error(grid, calc.dzbar(z), [](cd) { return cd(0.0); }) < 1e-12);
  const Vec r2 = sample(grid, [](cd w) { return cd(std::norm(w)); });
  CHECK(all_error(grid, calc.dz(r2), [](cd w) { return std::conj(w); }) < 1e-11);
  CHECK(all_error(grid, calc.dzbar(r2), [](cd w) { return w; }) < 1e-11);
  CHECK(all_error(grid, calc.dzdzbar(r2), [](cd) { return cd(1.0); }) < 1e-9);
}

TEST_CASE("derivative of exp(z) converges at second order") {
  double prevErr = 0.0, prevD = 0.0;
  for (int s : {24, 48, 96}) {
    const auto grid = build_grid(0.7, s, 2 * s);
    PolarCalculus calc(grid);
    const Vec u = sample(grid, [](cd w) { return std::exp(w); });
    const double err = all_error(grid, calc.dz(u), [](cd w) { return std::exp(w); });
    if (prevErr > 0.0) CHECK(std::log(prevErr / err) / std::log(prevD / grid.spacing()) >= 1.9);
    prevErr = err;
    prevD = grid.spacing();
  }
}

TEST_CASE("hyperbolic Laplacian of log g equals 2") {
  // curvature -1: Delta_g log g = 2
  double prevErr = 0.0, prevD = 0.0;
  for (int s : {24, 48, 96}) {
    const auto grid = build_grid(0.7, s, 2 * s);
    PolarCalculus calc(grid);
    const Vec u = sample(grid, [](cd w) { return cd(std::log(conformal_factor(std::abs(w)))); });
    const double err = interior_error(grid, calc.laplacian_gX(u), [](cd) { return cd(2.0); });
    if (prevErr > 0.0) {
      const double order = std::log(prevErr / err) / std::log(prevD / grid.spacing());
      CHECK(order >= 1.8);
      CHECK(order <= 2.2);
    }
    prevErr = err;
    prevD = grid.spacing();
  }
}

TEST_CASE("Laplacian kills constants and harmonic functions") {
  const auto grid = build_grid(0.7, 48, 96);
  PolarCalculus calc(grid);
  const Vec c = Vec::Constant(grid.nodes(), cd(3.0));
  CHECK(interior_error(grid, calc.laplacian_gX(c), [](cd) { return cd(0.0); }) < 1e-10);
  const Vec h = sample(grid, [](cd w) { return cd((w * w).real()); });
  CHECK(interior_error(grid, calc.laplacian_gX(h), [](cd) { return cd(0.0); }) < 1e-9);
}

TEST_CASE("shifted solve inverts the scalar operator") {
  const auto grid = build_grid(0.7, 32, 64);
  PolarCalculus calc(grid);
  // u = R^2 - |z|^2 gives -(2/g) u_{z zbar} = 2/g, zero on the boundary
  Eigen::MatrixXcd F(grid.nodes(), 1);
  for (int p = 0; p < grid.nodes(); ++p) F(p, 0) = 2.0 / grid.gAt(p);
  calc.solve_shifted(0.0, F);
  double err = 0.0;
  for (int p = 0; p < grid.nodes(); ++p) err = std::max(err, std::abs(F(p, 0) - (0.49 - std::norm(grid.z(p)))));
  CHECK(err < 1e-10);
}

TEST_CASE("shifted solve is consistent with the discrete operator for every Fourier mode") {
  const auto grid = build_grid(0.6, 20, 16);
  PolarCalculus calc(grid);
  Eigen::MatrixXcd F(grid.nodes(), 1);
  for (int p = 0; p < grid.nodes(); ++p) {
    const cd z = grid.z(p);
    F(p, 0) = grid.boundary(p) ? cd(0.0) : std::exp(z) + std::conj(z) * std::conj(z) * z + cd(0.3, 0.2);
  }
  Eigen::MatrixXcd U = F;
  const double alpha = 1.7;
  calc.solve_shifted(alpha, U);
  Eigen::MatrixXcd Uzz;
  calc.derivatives(U, nullptr, nullptr, &Uzz);
  double err = 0.0;
  for (int p = 0; p < grid.nodes(); ++p) {
    if (grid.boundary(p)) continue;
    const cd applied = alpha * U(p, 0) - (2.0 / grid.gAt(p)) * Uzz(p, 0);
    err = std::max(err, std::abs(applied - F(p, 0)));
  }
  CHECK(err < 1e-10);
}

TEST_CASE("interpolation reproduces smooth fields between nodes") {
  const auto grid = build_grid(0.7, 48, 96);
  PolarCalculus calc(grid);
  const Vec u = sample(grid, [](cd w) { return w * w * w + std::conj(w); });
  for (double r : {0.0, 0.05, 0.21, 0.43}) {
    for (double phi : {0.0, 0.7, 2.9}) {
      const cd z = std::polar(r, phi);
      CHECK(std::abs(calc.interpolate(u, r, phi) - (z * z * z + std::conj(z))) < 1e-6);
    }
  }
}

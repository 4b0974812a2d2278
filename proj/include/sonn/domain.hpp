#pragma once

#include <memory>
#include <vector>

#include "sonn/types.hpp"

namespace sonn {

double conformal_factor(double r);  // g = 4 / (1 - r^2)^2

// Polar grid on the Euclidean disk |z| <= R. Radial nodes r_i = tanh(beta xi_i), beta = artanh R,
// xi_i = (i + 1/2) h with xi_{Nr-1} = 1, so the last ring is the boundary circle and the first
// ring's mirror through the center is ring 0 rotated by pi. Node p = i * Nphi + j.
struct DiskGrid {
  double R = 0.0;
  int Nr = 0;
  int Nphi = 0;
  double beta = 0.0;
  double hxi = 0.0;
  std::vector<double> xi, r, phi, g;

  int nodes() const { return Nr * Nphi; }
  int index(int i, int j) const { return i * Nphi + j; }
  int ring(int p) const { return p / Nphi; }
  int slot(int p) const { return p % Nphi; }
  bool boundary(int p) const { return ring(p) == Nr - 1; }
  cd z(int p) const;
  double gAt(int p) const { return g[ring(p)]; }
  double spacing() const;  // largest radial gap
  double radius_of(double xiValue) const;
};

DiskGrid build_grid(double R, int Nr, int Nphi);

// Finite-difference weights (Fornberg) for derivatives 0..order at x0 from the given nodes.
std::vector<std::vector<double>> fd_weights(double x0, const std::vector<double>& nodes, int order);

// Discrete complex calculus on a DiskGrid: radial 3-point stencils (4-point one-sided second
// derivative on the boundary ring), Fourier differentiation along each ring.
class PolarCalculus {
 public:
  explicit PolarCalculus(const DiskGrid& grid);
  ~PolarCalculus();
  PolarCalculus(const PolarCalculus&) = delete;
  PolarCalculus& operator=(const PolarCalculus&) = delete;

  const DiskGrid& grid() const { return grid_; }

  // Column-wise on nodes x k arrays; null outputs are skipped.
  void derivatives(const Eigen::MatrixXcd& U, Eigen::MatrixXcd* dz, Eigen::MatrixXcd* dzb,
                   Eigen::MatrixXcd* dzdzb) const;

  Vec dz(const Vec& u) const;
  Vec dzbar(const Vec& u) const;
  Vec dzdzbar(const Vec& u) const;
  Vec laplacian_gX(const Vec& u) const;  // (4/g) u_{z zbar}

  // Solves (alpha + L) u = f in place on interior rings, L u = -(2/g) u_{z zbar}, u = 0 on the boundary ring.
  void solve_shifted(double alpha, Eigen::MatrixXcd& F) const;

  // Value of a nodal field at (r, phi): 4-point Lagrange in xi, trigonometric in phi.
  cd interpolate(const Vec& u, double r, double phi) const;

 private:
  struct Impl;
  const DiskGrid& grid_;
  std::unique_ptr<Impl> impl_;
};

}  // namespace sonn

#include "sonn/domain.hpp"

#include <fftw3.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sonn {

double conformal_factor(double r) {
  const double s = 1.0 - r * r;
  return 4.0 / (s * s);
}

cd DiskGrid::z(int p) const { return std::polar(r[ring(p)], phi[slot(p)]); }

double DiskGrid::spacing() const {
  double d = 2.0 * r[0];
  for (int i = 0; i + 1 < Nr; ++i) d = std::max(d, r[i + 1] - r[i]);
  return d;
}

double DiskGrid::radius_of(double x) const { return std::tanh(beta * x); }

DiskGrid build_grid(double R, int Nr, int Nphi) {
  if (!(R > 0.0 && R < 1.0)) throw std::invalid_argument("build_grid: R must lie in (0,1)");
  if (Nr < 8 || Nphi < 8) throw std::invalid_argument("build_grid: Nr and Nphi must be >= 8");
  if (Nphi % 2 != 0) throw std::invalid_argument("build_grid: Nphi must be even");
  DiskGrid G;
  G.R = R;
  G.Nr = Nr;
  G.Nphi = Nphi;
  G.beta = std::atanh(R);
  G.hxi = 1.0 / (Nr - 0.5);
  G.xi.resize(Nr);
  G.r.resize(Nr);
  G.g.resize(Nr);
  for (int i = 0; i < Nr; ++i) {
    G.xi[i] = (i + 0.5) * G.hxi;
    G.r[i] = (i == Nr - 1) ? R : std::tanh(G.beta * G.xi[i]);
    G.g[i] = conformal_factor(G.r[i]);
  }
  G.phi.resize(Nphi);
  for (int j = 0; j < Nphi; ++j) G.phi[j] = 2.0 * std::numbers::pi * j / Nphi;
  return G;
}

std::vector<std::vector<double>> fd_weights(double x0, const std::vector<double>& x, int order) {
  const int n = static_cast<int>(x.size());
  std::vector<std::vector<double>> c(order + 1, std::vector<double>(n, 0.0));
  double c1 = 1.0;
  double c4 = x[0] - x0;
  c[0][0] = 1.0;
  for (int i = 1; i < n; ++i) {
    const int mn = std::min(i, order);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[i] - x0;
    for (int j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) c[k][i] = c1 * (k * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
        c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
      }
      for (int k = mn; k >= 1; --k) c[k][j] = (c4 * c[k][j] - k * c[k - 1][j]) / c3;
      c[0][j] = c4 * c[0][j] / c3;
    }
    c1 = c2;
  }
  return c;
}

struct PolarCalculus::Impl {
  int Nr, Nphi;
  // radial stencils: ring i uses rings idx[i][*] (-1 means the mirror of ring 0, -2 of ring 1)
  std::vector<std::vector<int>> idx1, idx2;
  std::vector<std::vector<double>> w1, w2;
  fftw_complex* a = nullptr;
  fftw_complex* b = nullptr;
  fftw_complex* c = nullptr;
  fftw_plan fwd = nullptr, bwd = nullptr;
  std::vector<double> mode;  // signed wavenumber per FFT index

  ~Impl() {
    if (fwd) fftw_destroy_plan(fwd);
    if (bwd) fftw_destroy_plan(bwd);
    fftw_free(a);
    fftw_free(b);
    fftw_free(c);
  }
};

PolarCalculus::PolarCalculus(const DiskGrid& grid) : grid_(grid), impl_(std::make_unique<Impl>()) {
  auto& I = *impl_;
  I.Nr = grid.Nr;
  I.Nphi = grid.Nphi;
  const int Nr = grid.Nr, Np = grid.Nphi;
  auto rAt = [&](int k) { return k >= 0 ? grid.r[k] : -grid.r[-k - 1]; };
  I.idx1.resize(Nr);
  I.idx2.resize(Nr);
  I.w1.resize(Nr);
  I.w2.resize(Nr);
  for (int i = 0; i < Nr; ++i) {
    std::vector<int> id3;
    if (i < Nr - 1) {
      id3 = {i - 1, i, i + 1};
      std::vector<double> xs = {rAt(i - 1), rAt(i), rAt(i + 1)};
      auto w = fd_weights(grid.r[i], xs, 2);
      I.idx1[i] = id3;
      I.idx2[i] = id3;
      I.w1[i] = w[1];
      I.w2[i] = w[2];
    } else {
      std::vector<int> id3b = {i - 2, i - 1, i};
      std::vector<double> x3 = {rAt(i - 2), rAt(i - 1), rAt(i)};
      I.idx1[i] = id3b;
      I.w1[i] = fd_weights(grid.r[i], x3, 1)[1];
      std::vector<int> id4 = {i - 3, i - 2, i - 1, i};
      std::vector<double> x4 = {rAt(i - 3), rAt(i - 2), rAt(i - 1), rAt(i)};
      I.idx2[i] = id4;
      I.w2[i] = fd_weights(grid.r[i], x4, 2)[2];
    }
  }
  const size_t total = static_cast<size_t>(Nr) * Np;
  I.a = fftw_alloc_complex(total);
  I.b = fftw_alloc_complex(total);
  I.c = fftw_alloc_complex(total);
  int nn[1] = {Np};
  I.fwd = fftw_plan_many_dft(1, nn, Nr, I.a, nullptr, 1, Np, I.a, nullptr, 1, Np, FFTW_FORWARD, FFTW_ESTIMATE);
  I.bwd = fftw_plan_many_dft(1, nn, Nr, I.a, nullptr, 1, Np, I.a, nullptr, 1, Np, FFTW_BACKWARD, FFTW_ESTIMATE);
  I.mode.resize(Np);
  for (int k = 0; k < Np; ++k) I.mode[k] = (k <= Np / 2) ? k : k - Np;
}

PolarCalculus::~PolarCalculus() = default;

namespace {

inline cd& as_cd(fftw_complex& x) { return reinterpret_cast<cd&>(x); }

}  // namespace

void PolarCalculus::derivatives(const Eigen::MatrixXcd& U, Eigen::MatrixXcd* dz, Eigen::MatrixXcd* dzb,
                                Eigen::MatrixXcd* dzdzb) const {
  const auto& I = *impl_;
  const auto& G = grid_;
  const int Nr = G.Nr, Np = G.Nphi, N = G.nodes();
  const int K = static_cast<int>(U.cols());
  if (U.rows() != N) throw std::invalid_argument("PolarCalculus::derivatives: field size mismatch");
  if (dz) dz->resize(N, K);
  if (dzb) dzb->resize(N, K);
  if (dzdzb) dzdzb->resize(N, K);
  const int half = Np / 2;
  const double inv = 1.0 / Np;
  std::vector<cd> eminus(Np), eplus(Np);
  for (int j = 0; j < Np; ++j) {
    eminus[j] = std::polar(0.5, -G.phi[j]);
    eplus[j] = std::polar(0.5, G.phi[j]);
  }
  auto val = [&](const cd* u, int ring, int j) -> cd {
    if (ring >= 0) return u[ring * Np + j];
    return u[(-ring - 1) * Np + (j + half) % Np];
  };
  for (int col = 0; col < K; ++col) {
    const cd* u = U.col(col).data();
    for (int p = 0; p < N; ++p) as_cd(I.a[p]) = u[p];
    fftw_execute_dft(I.fwd, I.a, I.a);
    for (int i = 0; i < Nr; ++i) {
      for (int k = 0; k < Np; ++k) {
        const cd v = as_cd(I.a[i * Np + k]) * inv;
        const double m = I.mode[k];
        as_cd(I.b[i * Np + k]) = (k == half) ? cd(0.0) : cd(0.0, m) * v;
        as_cd(I.c[i * Np + k]) = -m * m * v;
      }
    }
    fftw_execute_dft(I.bwd, I.b, I.b);
    fftw_execute_dft(I.bwd, I.c, I.c);
    for (int i = 0; i < Nr; ++i) {
      const double ri = G.r[i];
      const auto& id1 = I.idx1[i];
      const auto& id2 = I.idx2[i];
      const auto& w1 = I.w1[i];
      const auto& w2 = I.w2[i];
      for (int j = 0; j < Np; ++j) {
        cd ur = 0.0, urr = 0.0;
        for (size_t s = 0; s < id1.size(); ++s) ur += w1[s] * val(u, id1[s], j);
        for (size_t s = 0; s < id2.size(); ++s) urr += w2[s] * val(u, id2[s], j);
        const int p = i * Np + j;
        const cd up = as_cd(I.b[p]);
        const cd upp = as_cd(I.c[p]);
        const cd iup = cd(0.0, 1.0 / ri) * up;
        if (dz) (*dz)(p, col) = eminus[j] * (ur - iup);
        if (dzb) (*dzb)(p, col) = eplus[j] * (ur + iup);
        if (dzdzb) (*dzdzb)(p, col) = 0.25 * (urr + ur / ri + upp / (ri * ri));
      }
    }
  }
}

Vec PolarCalculus::dz(const Vec& u) const {
  Eigen::MatrixXcd out;
  derivatives(u, &out, nullptr, nullptr);
  return out.col(0);
}

Vec PolarCalculus::dzbar(const Vec& u) const {
  Eigen::MatrixXcd out;
  derivatives(u, nullptr, &out, nullptr);
  return out.col(0);
}

Vec PolarCalculus::dzdzbar(const Vec& u) const {
  Eigen::MatrixXcd out;
  derivatives(u, nullptr, nullptr, &out);
  return out.col(0);
}

Vec PolarCalculus::laplacian_gX(const Vec& u) const {
  Vec l = dzdzbar(u);
  for (int p = 0; p < l.size(); ++p) l(p) *= 4.0 / grid_.gAt(p);
  return l;
}

void PolarCalculus::solve_shifted(double alpha, Eigen::MatrixXcd& F) const {
  const auto& I = *impl_;
  const auto& G = grid_;
  const int Nr = G.Nr, Np = G.Nphi, N = G.nodes();
  const int M = Nr - 1;  // interior rings
  std::vector<cd> lo(M), di(M), up(M), rhs(M), cp(M);
  const double inv = 1.0 / Np;
  for (int col = 0; col < F.cols(); ++col) {
    cd* f = F.col(col).data();
    for (int p = 0; p < N; ++p) as_cd(I.a[p]) = f[p];
    fftw_execute_dft(I.fwd, I.a, I.a);
    for (int k = 0; k < Np; ++k) {
      const double m = I.mode[k];
      const double mirror = (static_cast<long>(std::lround(m)) % 2 == 0) ? 1.0 : -1.0;
      for (int i = 0; i < M; ++i) {
        const double ri = G.r[i];
        const double s = -0.5 / G.g[i];
        const auto& w1 = I.w1[i];
        const auto& w2 = I.w2[i];
        double a0 = s * (w2[0] + w1[0] / ri);
        double b0 = alpha + s * (w2[1] + w1[1] / ri - m * m / (ri * ri));
        double c0 = s * (w2[2] + w1[2] / ri);
        if (i == 0) {
          b0 += mirror * a0;
          a0 = 0.0;
        }
        if (i == M - 1) c0 = 0.0;
        lo[i] = a0;
        di[i] = b0;
        up[i] = c0;
        rhs[i] = as_cd(I.a[i * Np + k]);
      }
      // Thomas elimination
      cp[0] = up[0] / di[0];
      rhs[0] = rhs[0] / di[0];
      for (int i = 1; i < M; ++i) {
        const cd den = di[i] - lo[i] * cp[i - 1];
        cp[i] = up[i] / den;
        rhs[i] = (rhs[i] - lo[i] * rhs[i - 1]) / den;
      }
      for (int i = M - 2; i >= 0; --i) rhs[i] -= cp[i] * rhs[i + 1];
      for (int i = 0; i < M; ++i) as_cd(I.a[i * Np + k]) = rhs[i] * inv;
      as_cd(I.a[M * Np + k]) = 0.0;
    }
    fftw_execute_dft(I.bwd, I.a, I.a);
    for (int p = 0; p < N; ++p) f[p] = as_cd(I.a[p]);
    for (int j = 0; j < Np; ++j) f[M * Np + j] = 0.0;
  }
}

cd PolarCalculus::interpolate(const Vec& u, double r, double phi) const {
  const auto& G = grid_;
  const int Nr = G.Nr, Np = G.Nphi;
  if (r < 0.0 || r > G.R * (1.0 + 1e-12)) throw std::invalid_argument("interpolate: radius outside the grid");
  const double x = std::atanh(std::min(r, G.R)) / G.beta;
  int i0 = static_cast<int>(std::floor(x / G.hxi - 0.5));
  int first = std::min(i0 - 1, Nr - 4);
  std::vector<int> rings = {first, first + 1, first + 2, first + 3};
  std::vector<double> xs(4);
  for (int s = 0; s < 4; ++s) {
    const int k = rings[s];
    xs[s] = k >= 0 ? G.xi[k] : -G.xi[-k - 1];
  }
  const auto w = fd_weights(x, xs, 0)[0];
  auto ring_value = [&](int ring, double angle) {
    // trigonometric interpolation of one ring
    cd acc = 0.0;
    for (int k = 0; k < Np; ++k) {
      const double m = (k <= Np / 2) ? k : k - Np;
      cd coef = 0.0;
      for (int j = 0; j < Np; ++j) coef += u(ring * Np + j) * std::polar(1.0, -m * G.phi[j]);
      coef /= Np;
      if (k == Np / 2) acc += coef * std::cos(m * angle);
      else acc += coef * std::polar(1.0, m * angle);
    }
    return acc;
  };
  cd out = 0.0;
  for (int s = 0; s < 4; ++s) {
    const int k = rings[s];
    if (w[s] == 0.0) continue;
    if (k >= 0) out += w[s] * ring_value(k, phi);
    else out += w[s] * ring_value(-k - 1, phi + std::numbers::pi);
  }
  return out;
}

}  // namespace sonn

#include "sonn/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <stdexcept>

namespace sonn {

namespace {

std::vector<double> log_minors(const Mat& H) {
  const auto m = leading_minors(H);
  std::vector<double> out(m.size());
  for (size_t k = 0; k < m.size(); ++k) out[k] = std::log(m[k]);
  return out;
}

void require_shape(const MatrixField& h, const BundleSpec& spec, const DiskGrid& grid, const char* who) {
  if (h.dim != 2 * spec.n || h.nodes() != grid.nodes())
    throw std::invalid_argument(std::string(who) + ": field does not match bundle and grid");
}

}  // namespace

DominationReport domination_report(const MatrixField& h, const BundleSpec& spec, const DiskGrid& grid, double tolerance,
                                   double strictThreshold) {
  require_shape(h, spec, grid, "domination_report");
  const int d = 2 * spec.n;
  DominationReport r;
  r.n = spec.n;
  r.tolerance = tolerance;
  r.strictThreshold = strictThreshold;
  r.minMargin.assign(d, 1e300);
  r.maxMargin.assign(d, -1e300);
  r.margins.setZero(grid.nodes(), d);
  for (int p = 0; p < grid.nodes(); ++p) {
    // h_X is diagonal: log det(h_X|F_k) is a partial sum of log slot values
    const Eigen::VectorXd hx = hX_diagonal(spec, grid.gAt(p));
    const auto lm = log_minors(Mat(h.at(p)));
    double lx = 0.0;
    for (int k = 1; k <= d; ++k) {
      lx += std::log(hx(k - 1));
      r.margins(p, k - 1) = lx - lm[k];
    }
    if (grid.boundary(p)) continue;
    for (int k = 0; k < d; ++k) {
      r.minMargin[k] = std::min(r.minMargin[k], r.margins(p, k));
      r.maxMargin[k] = std::max(r.maxMargin[k], r.margins(p, k));
    }
  }
  r.pass = true;
  for (int k = 0; k < d; ++k) {
    r.pass = r.pass && r.minMargin[k] >= -tolerance;
    r.maxPositiveMargin = std::max(r.maxPositiveMargin, r.maxMargin[k]);
  }
  r.strictSomewhere = r.maxPositiveMargin >= strictThreshold;
  return r;
}

double StructuralSample::max() const {
  return std::max({minorSymmetry, slotProduct, middleMinor, middleSlots, gamma});
}

StructuralSample structural_sample(const Mat& H, const Mat& A, const BundleSpec& spec) {
  const int n = spec.n;
  const int d = 2 * n;
  StructuralSample s;
  const auto T = gram_schmidt_transition(H);
  std::vector<double> minors(d + 1, 1.0), slots(d);
  for (int k = 0; k < d; ++k) {
    slots[k] = std::norm(T.inverseP(k, k));
    minors[k + 1] = minors[k] * slots[k];
  }
  for (int k = 0; k <= d; ++k)
    s.minorSymmetry = std::max(s.minorSymmetry, std::abs(minors[k] - minors[d - k]) / std::max(1.0, std::abs(minors[k])));
  for (int k = 0; k < d; ++k) s.slotProduct = std::max(s.slotProduct, std::abs(slots[k] * slots[d - 1 - k] - 1.0));
  if (n % 2 == 1) {
    s.middleMinor = std::abs(minors[n] - minors[n + 1]) / std::max(1.0, std::abs(minors[n]));
    s.middleSlots = std::max(std::abs(slots[n - 1] - 1.0), std::abs(slots[n] - 1.0));
  }
  if (A.size() > 0 && n >= 2) {
    const Mat B = T.inverseP * A * T.P;
    // gamma: L_n -> L_{n+1}; gamma': L_{n+1} -> L_{n+2}
    s.gamma = (n % 2 == 0) ? std::abs(B(n, n - 1)) : std::abs(B(n + 1, n));
  }
  return s;
}

StructuralReport structural_identities(const MatrixField& h, const MatrixField& A, const BundleSpec& spec,
                                       const DiskGrid& grid, double tolerance) {
  require_shape(h, spec, grid, "structural_identities");
  StructuralReport r;
  r.tolerance = tolerance;
  r.gammaName = spec.n % 2 == 0 ? "gamma" : "gamma'";
  for (int p = 0; p < grid.nodes(); ++p) {
    const Mat a = A.nodes() > 0 ? Mat(A.at(p)) : Mat();
    // gamma is a (1,0)-form; measure it in the g_X-unit coframe
    const auto s = structural_sample(Mat(h.at(p)), a * std::sqrt(2.0 / grid.gAt(p)), spec);
    r.worst.minorSymmetry = std::max(r.worst.minorSymmetry, s.minorSymmetry);
    r.worst.slotProduct = std::max(r.worst.slotProduct, s.slotProduct);
    r.worst.middleMinor = std::max(r.worst.middleMinor, s.middleMinor);
    r.worst.middleSlots = std::max(r.worst.middleSlots, s.middleSlots);
    r.worst.gamma = std::max(r.worst.gamma, s.gamma);
  }
  r.pass = r.worst.max() <= tolerance;
  return r;
}

EnergyReport energy_report(const MatrixField& h, const MatrixField& A, const BundleSpec& spec, const DiskGrid& grid,
                           double tolerance) {
  require_shape(h, spec, grid, "energy_report");
  const int n = spec.n;
  const int N = grid.nodes();
  EnergyReport r;
  r.n = n;
  r.tolerance = tolerance;
  const double S = base_higgs_norm_sq(n);
  r.bound = (2.0 * n - 2.0) * S;
  r.higgsNorm.resize(N);
  r.energy.resize(N);
  r.wn.resize(N);
  r.minMargin = 1e300;
  r.maxMargin = -1e300;
  r.chainMinMargin = 1e300;
  for (int p = 0; p < N; ++p) {
    const Mat H = h.at(p);
    const double g = grid.gAt(p);
    const double t = higgs_norm_sq(Mat(A.at(p)), H, g);
    r.higgsNorm(p) = t;
    r.energy(p) = (2.0 * n - 2.0) * t;
    const Eigen::VectorXd hx = hX_diagonal(spec, g);
    const auto lm = log_minors(H);
    double lx = 0.0, w = 0.0;
    for (int k = 1; k <= n - 1; ++k) {
      lx += std::log(hx(k - 1));
      w += -2.0 * (lm[k] - lx);
    }
    r.wn(p) = w;
    if (grid.boundary(p)) continue;
    const double margin = r.energy(p).real() - r.bound;
    r.minMargin = std::min(r.minMargin, margin);
    r.maxMargin = std::max(r.maxMargin, margin);
    const double chain = (S > 0.0) ? t - S * std::exp(w / S) : t;
    r.chainMinMargin = std::min(r.chainMinMargin, chain);
  }
  r.boundHolds = r.minMargin >= -tolerance;
  r.chainHolds = r.chainMinMargin >= -tolerance;
  r.strictSomewhere = r.maxMargin > tolerance;
  return r;
}

double expm1_ratio(double x) { return std::abs(x) < 1e-8 ? 1.0 + 0.5 * x : std::expm1(x) / x; }

Eigen::MatrixXd vk_coupling_matrix(const Eigen::VectorXd& c, int n) {
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k <= n - 1; ++k) {
    if (k - 1 >= 1) M(k - 1, k - 2) += c(k - 1);
    M(k - 1, k - 1) -= 2.0 * c(k - 1);
    if (k + 1 <= n) M(k - 1, k) += c(k - 1);
  }
  // row n couples to v_{n-2}; v_0 = 0 drops out
  if (n - 2 >= 1) M(n - 1, n - 3) += c(n - 1);
  M(n - 1, n - 1) -= c(n - 1);
  return M;
}

namespace {

bool strongly_connected(const Eigen::MatrixXd& M) {
  const int n = static_cast<int>(M.rows());
  auto reach = [&](bool transpose) {
    std::vector<char> seen(n, 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
      const int i = stack.back();
      stack.pop_back();
      for (int j = 0; j < n; ++j) {
        const double w = transpose ? M(j, i) : M(i, j);
        if (i != j && w > 0.0 && !seen[j]) {
          seen[j] = 1;
          stack.push_back(j);
        }
      }
    }
    return std::all_of(seen.begin(), seen.end(), [](char s) { return s != 0; });
  };
  return reach(false) && reach(true);
}

}  // namespace

VkReport vk_cooperative_check(const MatrixField& h, const BundleSpec& spec, const PolarCalculus& calc,
                              double vTolerance) {
  const auto& grid = calc.grid();
  require_shape(h, spec, grid, "vk_cooperative_check");
  const int n = spec.n;
  const int N = grid.nodes();
  VkReport r;
  r.n = n;
  r.vTolerance = vTolerance;
  r.v.setZero(N, n);
  r.c.setZero(N, n);
  r.lhs.setZero(N, n);
  // log det(h_X|F_k) for k = 0..n per node
  Eigen::MatrixXd lx(N, n + 1);
  for (int p = 0; p < N; ++p) {
    const Eigen::VectorXd hx = hX_diagonal(spec, grid.gAt(p));
    const auto lm = log_minors(Mat(h.at(p)));
    lx(p, 0) = 0.0;
    for (int k = 1; k <= n; ++k) {
      lx(p, k) = lx(p, k - 1) + std::log(hx(k - 1));
      r.v(p, k - 1) = lm[k] - lx(p, k);
    }
  }
  auto vAt = [&](int p, int k) { return k == 0 ? 0.0 : r.v(p, k - 1); };
  Eigen::MatrixXd halfLap(N, n);
  for (int k = 0; k < n; ++k) halfLap.col(k) = 0.5 * calc.laplacian_gX(Vec(r.v.col(k).cast<cd>())).real();
  double scale = 0.0;
  r.cooperative = true;
  r.fullyCoupled = true;
  r.unitSuperSolution = true;
  for (int p = 0; p < N; ++p) {
    const double G = 0.5 * grid.gAt(p);
    for (int k = 1; k <= n; ++k) {
      double ratio, x;
      if (k <= n - 1) {
        ratio = std::exp(lx(p, k - 1) + lx(p, k + 1) - 2.0 * lx(p, k));
        x = vAt(p, k - 1) + vAt(p, k + 1) - 2.0 * vAt(p, k);
      } else {
        ratio = std::exp(lx(p, std::max(n - 2, 0)) - lx(p, n));
        x = vAt(p, std::max(n - 2, 0)) - vAt(p, n);
      }
      r.c(p, k - 1) = ratio / G * expm1_ratio(x);
      const double coupling = r.c(p, k - 1) * x;
      r.lhs(p, k - 1) = halfLap(p, k - 1) + coupling;
      if (!grid.boundary(p)) scale = std::max(scale, std::abs(halfLap(p, k - 1)) + std::abs(coupling));
    }
    if (grid.boundary(p)) continue;
    const Eigen::MatrixXd M = vk_coupling_matrix(r.c.row(p).transpose(), n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (i != j && M(i, j) < 0.0) r.cooperative = false;
    if (n > 1 && !strongly_connected(M)) r.fullyCoupled = false;
    if ((M.rowwise().sum().array() > 1e-14).any()) r.unitSuperSolution = false;
  }
  r.spacing = grid.spacing();
  r.scale = std::max(scale, 1e-300);
  r.delta = 10.0 * r.spacing * r.spacing * r.scale;
  r.minLhs = 1e300;
  r.supInteriorV = -1e300;
  r.supBoundaryV = -1e300;
  double maxInteriorV = -1e300;
  for (int p = 0; p < N; ++p) {
    for (int k = 0; k < n; ++k) {
      if (grid.boundary(p)) {
        r.supBoundaryV = std::max(r.supBoundaryV, r.v(p, k));
        continue;
      }
      r.minLhs = std::min(r.minLhs, r.lhs(p, k));
      maxInteriorV = std::max(maxInteriorV, r.v(p, k));
    }
    if (!grid.boundary(p)) {
      const double worst = r.lhs.row(p).minCoeff();
      if (worst < -r.delta && worst >= -10.0 * r.delta) ++r.flaggedNodes;
    }
  }
  r.supInteriorV = maxInteriorV;
  r.inequalitiesHold = r.minLhs >= -r.delta;
  r.maximumPrinciple = r.supInteriorV <= r.supBoundaryV + r.delta;
  r.nonpositive = r.supInteriorV <= vTolerance;
  return r;
}

}  // namespace sonn

namespace sonn {

namespace {

HiggsTuple random_tuple(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> N01(0.0, 1.0);
  std::uniform_int_distribution<int> deg(0, 2);
  HiggsTuple q = HiggsTuple::zero(n);
  for (auto& c : q.coefficients) {
    c.resize(deg(rng) + 1);
    for (auto& a : c) a = cd(N01(rng), N01(rng));
  }
  return q;
}

cd random_point(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  return std::polar(0.9 * std::sqrt(U(rng)), 2.0 * std::numbers::pi * U(rng));
}

Mat random_matrix(int m, std::mt19937_64& rng) {
  std::normal_distribution<double> N01(0.0, 1.0);
  Mat M(m, m);
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < m; ++i) M(i, j) = cd(N01(rng), N01(rng));
  return M;
}

}  // namespace

AlgebraSuiteReport algebra_suite(int n, int samples, std::uint64_t seed) {
  const BundleSpec spec = build_bundle(n);
  const int d = 2 * n;
  AlgebraSuiteReport r;
  r.n = n;
  r.samples = samples;
  r.seed = seed;
  std::mt19937_64 rng(seed);
  for (int s = 0; s < samples; ++s) {
    const Mat H = sample_compatible_metric(d, spec.C, rng(), 0.5, &spec.summand).H;
    const Mat H2 = sample_compatible_metric(d, spec.C, rng(), 0.5, &spec.summand).H;
    r.compatibility = std::max(r.compatibility, compatibility_residual(H, spec.C));
    r.determinant = std::max(r.determinant, std::abs(H.determinant() - 1.0));
    r.triangular = std::max(r.triangular, check_triangular_identities(gram_schmidt_transition(H), spec.C).max());
    const auto K = real_structure(H, spec.C, 1e-8).K;
    r.kappaInvolution = std::max(r.kappaInvolution, (K * K.conjugate() - Mat::Identity(d, d)).norm());
    r.kappaEigenspace = std::max(r.kappaEigenspace, kappa_eigenspace_angle(H, H2, spec.C));
    const HiggsTuple q = random_tuple(n, rng);
    const Mat A = theta_matrices(spec, q, random_point(rng)).weight;
    const auto st = structural_sample(H, A, spec);
    r.minorSymmetry = std::max(r.minorSymmetry, st.minorSymmetry);
    r.gamma = std::max(r.gamma, st.gamma);
    r.middleSlots = std::max(r.middleSlots, st.middleSlots);
  }
  return r;
}

SkewSuiteReport skew_suite(int samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pickN(1, kMaxRank);
  SkewSuiteReport r;
  r.samples = samples;
  for (int s = 0; s < samples; ++s) {
    const BundleSpec spec = build_bundle(pickN(rng));
    const HiggsTuple q = random_tuple(spec.n, rng);
    r.worst = std::max(r.worst, skew_residual(spec, theta_matrices(spec, q, random_point(rng)).block));
  }
  return r;
}

PerturbationSuiteReport perturbation_suite(int samples, std::uint64_t seed, int maxN) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pickM(2, 2 * maxN);
  std::uniform_int_distribution<int> pickN(std::min(2, maxN), maxN);  // n = 1 gives s = id
  std::uniform_real_distribution<double> U(0.0, 1.0);
  PerturbationSuiteReport r;
  r.samples = samples;
  r.stabilityMinSlack = 1e300;
  r.splitMinSlack = 1e300;
  r.splitMinRelativeSlack = 1e300;
  for (int s = 0; s < samples; ++s) {
    // stability of quasi-cyclic vectors at half of eps0
    const int m = pickM(rng);
    const Mat f = random_matrix(m, rng);
    const Vec e = random_matrix(m, rng).col(0);
    const Mat H = hermitian_exp(random_hermitian(m, rng, 0.5));
    const double rho = (0.5 + 0.5 * U(rng)) * quasi_cyclic_volume(f, e, H) / std::pow(h_vector_norm(e, H), m - 1);
    const Mat dir = random_matrix(m, rng);
    const double eps0 = quasi_cyclic_eps0(m, h_norm(f, H), rho);
    const Mat f1 = f + 0.5 * eps0 * dir / h_norm(dir, H);
    const auto st = quasi_cyclic_stability_margin(f, f1, e, H, rho);
    r.stabilityPreconditions += st.preconditionsMet;
    r.stabilityHolds += st.holds;
    r.stabilityMinSlack = std::min(r.stabilityMinSlack, st.slack);

    // nu-split bound for s = h1^-1 h2 and f nearly commuting with s
    const BundleSpec spec = build_bundle(pickN(rng));
    const int d = 2 * spec.n;
    const Mat H1 = sample_compatible_metric(d, spec.C, rng(), 1.0, &spec.summand).H;
    const Mat H2 = sample_compatible_metric(d, spec.C, rng(), 1.0, &spec.summand).H;
    const Mat S = H1.llt().solve(H2);
    const auto eig = h_self_adjoint_eigen(S, H1);
    const Mat Q = eig.vectors;
    const Mat Qinv = Q.inverse();
    Mat diagPart = Mat::Zero(d, d);
    const Mat R = random_matrix(d, rng);
    for (int i = 0; i < d; ++i) diagPart(i, i) = R(i, i);
    const double noise = std::pow(10.0, -1.0 - 4.0 * U(rng));
    const Mat F = Q * diagPart * Qinv + noise * random_matrix(d, rng);
    const double maxS = eig.values.maxCoeff();
    if (!(maxS > 1.0 + 1e-9)) {
      ++r.splitHolds;
      continue;
    }
    const double nu = std::min(1.0, maxS - 1.0) * (0.2 + 0.8 * U(rng));
    const auto sp = nu_split_bound(F, S, H1, nu, &spec.C);
    r.splitHolds += sp.holds;
    r.splitMinSlack = std::min(r.splitMinSlack, sp.slack);
    if (sp.bound > 0.0) r.splitMinRelativeSlack = std::min(r.splitMinRelativeSlack, sp.slack / sp.bound);
  }
  return r;
}

}  // namespace sonn

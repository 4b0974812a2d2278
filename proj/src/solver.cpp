#include "sonn/solver.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include "sonn/krylov.hpp"

namespace sonn {

std::string to_string(Method m) { return m == Method::newton ? "newton" : "heat_flow"; }

Method method_from_string(const std::string& s) {
  if (s == "newton") return Method::newton;
  if (s == "heat_flow" || s == "heat-flow") return Method::heat_flow;
  throw std::invalid_argument("unknown solver method: " + s);
}

MatrixField sample_theta(const BundleSpec& spec, const HiggsTuple& q, const DiskGrid& grid) {
  MatrixField A(grid.nodes(), 2 * spec.n);
  for (int p = 0; p < grid.nodes(); ++p) A.set(p, theta_matrices(spec, q, grid.z(p)).weight);
  return A;
}

MatrixField hX_field(const BundleSpec& spec, const DiskGrid& grid) {
  MatrixField H(grid.nodes(), 2 * spec.n);
  for (int p = 0; p < grid.nodes(); ++p) H.set(p, hX_metric(spec, grid.gAt(p)));
  return H;
}

namespace {

// Pieces of E(H) reused by the directional derivative.
struct NodeCache {
  SMat H, Hinv, P1, Q1, XH, HX, HAHinv, HinvAsH, A, As;
};

// E = (2/g)(-H_{z zbar} + H_zbar H^-1 H_z + H A H^-1 A^* H - A^* H A)
SMat node_E(const SMat& H, const SMat& Hinv, const SMat& Hz, const SMat& Hzb, const SMat& Hzzb, const SMat& A,
            const SMat& As, double g, NodeCache* cache) {
  const SMat Q1 = Hzb * Hinv;
  const SMat X = A * Hinv * As;
  const SMat HX = H * X;
  SMat E = -Hzzb + Q1 * Hz + HX * H - As * H * A;
  E *= 2.0 / g;
  if (cache) {
    cache->H = H;
    cache->Hinv = Hinv;
    cache->P1 = Hinv * Hz;
    cache->Q1 = Q1;
    cache->XH = X * H;
    cache->HX = HX;
    cache->HAHinv = H * A * Hinv;
    cache->HinvAsH = Hinv * As * H;
    cache->A = A;
    cache->As = As;
  }
  return E;
}

SMat node_dE(const NodeCache& c, const SMat& dH, const SMat& dHz, const SMat& dHzb, const SMat& dHzzb, double g) {
  SMat dE = -dHzzb + dHzb * c.P1 + c.Q1 * dHz - c.Q1 * dH * c.P1 + dH * c.XH + c.HX * dH -
            c.HAHinv * dH * c.HinvAsH - c.As * dH * c.A;
  dE *= 2.0 / g;
  return dE;
}

// ||L^-1 E L^-*||_F with H = L L^*.
double h_normalized(const Eigen::LLT<SMat>& llt, const SMat& E) {
  const SMat T = llt.matrixL().solve(E);
  const SMat M = llt.matrixL().solve(SMat(T.adjoint()));
  return M.norm();
}

Eigen::VectorXd hX_exponents(const BundleSpec& spec) {
  const int n = spec.n;
  Eigen::VectorXd e(2 * n);
  for (int w = 0; w < 2 * n; ++w) {
    if (w <= n - 1) e(w) = w + 1 - n;
    else if (w == n) e(w) = 0;
    else e(w) = w - n;
  }
  return e;
}

}  // namespace

MatrixField hermitian_residual_form(const MatrixField& H, const MatrixField& A, const PolarCalculus& calc) {
  const auto& grid = calc.grid();
  const int d = H.dim;
  Eigen::MatrixXcd Hz, Hzb, Hzzb;
  calc.derivatives(H.data, &Hz, &Hzb, &Hzzb);
  MatrixField E(grid.nodes(), d);
  MatrixField fz{}, fzb{}, fzzb{};
  fz.dim = fzb.dim = fzzb.dim = d;
  fz.data = std::move(Hz);
  fzb.data = std::move(Hzb);
  fzzb.data = std::move(Hzzb);
  for (int p = 0; p < grid.nodes(); ++p) {
    const SMat h = H.at(p);
    const SMat hinv = h.inverse();
    const SMat a = A.at(p);
    const SMat as = a.adjoint();
    E.set(p, node_E(h, hinv, fz.at(p), fzb.at(p), fzzb.at(p), a, as, grid.gAt(p), nullptr));
  }
  return E;
}

MatrixField hermitian_residual_jvp(const MatrixField& H, const MatrixField& dH, const MatrixField& A,
                                   const PolarCalculus& calc) {
  const auto& grid = calc.grid();
  const int d = H.dim;
  MatrixField fz, fzb, fzzb, gz, gzb, gzzb;
  fz.dim = fzb.dim = fzzb.dim = gz.dim = gzb.dim = gzzb.dim = d;
  calc.derivatives(H.data, &fz.data, &fzb.data, &fzzb.data);
  calc.derivatives(dH.data, &gz.data, &gzb.data, &gzzb.data);
  MatrixField dE(grid.nodes(), d);
  NodeCache c;
  for (int p = 0; p < grid.nodes(); ++p) {
    const SMat h = H.at(p);
    const SMat hinv = h.inverse();
    const SMat a = A.at(p);
    const SMat as = a.adjoint();
    node_E(h, hinv, fz.at(p), fzb.at(p), fzzb.at(p), a, as, grid.gAt(p), &c);
    dE.set(p, node_dE(c, dH.at(p), gz.at(p), gzb.at(p), gzzb.at(p), grid.gAt(p)));
  }
  return dE;
}

MatrixField hitchin_residual(const MatrixField& H, const MatrixField& A, const PolarCalculus& calc) {
  const auto& grid = calc.grid();
  const MatrixField E = hermitian_residual_form(H, A, calc);
  MatrixField R(grid.nodes(), H.dim);
  for (int p = 0; p < grid.nodes(); ++p) {
    const SMat h = H.at(p);
    Eigen::LLT<SMat> llt(h);
    if (llt.info() != Eigen::Success) {
      std::ostringstream os;
      os << "hitchin_residual: metric not positive at node " << p << " (r=" << grid.r[grid.ring(p)]
         << ", phi=" << grid.phi[grid.slot(p)] << ")";
      throw std::runtime_error(os.str());
    }
    const SMat T = llt.matrixL().solve(E.at(p));
    const SMat M = llt.matrixL().solve(SMat(T.adjoint()));
    R.set(p, SMat(0.5 * (M + M.adjoint())));
  }
  return R;
}

double sup_interior_norm(const MatrixField& R, const DiskGrid& grid) {
  double s = 0.0;
  for (int p = 0; p < grid.nodes(); ++p)
    if (!grid.boundary(p)) s = std::max(s, R.data.row(p).norm());
  return s;
}

MatrixField perturbed_boundary(const BundleSpec& spec, const DiskGrid& grid, double amplitude, std::uint64_t seed) {
  const int d = 2 * spec.n;
  std::mt19937_64 rng(seed);
  auto generator = [&] {
    Mat M = random_hermitian(d, rng, 1.0);
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        if (spec.summand[a] != spec.summand[b]) M(a, b) = 0.0;
    return project_compatible_generator(M, spec.C);
  };
  const Mat M1 = generator();
  const Mat M2 = generator();
  MatrixField H(grid.nodes(), d);
  for (int p = 0; p < grid.nodes(); ++p) {
    const double phi = grid.phi[grid.slot(p)];
    const Mat K = hermitian_exp(amplitude * (std::cos(phi) * M1 + std::sin(phi) * M2));
    const Eigen::VectorXd D = hX_diagonal(spec, grid.gAt(p)).cwiseSqrt();
    H.set(p, D.asDiagonal() * K * D.asDiagonal());
  }
  return H;
}

Mat compatible_projection(const Mat& H, const Mat& C) {
  const Mat dual = C * H.conjugate().inverse() * C;
  Eigen::SelfAdjointEigenSolver<Mat> es(H);
  const Mat sq = es.operatorSqrt();
  const Mat isq = es.operatorInverseSqrt();
  Mat mid = isq * dual * isq;
  mid = 0.5 * (mid + mid.adjoint());
  Eigen::SelfAdjointEigenSolver<Mat> em(mid);
  Mat out = sq * em.operatorSqrt() * sq;
  return 0.5 * (out + out.adjoint());
}

namespace {

class DirichletSystem {
 public:
  DirichletSystem(const BundleSpec& spec, const HiggsTuple& q, const DiskGrid& grid, const MatrixField& boundary,
                  const SolverConfig& cfg)
      : spec_(spec), grid_(grid), cfg_(cfg), calc_(grid), d_(2 * spec.n) {
    const int N = grid.nodes();
    for (int b = 0; b < d_; ++b)
      for (int a = 0; a < d_; ++a)
        if (spec.summand[a] == spec.summand[b]) {
          activeCol_.push_back(MatrixField::col(a, b, d_));
          activeA_.push_back(a);
          activeB_.push_back(b);
        }
    nAct_ = static_cast<int>(activeCol_.size());
    A_ = sample_theta(spec, q, grid);
    D_.resize(N, d_);
    for (int p = 0; p < N; ++p) D_.row(p) = hX_diagonal(spec, grid.gAt(p)).cwiseSqrt().transpose();
    tau_ = MatrixField(N, d_);
    if (cfg.baseCorrection) build_tau();
    if (boundary.nodes() != N || boundary.dim != d_) throw std::invalid_argument("solve_dirichlet: boundary field shape mismatch");
    boundaryK_ = compact_from_H(boundary);
    cache_.resize(N);
  }

  const PolarCalculus& calc() const { return calc_; }
  int nodes() const { return grid_.nodes(); }
  int nActive() const { return nAct_; }

  // K (compact) <-> H (full weight-frame field)
  KVec compact_from_H(const MatrixField& H) const {
    KVec K(grid_.nodes(), nAct_);
    for (int c = 0; c < nAct_; ++c)
      K.col(c) = H.data.col(activeCol_[c]).array() / (D_.col(activeA_[c]).array() * D_.col(activeB_[c]).array());
    return K;
  }

  MatrixField H_from_compact(const KVec& K) const {
    MatrixField H(grid_.nodes(), d_);
    for (int c = 0; c < nAct_; ++c)
      H.data.col(activeCol_[c]) = K.col(c).array() * D_.col(activeA_[c]).array() * D_.col(activeB_[c]).array();
    return H;
  }

  void impose_boundary(KVec& K) const {
    const int base = (grid_.Nr - 1) * grid_.Nphi;
    K.bottomRows(grid_.Nphi) = boundaryK_.middleRows(base, grid_.Nphi);
  }

  struct Eval {
    bool positive = true;
    double sup = 0.0, supUncorrected = 0.0, l2 = 0.0;
  };

  Eval evaluate(const KVec& K, KVec& S, bool keepCache) {
    Eval ev;
    const int N = grid_.nodes();
    KVec Hc = scaled(K);
    KVec Hz, Hzb, Hzzb;
    calc_.derivatives(Hc, &Hz, &Hzb, &Hzzb);
    S.setZero(N, nAct_);
    double l2 = 0.0;
    for (int p = 0; p < N; ++p) {
      if (grid_.boundary(p)) continue;
      const SMat H = unpack(Hc, p);
      Eigen::LLT<SMat> llt(H);
      if (llt.info() != Eigen::Success || !(llt.matrixL().toDenseMatrix().diagonal().real().minCoeff() > 0.0)) {
        ev.positive = false;
        return ev;
      }
      const SMat Hinv = llt.solve(SMat::Identity(d_, d_));
      const SMat A = A_.at(p);
      const SMat As = A.adjoint();
      SMat E = node_E(H, Hinv, unpack(Hz, p), unpack(Hzb, p), unpack(Hzzb, p), A, As, grid_.gAt(p),
                      keepCache ? &cache_[p] : nullptr);
      ev.supUncorrected = std::max(ev.supUncorrected, h_normalized(llt, E));
      if (cfg_.baseCorrection) E -= tau_.at(p);
      E = 0.5 * (E + E.adjoint()).eval();
      ev.sup = std::max(ev.sup, h_normalized(llt, E));
      for (int c = 0; c < nAct_; ++c) {
        const cd v = E(activeA_[c], activeB_[c]) / (D_(p, activeA_[c]) * D_(p, activeB_[c]));
        S(p, c) = v;
        l2 += std::norm(v);
      }
    }
    ev.l2 = std::sqrt(l2);
    return ev;
  }

  void jvp(const KVec& dK, KVec& dS) const {
    const int N = grid_.nodes();
    KVec dH = scaled(dK);
    KVec gz, gzb, gzzb;
    calc_.derivatives(dH, &gz, &gzb, &gzzb);
    dS.setZero(N, nAct_);
    for (int p = 0; p < N; ++p) {
      if (grid_.boundary(p)) continue;
      const SMat dE = node_dE(cache_[p], unpack(dH, p), unpack(gz, p), unpack(gzb, p), unpack(gzzb, p), grid_.gAt(p));
      for (int c = 0; c < nAct_; ++c)
        dS(p, c) = dE(activeA_[c], activeB_[c]) / (D_(p, activeA_[c]) * D_(p, activeB_[c]));
    }
  }

  void hermitize(KVec& K) const {
    // entry (a,b) and (b,a) are both active; average with the conjugate partner
    KVec out = K;
    for (int c = 0; c < nAct_; ++c) {
      const int partner = partner_of(c);
      out.col(c) = 0.5 * (K.col(c) + K.col(partner).conjugate());
    }
    K = out;
  }

  double min_eig(const KVec& K) const {
    double m = 1e300;
    for (int p = 0; p < grid_.nodes(); ++p) {
      Eigen::SelfAdjointEigenSolver<SMat> es(unpack(K, p), Eigen::EigenvaluesOnly);
      m = std::min(m, es.eigenvalues().minCoeff());
    }
    return m;
  }

  void project_compatible(KVec& K) const {
    MatrixField H = H_from_compact(K);
    for (int p = 0; p < grid_.nodes(); ++p) {
      if (grid_.boundary(p)) continue;
      H.set(p, compatible_projection(Mat(H.at(p)), spec_.C.entries));
    }
    K = compact_from_H(H);
  }

 private:
  int partner_of(int c) const {
    for (int o = 0; o < nAct_; ++o)
      if (activeA_[o] == activeB_[c] && activeB_[o] == activeA_[c]) return o;
    return c;
  }

  KVec scaled(const KVec& K) const {
    KVec H(K.rows(), nAct_);
    for (int c = 0; c < nAct_; ++c)
      H.col(c) = K.col(c).array() * D_.col(activeA_[c]).array() * D_.col(activeB_[c]).array();
    return H;
  }

  SMat unpack(const KVec& X, int p) const {
    SMat M = SMat::Zero(d_, d_);
    for (int c = 0; c < nAct_; ++c) M(activeA_[c], activeB_[c]) = X(p, c);
    return M;
  }

  void build_tau() {
    const MatrixField Hx = hX_field(spec_, grid_);
    const KVec Hc = compact_unscaled(Hx);
    KVec Hz, Hzb, Hzzb;
    calc_.derivatives(Hc, &Hz, &Hzb, &Hzzb);
    const Eigen::VectorXd ex = hX_exponents(spec_);
    const SMat zero = SMat::Zero(d_, d_);
    for (int p = 0; p < grid_.nodes(); ++p) {
      const SMat H = unpack(Hc, p);
      const SMat Hinv = H.inverse();
      SMat Ed = node_E(H, Hinv, unpack(Hz, p), unpack(Hzb, p), unpack(Hzzb, p), zero, zero, grid_.gAt(p), nullptr);
      for (int w = 0; w < d_; ++w) Ed(w, w) += ex(w) * H(w, w).real();
      tau_.set(p, Ed);
    }
  }

  KVec compact_unscaled(const MatrixField& H) const {
    KVec K(grid_.nodes(), nAct_);
    for (int c = 0; c < nAct_; ++c) K.col(c) = H.data.col(activeCol_[c]);
    return K;
  }

  const BundleSpec& spec_;
  const DiskGrid& grid_;
  SolverConfig cfg_;
  PolarCalculus calc_;
  int d_;
  int nAct_ = 0;
  std::vector<int> activeCol_, activeA_, activeB_;
  MatrixField A_;
  Eigen::MatrixXd D_;
  MatrixField tau_;
  KVec boundaryK_;
  std::vector<NodeCache> cache_;
};

[[noreturn]] void fail_with_trace(const std::string& what, const std::vector<IterationRecord>& trace) {
  std::ostringstream os;
  os << what << "; trace:";
  for (const auto& t : trace) os << " [" << t.iteration << ": sup=" << t.supResidual << " step=" << t.step << "]";
  throw std::runtime_error(os.str());
}

}  // namespace

SolveResult solve_dirichlet(const BundleSpec& spec, const HiggsTuple& q, const DiskGrid& grid,
                            const MatrixField& boundary, const SolverConfig& cfg, const MatrixField* initial) {
  if (!(cfg.residualTol > 0.0)) throw std::invalid_argument("solve_dirichlet: residualTol must be positive");
  DirichletSystem sys(spec, q, grid, boundary, cfg);
  const int N = grid.nodes();
  KVec K = initial ? sys.compact_from_H(*initial) : sys.compact_from_H(hX_field(spec, grid));
  sys.impose_boundary(K);
  sys.hermitize(K);

  ResidualReport rep;
  rep.method = to_string(cfg.method);
  KVec S(N, sys.nActive()), St(N, sys.nActive());
  auto ev = sys.evaluate(K, S, cfg.method == Method::newton);
  if (!ev.positive) throw std::runtime_error("solve_dirichlet: initial metric is not positive definite");

  const LinearMap Jop = [&](const KVec& in, KVec& out) { sys.jvp(in, out); };
  const LinearMap Mop = [&](const KVec& in, KVec& out) {
    out = in;
    sys.calc().solve_shifted(0.0, out);
  };

  int it = 0;
  if (cfg.method == Method::newton) {
    for (;; ++it) {
      rep.trace.push_back({it, ev.sup, ev.l2, 0.0, 0});
      if (ev.sup <= cfg.residualTol) {
        rep.converged = true;
        break;
      }
      if (it >= cfg.maxIterations) fail_with_trace("solve_dirichlet: Newton did not converge", rep.trace);
      const KVec b = -S;
      KVec x = KVec::Zero(N, sys.nActive());
      const double eta = std::clamp(0.1 * std::sqrt(ev.sup), 1e-10, 0.1);
      const auto gm = gmres(Jop, Mop, b, x, eta, cfg.gmresRestart, cfg.gmresMaxIterations);
      rep.trace.back().krylovIterations = gm.iterations;
      sys.hermitize(x);
      double lam = 1.0;
      bool accepted = false;
      for (int h = 0; h <= cfg.maxHalvings; ++h, lam *= 0.5) {
        KVec Kt = K + lam * x;
        const auto et = sys.evaluate(Kt, St, false);
        if (et.positive && et.l2 <= (1.0 - 1e-4 * lam) * ev.l2) {
          K = std::move(Kt);
          accepted = true;
          break;
        }
      }
      if (!accepted) fail_with_trace("solve_dirichlet: line search failed after step halving", rep.trace);
      rep.trace.back().step = lam;
      if (cfg.compatProjectEvery > 0 && (it + 1) % cfg.compatProjectEvery == 0) sys.project_compatible(K);
      ev = sys.evaluate(K, S, true);
    }
  } else {
    double dt = cfg.flowStep;
    int consecutiveHalvings = 0;
    for (;; ++it) {
      if (it == 0 || ev.sup <= cfg.residualTol || it % 10 == 0) rep.trace.push_back({it, ev.sup, ev.l2, dt, 0});
      if (ev.sup <= cfg.residualTol) {
        rep.converged = true;
        break;
      }
      if (it >= cfg.maxFlowSteps) fail_with_trace("solve_dirichlet: heat flow did not converge", rep.trace);
      KVec delta = -S;
      sys.calc().solve_shifted(0.5 / dt, delta);
      sys.hermitize(delta);
      KVec Kt = K + delta;
      const auto et = sys.evaluate(Kt, St, false);
      if (et.positive && et.l2 < ev.l2) {
        K = std::move(Kt);
        S.swap(St);
        ev = et;
        dt = std::min(dt * 1.25, cfg.flowStepMax);
        consecutiveHalvings = 0;
        if (cfg.compatProjectEvery > 0 && (it + 1) % cfg.compatProjectEvery == 0) {
          sys.project_compatible(K);
          ev = sys.evaluate(K, S, false);
        }
      } else {
        dt *= 0.5;
        if (++consecutiveHalvings > cfg.maxHalvings)
          fail_with_trace("solve_dirichlet: heat-flow step collapsed (positivity or residual growth)", rep.trace);
      }
    }
  }
  rep.iterations = it;
  rep.supResidual = ev.sup;
  rep.supResidualUncorrected = ev.supUncorrected;
  rep.positivityMinEig = sys.min_eig(K);

  SolveResult out;
  out.H = sys.H_from_compact(K);
  double drift = 0.0, block = 0.0;
  for (int p = 0; p < N; ++p) {
    const Mat h = out.H.at(p);
    drift = std::max(drift, compatibility_residual(h, spec.C));
    const Eigen::VectorXd hx = hX_diagonal(spec, grid.gAt(p));
    for (int a = 0; a < 2 * spec.n; ++a)
      for (int b = 0; b < 2 * spec.n; ++b)
        if (spec.summand[a] != spec.summand[b]) block = std::max(block, std::abs(h(a, b)) / std::sqrt(hx(a) * hx(b)));
  }
  rep.compatibilityDrift = drift;
  rep.blockDrift = block;
  out.report = std::move(rep);
  return out;
}

namespace {

Mat interpolate_matrix(const MatrixField& H, const PolarCalculus& calc, double r, double phi) {
  const int d = H.dim;
  Mat M(d, d);
  for (int b = 0; b < d; ++b)
    for (int a = 0; a < d; ++a) {
      const Vec col = H.data.col(MatrixField::col(a, b, d));
      M(a, b) = col.isZero(0.0) ? cd(0.0) : calc.interpolate(col, r, phi);
    }
  return 0.5 * (M + M.adjoint());
}

}  // namespace

double probe_distance(const MatrixField& H1, const PolarCalculus& c1, const MatrixField& H2, const PolarCalculus& c2,
                      double probeRadius) {
  double worst = 0.0;
  const int nr = 4, nphi = 8;
  for (int a = 0; a <= nr; ++a) {
    const double r = probeRadius * a / nr;
    const int count = (a == 0) ? 1 : nphi;
    for (int b = 0; b < count; ++b) {
      const double phi = 2.0 * std::numbers::pi * b / nphi;
      const Mat m1 = interpolate_matrix(H1, c1, r, phi);
      const Mat m2 = interpolate_matrix(H2, c2, r, phi);
      Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(m1, m2, Eigen::EigenvaluesOnly);
      for (int k = 0; k < es.eigenvalues().size(); ++k)
        worst = std::max(worst, std::abs(std::log(es.eigenvalues()(k))));
    }
  }
  return worst;
}

ExhaustionReport exhaustion_sequence(const BundleSpec& spec, const HiggsTuple& q, const std::vector<double>& radii,
                                     double probeRadius, int Nr, int Nphi, const SolverConfig& config) {
  if (radii.size() < 2) throw std::invalid_argument("exhaustion_sequence: need at least two radii");
  for (size_t i = 1; i < radii.size(); ++i)
    if (!(radii[i] > radii[i - 1])) throw std::invalid_argument("exhaustion_sequence: radii must be strictly increasing");
  if (!(probeRadius > 0.0 && probeRadius < radii.front()))
    throw std::invalid_argument("exhaustion_sequence: probe radius must be below the smallest radius");
  ExhaustionReport rep;
  rep.radii = radii;
  rep.probeRadius = probeRadius;
  std::deque<DiskGrid> grids;
  std::deque<PolarCalculus> calcs;
  std::vector<MatrixField> sols;
  for (double R : radii) {
    grids.push_back(build_grid(R, Nr, Nphi));
    calcs.emplace_back(grids.back());
    const MatrixField bd = hX_field(spec, grids.back());
    auto res = solve_dirichlet(spec, q, grids.back(), bd, config);
    rep.steps.push_back({R, res.report});
    sols.push_back(std::move(res.H));
  }
  for (size_t i = 0; i + 1 < sols.size(); ++i)
    rep.differences.push_back(probe_distance(sols[i], calcs[i], sols[i + 1], calcs[i + 1], probeRadius));
  for (size_t i = 0; i + 1 < rep.differences.size(); ++i)
    rep.rates.push_back(rep.differences[i] / rep.differences[i + 1]);
  const auto& d = rep.differences;
  const size_t m = d.size();
  if (m >= 3) rep.monotoneTail = d[m - 3] > d[m - 2] && d[m - 2] > d[m - 1];
  else rep.monotoneTail = m == 2 && d[0] > d[1];
  return rep;
}

SimpsonReport metric_pair_diagnostics(const MatrixField& h1, const MatrixField& h2, const PolarCalculus& calc,
                                      double delta) {
  const auto& grid = calc.grid();
  if (h1.nodes() != grid.nodes() || h2.nodes() != grid.nodes() || h1.dim != h2.dim)
    throw std::invalid_argument("metric_pair_diagnostics: grid mismatch");
  SimpsonReport r;
  r.delta = delta;
  const int N = grid.nodes();
  r.s = MatrixField(N, h1.dim);
  r.traceS.resize(N);
  for (int p = 0; p < N; ++p) {
    const SMat a = h1.at(p);
    const SMat s = a.llt().solve(h2.at(p));
    r.s.set(p, s);
    r.traceS(p) = s.trace().real();
  }
  Vec logTr = r.traceS.array().log();
  // sqrt(-1) Lambda dbar d u = -(2/g) u_{z zbar}
  r.laplaceTerm = -0.5 * calc.laplacian_gX(r.traceS);
  r.logLaplaceTerm = -0.5 * calc.laplacian_gX(logTr);
  r.maxTraceBoundary = -1e300;
  r.maxTraceInterior = -1e300;
  r.supLaplace = -1e300;
  r.supLogLaplace = -1e300;
  for (int p = 0; p < N; ++p) {
    const double t = r.traceS(p).real();
    if (grid.boundary(p)) {
      r.maxTraceBoundary = std::max(r.maxTraceBoundary, t);
    } else {
      r.maxTraceInterior = std::max(r.maxTraceInterior, t);
      r.supLaplace = std::max(r.supLaplace, r.laplaceTerm(p).real());
      r.supLogLaplace = std::max(r.supLogLaplace, r.logLaplaceTerm(p).real());
    }
  }
  r.maxTrace = std::max(r.maxTraceBoundary, r.maxTraceInterior);
  r.subharmonic = r.supLaplace <= delta;
  r.logSubharmonic = r.supLogLaplace <= delta;
  r.maxOnBoundary = r.maxTraceInterior <= r.maxTraceBoundary + 1e-12;
  return r;
}

}  // namespace sonn

// Experiment runner: algebra suites, bundle dumps, Dirichlet solves, exhaustion studies, diagnostics.
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sonn/diagnostics.hpp"
#include "sonn/io.hpp"
#include "sonn/solver.hpp"

namespace fs = std::filesystem;
using namespace sonn;

namespace {

struct Experiment {
  std::string command;
  int n = 2;
  std::vector<std::string> qFlags = std::vector<std::string>(kMaxRank);
  std::optional<Json> qJson;
  double radius = 0.7;
  std::string grid = "48x96";
  std::string method = "newton";
  double tol = 1e-8;
  bool baseCorrection = true;
  int compatProjectEvery = 0;
  std::uint64_t seed = 7;
  int samples = 1000;
  std::string radii = "0.5,0.7,0.85,0.92";
  double probe = 0.3;
  std::string out = "run";
  std::string run;
  std::string config;
  bool plots = false;
  Json solverOverrides = Json::object();
};

struct Violation {
  std::string key, message;
};

// Config file values override flags.
void apply_config_file(Experiment& e, std::vector<Violation>& bad) {
  if (e.config.empty()) return;
  Json j;
  try {
    j = read_json(e.config);
  } catch (const std::exception& ex) {
    bad.push_back({"config", ex.what()});
    return;
  }
  try {
    if (j.contains("n")) e.n = j["n"].get<int>();
    if (j.contains("q")) e.qJson = j["q"];
    if (j.contains("radius")) e.radius = j["radius"].get<double>();
    if (j.contains("grid")) e.grid = j["grid"].get<std::string>();
    if (j.contains("seed")) e.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("samples")) e.samples = j["samples"].get<int>();
    if (j.contains("probe")) e.probe = j["probe"].get<double>();
    if (j.contains("out")) e.out = j["out"].get<std::string>();
    if (j.contains("plots")) e.plots = j["plots"].get<bool>();
    if (j.contains("radii")) {
      std::string s;
      for (const auto& r : j["radii"]) s += (s.empty() ? "" : ",") + std::to_string(r.get<double>());
      e.radii = s;
    }
    if (j.contains("solver")) e.solverOverrides = j["solver"];
  } catch (const std::exception& ex) {
    bad.push_back({"config", std::string("malformed value: ") + ex.what()});
  }
}

struct Validated {
  BundleSpec spec;
  HiggsTuple q;
  int Nr = 0, Nphi = 0;
  SolverConfig solver;
  std::vector<double> radii;
};

Validated validate(const Experiment& e, std::vector<Violation>& bad) {
  Validated v;
  if (e.n < 1 || e.n > kMaxRank) bad.push_back({"n", "must lie in 1.." + std::to_string(kMaxRank)});
  const int n = std::clamp(e.n, 1, kMaxRank);
  v.q = HiggsTuple::zero(n);
  if (e.qJson) {
    try {
      v.q = higgs_from_json(*e.qJson, n);
    } catch (const std::exception& ex) {
      bad.push_back({"q", ex.what()});
    }
  } else {
    for (int k = 1; k <= kMaxRank; ++k) {
      if (e.qFlags[k - 1].empty()) continue;
      const std::string key = "q" + std::to_string(k);
      if (k > n) {
        bad.push_back({key, "differential index exceeds n"});
        continue;
      }
      try {
        v.q.coefficients[k - 1] = parse_coefficients(e.qFlags[k - 1]);
      } catch (const std::exception& ex) {
        bad.push_back({key, ex.what()});
      }
    }
  }
  if (!(e.radius > 0.0 && e.radius < 1.0)) bad.push_back({"radius", "must lie in (0, 1)"});
  try {
    std::tie(v.Nr, v.Nphi) = parse_grid(e.grid);
    if (v.Nr < 8 || v.Nphi < 8 || v.Nphi % 2 != 0) bad.push_back({"grid", "need Nr >= 8 and even Nphi >= 8"});
  } catch (const std::exception& ex) {
    bad.push_back({"grid", ex.what()});
  }
  try {
    v.solver.method = method_from_string(e.method);
  } catch (const std::exception& ex) {
    bad.push_back({"method", ex.what()});
  }
  v.solver.residualTol = e.tol;
  v.solver.baseCorrection = e.baseCorrection;
  v.solver.compatProjectEvery = e.compatProjectEvery;
  try {
    apply_json(e.solverOverrides, v.solver);
  } catch (const std::exception& ex) {
    bad.push_back({"solver", ex.what()});
  }
  if (!(v.solver.residualTol > 0.0)) bad.push_back({"tol", "must be positive"});
  if (v.solver.maxIterations < 1) bad.push_back({"solver.maxIterations", "must be positive"});
  if (v.solver.compatProjectEvery < 0) bad.push_back({"compat-project-every", "must be nonnegative"});
  if (e.samples < 1) bad.push_back({"samples", "must be positive"});
  if (e.command == "exhaust") {
    try {
      for (const auto& c : parse_coefficients(e.radii)) v.radii.push_back(c.real());
      for (size_t i = 1; i < v.radii.size(); ++i)
        if (!(v.radii[i] > v.radii[i - 1])) bad.push_back({"radii", "radii must be strictly increasing"});
      if (v.radii.size() < 2) bad.push_back({"radii", "need at least two radii"});
      for (double r : v.radii)
        if (!(r > 0.0 && r < 1.0)) bad.push_back({"radii", "each radius must lie in (0, 1)"});
      if (!v.radii.empty() && !(e.probe > 0.0 && e.probe < v.radii.front()))
        bad.push_back({"probe", "must lie below the smallest radius"});
    } catch (const std::exception& ex) {
      bad.push_back({"radii", ex.what()});
    }
  }
  if (e.command == "diagnose" && e.run.empty()) bad.push_back({"run", "run directory required"});
  if (bad.empty()) v.spec = build_bundle(n);
  return v;
}

int report_invalid(const std::vector<Violation>& bad) {
  Json j;
  j["error"] = "invalid config";
  j["violations"] = Json::array();
  for (const auto& b : bad) j["violations"].push_back({{"key", b.key}, {"message", b.message}});
  std::cerr << j.dump(2) << '\n';
  return 2;
}

// Named pass/fail checks collected for report.json.
struct Assertions {
  Json list = Json::array();
  bool all = true;
  void add(const std::string& name, bool pass, double value, double threshold) {
    list.push_back({{"name", name}, {"pass", pass}, {"value", value}, {"threshold", threshold}});
    all = all && pass;
  }
};

Json config_echo(const Experiment& e, const Validated& v) {
  Json j;
  j["command"] = e.command;
  j["n"] = v.spec.n;
  j["q"] = to_json(v.q);
  j["radius"] = e.radius;
  j["grid"] = e.grid;
  j["seed"] = e.seed;
  j["samples"] = e.samples;
  j["solver"] = to_json(v.solver);
  if (e.command == "exhaust") {
    j["radii"] = v.radii;
    j["probe"] = e.probe;
  }
  j["plots"] = e.plots;
  return j;
}

int run_verify_algebra(const Experiment& e, const Validated& v, Json& report, Assertions& as) {
  const int n = v.spec.n;
  const auto alg = algebra_suite(n, e.samples, e.seed);
  const auto skew = skew_suite(100, e.seed);
  const auto pert = perturbation_suite(100, e.seed, std::clamp(n, 2, 4));
  report["algebra"] = to_json(alg);
  report["skew"] = to_json(skew);
  report["perturbation"] = to_json(pert);
  as.add("compatibility of sampled metrics", alg.compatibility <= 1e-10, alg.compatibility, 1e-10);
  as.add("unit determinant of compatible metrics", alg.determinant <= 1e-10, alg.determinant, 1e-10);
  as.add("Gram-Schmidt transition identities", alg.triangular <= 1e-10, alg.triangular, 1e-10);
  as.add("filtration minors det F_k = det F_2n-k", alg.minorSymmetry <= 1e-10, alg.minorSymmetry, 1e-10);
  as.add("real structure is an involution", alg.kappaInvolution <= 1e-10, alg.kappaInvolution, 1e-10);
  as.add("real structure swaps reciprocal eigenspaces", alg.kappaEigenspace <= 1e-8, alg.kappaEigenspace, 1e-8);
  if (n >= 2)
    as.add(n % 2 == 0 ? "gamma vanishes for n even" : "gamma' vanishes for n odd", alg.gamma <= 1e-10, alg.gamma, 1e-10);
  if (n % 2 == 1) as.add("middle slot metrics equal one for n odd", alg.middleSlots <= 1e-10, alg.middleSlots, 1e-10);
  as.add("skew-symmetry of the Higgs field", skew.worst <= 1e-14, skew.worst, 1e-14);
  as.add("quasi-cyclic stability at half eps0", pert.stabilityHolds == pert.samples, pert.stabilityMinSlack, 0.0);
  as.add("nu-split commutator bound", pert.splitHolds == pert.samples, pert.splitMinSlack, 0.0);
  return 0;
}

int run_build_bundle(const Experiment&, const Validated& v, Json& report, Assertions& as) {
  report["bundle"] = to_json(v.spec);
  const auto th = theta_matrices(v.spec, v.q, 0.0);
  report["thetaBlockAtOrigin"] = to_json(th.block);
  report["thetaWeightAtOrigin"] = to_json(th.weight);
  report["hXAtOrigin"] = to_json(hX_metric(v.spec, conformal_factor(0.0)));
  const double skew = skew_residual(v.spec, th.block);
  as.add("skew-symmetry of the Higgs field", skew <= 1e-14, skew, 1e-14);
  const double hn = higgs_norm_sq(theta_matrices(v.spec, HiggsTuple::zero(v.spec.n), 0.0).weight,
                                  hX_metric(v.spec, conformal_factor(0.0)), conformal_factor(0.0));
  report["baseHiggsNormAtOrigin"] = hn;
  as.add("base Higgs norm n(n-1)(2n-1)/3", std::abs(hn - base_higgs_norm_sq(v.spec.n)) <= 1e-12,
         std::abs(hn - base_higgs_norm_sq(v.spec.n)), 1e-12);
  return 0;
}

// Diagnostics shared by solve and diagnose.
void diagnose_metric(const Validated& v, const DiskGrid& grid, const PolarCalculus& calc, const MatrixField& H,
                     const fs::path& out, bool plots, Json& report, Assertions& as) {
  const auto A = sample_theta(v.spec, v.q, grid);
  const double tol = v.solver.residualTol;
  const bool nonzeroQ = !v.q.is_zero();
  const auto R = hitchin_residual(H, A, calc);
  report["plainResidual"] = sup_interior_norm(R, grid);
  double drift = 0.0;
  for (int p = 0; p < grid.nodes(); ++p) drift = std::max(drift, compatibility_residual(Mat(H.at(p)), v.spec.C));
  report["compatibilityDrift"] = drift;
  as.add("compatibility emerges without projection", drift <= 100.0 * tol, drift, 100.0 * tol);

  const auto dom = domination_report(H, v.spec, grid, tol, 1e-6);
  report["domination"] = to_json(dom);
  as.add("weak domination of h_X", dom.pass, *std::min_element(dom.minMargin.begin(), dom.minMargin.end()), -tol);
  if (nonzeroQ) as.add("rigidity signature: strict domination somewhere", dom.strictSomewhere, dom.maxPositiveMargin, 1e-6);

  const auto st = structural_identities(H, A, v.spec, grid, 100.0 * tol);
  report["structure"] = to_json(st);
  as.add("filtration identities of compatible metrics", st.pass, st.worst.max(), 100.0 * tol);

  const auto en = energy_report(H, A, v.spec, grid, 1e-6);
  report["energy"] = to_json(en);
  as.add("energy density lower bound", en.boundHolds, en.minMargin, -1e-6);
  as.add("energy density exponential strengthening", en.chainHolds, en.chainMinMargin, -1e-6);

  const auto vk = vk_cooperative_check(H, v.spec, calc, tol);
  report["cooperative"] = to_json(vk);
  as.add("v_k nonpositive in the interior", vk.nonpositive, vk.supInteriorV, tol);
  as.add("v_k differential inequalities", vk.inequalitiesHold, vk.minLhs, -vk.delta);
  as.add("v_k interior maximum bounded by boundary", vk.maximumPrinciple, vk.supInteriorV, vk.supBoundaryV + vk.delta);
  as.add("cooperative coupling coefficients", vk.cooperative, vk.cooperative ? 1.0 : 0.0, 1.0);

  std::vector<NamedColumn> cols;
  Eigen::VectorXd rn(grid.nodes());
  for (int p = 0; p < grid.nodes(); ++p) rn(p) = R.data.row(p).norm();
  cols.push_back({"residual", rn});
  cols.push_back({"higgs_norm", en.higgsNorm.real()});
  cols.push_back({"energy", en.energy.real()});
  cols.push_back({"w_n", en.wn.real()});
  for (int k = 0; k < 2 * v.spec.n; ++k) cols.push_back({"margin_" + std::to_string(k + 1), dom.margins.col(k)});
  for (int k = 0; k < v.spec.n; ++k) cols.push_back({"v_" + std::to_string(k + 1), vk.v.col(k)});
  fs::create_directories(out / "fields");
  write_field_csv(out / "fields" / "diagnostics.csv", grid, cols);
  if (plots) {
    fs::create_directories(out / "plots");
    write_polar_svg(out / "plots" / "v_1.svg", grid, vk.v.col(0), "v_1");
    write_polar_svg(out / "plots" / "energy.svg", grid, en.energy.real(), "energy density");
    write_polar_svg(out / "plots" / "margin_1.svg", grid, dom.margins.col(0), "domination margin k=1");
  }
}

int run_solve(const Experiment& e, const Validated& v, const fs::path& out, Json& report, Assertions& as) {
  const auto grid = build_grid(e.radius, v.Nr, v.Nphi);
  PolarCalculus calc(grid);
  SolveResult res;
  try {
    res = solve_dirichlet(v.spec, v.q, grid, hX_field(v.spec, grid), v.solver);
  } catch (const std::exception& ex) {
    report["error"] = ex.what();
    as.add("solver convergence", false, 0.0, v.solver.residualTol);
    std::cerr << ex.what() << '\n';
    return 1;
  }
  report["solve"] = to_json(res.report);
  report["spacing"] = grid.spacing();
  as.add("interior residual below tolerance", res.report.supResidual <= v.solver.residualTol, res.report.supResidual,
         v.solver.residualTol);
  as.add("block-diagonal V+W metric", res.report.blockDrift <= 100.0 * v.solver.residualTol, res.report.blockDrift,
         100.0 * v.solver.residualTol);
  as.add("positive definite metric", res.report.positivityMinEig > 0.0, res.report.positivityMinEig, 0.0);
  fs::create_directories(out / "fields");
  write_metric_csv(out / "fields" / "metric.csv", grid, res.H);
  diagnose_metric(v, grid, calc, res.H, out, e.plots, report, as);
  return 0;
}

int run_exhaust(const Experiment& e, const Validated& v, Json& report, Assertions& as) {
  ExhaustionReport rep;
  try {
    rep = exhaustion_sequence(v.spec, v.q, v.radii, e.probe, v.Nr, v.Nphi, v.solver);
  } catch (const std::exception& ex) {
    report["error"] = ex.what();
    as.add("solver convergence", false, 0.0, v.solver.residualTol);
    std::cerr << ex.what() << '\n';
    return 1;
  }
  report["exhaustion"] = to_json(rep);
  const double last = rep.differences.empty() ? 0.0 : rep.differences.back();
  as.add("exhaustion differences decrease over the final two steps", rep.monotoneTail, last, 0.0);
  return 0;
}

int run_diagnose(const Experiment& e, const fs::path& out, Json& report, Assertions& as) {
  const fs::path run = e.run;
  if (!fs::is_directory(run / "fields")) throw std::runtime_error("missing fields/ in " + run.string());
  if (!fs::exists(run / "config.json")) throw std::runtime_error("missing config.json in " + run.string());
  const Json cfg = read_json(run / "config.json");
  Experiment re = e;
  re.command = "solve";
  re.n = cfg.at("n").get<int>();
  re.qJson = cfg.at("q");
  re.radius = cfg.at("radius").get<double>();
  re.grid = cfg.at("grid").get<std::string>();
  re.solverOverrides = cfg.at("solver");
  std::vector<Violation> bad;
  const Validated v = validate(re, bad);
  if (!bad.empty()) throw std::runtime_error("run config is invalid");
  const auto grid = build_grid(re.radius, v.Nr, v.Nphi);
  PolarCalculus calc(grid);
  const MatrixField H = read_metric_csv(run / "fields" / "metric.csv", grid, 2 * v.spec.n);
  report["source"] = run.string();
  diagnose_metric(v, grid, calc, H, out, e.plots, report, as);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SO0(n,n) harmonic metric experiments"};
  app.require_subcommand(1);
  Experiment e;
  auto common = [&](CLI::App* s) {
    s->add_option("--n", e.n, "rank parameter n");
    for (int k = 1; k <= kMaxRank; ++k)
      s->add_option("--q" + std::to_string(k), e.qFlags[k - 1], "coefficients of q_" + std::to_string(k) + " (re or re:im, comma separated)");
    s->add_option("--radius", e.radius, "disk radius R");
    s->add_option("--grid", e.grid, "grid NrxNphi");
    s->add_option("--method", e.method, "newton or heat_flow");
    s->add_option("--tol", e.tol, "residual tolerance");
    s->add_option("--base-correction", e.baseCorrection, "subtract the discrete curvature defect of h_X");
    s->add_option("--compat-project-every", e.compatProjectEvery, "project onto compatible metrics every k steps");
    s->add_option("--seed", e.seed, "random seed");
    s->add_option("--config", e.config, "JSON config file; overrides flags");
    s->add_option("--out", e.out, "output directory");
    s->add_flag("--plots", e.plots, "write SVG heatmaps");
  };
  auto* verify = app.add_subcommand("verify-algebra", "seeded algebra identity suites");
  common(verify);
  verify->add_option("--samples", e.samples, "random compatible metrics");
  auto* bundle = app.add_subcommand("build-bundle", "dump the SO0(n,n) Higgs bundle data");
  common(bundle);
  auto* solve = app.add_subcommand("solve", "Dirichlet harmonic metric solve with diagnostics");
  common(solve);
  auto* exhaust = app.add_subcommand("exhaust", "exhaustion family on increasing disks");
  common(exhaust);
  exhaust->add_option("--radii", e.radii, "strictly increasing radii, comma separated");
  exhaust->add_option("--probe", e.probe, "probe disk radius");
  auto* diag = app.add_subcommand("diagnose", "recompute diagnostics from a solve run directory");
  common(diag);
  diag->add_option("--run", e.run, "run directory containing config.json and fields/");
  CLI11_PARSE(app, argc, argv);
  e.command = app.get_subcommands().front()->get_name();
  if (e.command == "diagnose" && diag->count("--out") == 0 && !e.run.empty()) e.out = (fs::path(e.run) / "diagnose").string();

  std::vector<Violation> bad;
  apply_config_file(e, bad);
  Validated v;
  if (e.command != "diagnose") v = validate(e, bad);
  if (e.command == "diagnose" && e.run.empty()) bad.push_back({"run", "run directory required"});
  if (!bad.empty()) return report_invalid(bad);

  const fs::path out = e.out;
  Json report;
  report["command"] = e.command;
  Assertions as;
  int status = 0;
  try {
    if (e.command == "diagnose") {
      status = run_diagnose(e, out, report, as);
    } else {
      fs::create_directories(out);
      write_json(out / "config.json", config_echo(e, v));
      if (e.command == "verify-algebra") status = run_verify_algebra(e, v, report, as);
      else if (e.command == "build-bundle") status = run_build_bundle(e, v, report, as);
      else if (e.command == "solve") status = run_solve(e, v, out, report, as);
      else status = run_exhaust(e, v, report, as);
    }
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return 1;
  }
  report["assertions"] = as.list;
  report["allPass"] = as.all;
  fs::create_directories(out);
  write_json(out / "report.json", report);
  for (const auto& a : as.list)
    std::cout << (a["pass"].get<bool>() ? "PASS " : "FAIL ") << a["name"].get<std::string>() << '\n';
  if (status != 0) return status;
  return as.all ? 0 : 3;
}

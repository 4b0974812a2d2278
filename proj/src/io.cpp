#include "sonn/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace sonn {

namespace {

std::string full(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

Json to_json(cd z) { return Json::array({z.real(), z.imag()}); }

cd complex_from_json(const Json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2) return {j[0].get<double>(), j[1].get<double>()};
  throw std::invalid_argument("complex number must be a number or [re, im]");
}

Json to_json(const Mat& M) {
  Json rows = Json::array();
  for (int i = 0; i < M.rows(); ++i) {
    Json row = Json::array();
    for (int j = 0; j < M.cols(); ++j) row.push_back(to_json(M(i, j)));
    rows.push_back(row);
  }
  return rows;
}

Json to_json(const HiggsTuple& q) {
  Json j = Json::object();
  for (int k = 1; k <= q.n; ++k) {
    Json c = Json::array();
    for (const auto& a : q.coefficients[k - 1]) c.push_back(to_json(a));
    j["q" + std::to_string(k)] = c;
  }
  return j;
}

HiggsTuple higgs_from_json(const Json& j, int n) {
  HiggsTuple q = HiggsTuple::zero(n);
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    int k = 0;
    if (key.size() >= 2 && key[0] == 'q') k = std::atoi(key.c_str() + 1);
    if (k < 1 || k > n) throw std::invalid_argument("unknown differential " + key);
    for (const auto& c : *it) q.coefficients[k - 1].push_back(complex_from_json(c));
  }
  return q;
}

Json to_json(const BundleSpec& s) {
  Json j;
  j["n"] = s.n;
  j["QV"] = to_json(s.QV.entries);
  j["QW"] = to_json(s.QW.entries);
  j["C"] = to_json(s.C.entries);
  j["sigma"] = s.sigma;
  j["power"] = s.power;
  j["summand"] = s.summand;
  j["oSlot"] = s.oSlot;
  j["oPrimeSlot"] = s.oPrimeSlot;
  j["degenerate"] = s.degenerate;
  j["note"] = s.note;
  return j;
}

Json to_json(const SolverConfig& c) {
  Json j;
  j["method"] = to_string(c.method);
  j["residualTol"] = c.residualTol;
  j["maxIterations"] = c.maxIterations;
  j["maxFlowSteps"] = c.maxFlowSteps;
  j["gmresRestart"] = c.gmresRestart;
  j["gmresMaxIterations"] = c.gmresMaxIterations;
  j["flowStep"] = c.flowStep;
  j["flowStepMax"] = c.flowStepMax;
  j["maxHalvings"] = c.maxHalvings;
  j["baseCorrection"] = c.baseCorrection;
  j["compatProjectEvery"] = c.compatProjectEvery;
  return j;
}

void apply_json(const Json& j, SolverConfig& c) {
  if (j.contains("method")) c.method = method_from_string(j["method"].get<std::string>());
  if (j.contains("residualTol")) c.residualTol = j["residualTol"].get<double>();
  if (j.contains("maxIterations")) c.maxIterations = j["maxIterations"].get<int>();
  if (j.contains("maxFlowSteps")) c.maxFlowSteps = j["maxFlowSteps"].get<int>();
  if (j.contains("gmresRestart")) c.gmresRestart = j["gmresRestart"].get<int>();
  if (j.contains("gmresMaxIterations")) c.gmresMaxIterations = j["gmresMaxIterations"].get<int>();
  if (j.contains("flowStep")) c.flowStep = j["flowStep"].get<double>();
  if (j.contains("flowStepMax")) c.flowStepMax = j["flowStepMax"].get<double>();
  if (j.contains("maxHalvings")) c.maxHalvings = j["maxHalvings"].get<int>();
  if (j.contains("baseCorrection")) c.baseCorrection = j["baseCorrection"].get<bool>();
  if (j.contains("compatProjectEvery")) c.compatProjectEvery = j["compatProjectEvery"].get<int>();
}

Json to_json(const ResidualReport& r, bool withTrace) {
  Json j;
  j["method"] = r.method;
  j["converged"] = r.converged;
  j["iterations"] = r.iterations;
  j["supResidual"] = r.supResidual;
  j["supResidualUncorrected"] = r.supResidualUncorrected;
  j["compatibilityDrift"] = r.compatibilityDrift;
  j["blockDrift"] = r.blockDrift;
  j["positivityMinEig"] = r.positivityMinEig;
  if (withTrace) {
    Json t = Json::array();
    for (const auto& it : r.trace)
      t.push_back({{"iteration", it.iteration},
                   {"supResidual", it.supResidual},
                   {"l2Residual", it.l2Residual},
                   {"step", it.step},
                   {"krylovIterations", it.krylovIterations}});
    j["trace"] = t;
  }
  return j;
}

Json to_json(const DominationReport& r) {
  return {{"tolerance", r.tolerance},       {"minMargin", r.minMargin},
          {"maxMargin", r.maxMargin},       {"maxPositiveMargin", r.maxPositiveMargin},
          {"strictThreshold", r.strictThreshold}, {"pass", r.pass},
          {"strictSomewhere", r.strictSomewhere}};
}

Json to_json(const StructuralReport& r) {
  return {{"minorSymmetry", r.worst.minorSymmetry},
          {"slotProduct", r.worst.slotProduct},
          {"middleMinor", r.worst.middleMinor},
          {"middleSlots", r.worst.middleSlots},
          {r.gammaName, r.worst.gamma},
          {"tolerance", r.tolerance},
          {"pass", r.pass}};
}

Json to_json(const EnergyReport& r) {
  return {{"bound", r.bound},           {"minMargin", r.minMargin},       {"maxMargin", r.maxMargin},
          {"chainMinMargin", r.chainMinMargin}, {"tolerance", r.tolerance}, {"boundHolds", r.boundHolds},
          {"chainHolds", r.chainHolds}, {"strictSomewhere", r.strictSomewhere}};
}

Json to_json(const VkReport& r) {
  return {{"delta", r.delta},
          {"scale", r.scale},
          {"spacing", r.spacing},
          {"minLhs", r.minLhs},
          {"supInteriorV", r.supInteriorV},
          {"supBoundaryV", r.supBoundaryV},
          {"flaggedNodes", r.flaggedNodes},
          {"inequalitiesHold", r.inequalitiesHold},
          {"maximumPrinciple", r.maximumPrinciple},
          {"nonpositive", r.nonpositive},
          {"cooperative", r.cooperative},
          {"fullyCoupled", r.fullyCoupled},
          {"unitSuperSolution", r.unitSuperSolution}};
}

Json to_json(const ExhaustionReport& r) {
  Json steps = Json::array();
  for (const auto& s : r.steps) steps.push_back({{"radius", s.radius}, {"solve", to_json(s.report, false)}});
  return {{"radii", r.radii},       {"probeRadius", r.probeRadius}, {"steps", steps},
          {"differences", r.differences}, {"rates", r.rates},     {"monotoneTail", r.monotoneTail}};
}

Json to_json(const SimpsonReport& r) {
  return {{"maxTrace", r.maxTrace},           {"maxTraceBoundary", r.maxTraceBoundary},
          {"maxTraceInterior", r.maxTraceInterior}, {"supLaplace", r.supLaplace},
          {"supLogLaplace", r.supLogLaplace}, {"delta", r.delta},
          {"subharmonic", r.subharmonic},     {"logSubharmonic", r.logSubharmonic},
          {"maxOnBoundary", r.maxOnBoundary}};
}

Json to_json(const AlgebraSuiteReport& r) {
  return {{"n", r.n},
          {"samples", r.samples},
          {"seed", r.seed},
          {"compatibility", r.compatibility},
          {"determinant", r.determinant},
          {"triangular", r.triangular},
          {"minorSymmetry", r.minorSymmetry},
          {"kappaInvolution", r.kappaInvolution},
          {"kappaEigenspace", r.kappaEigenspace},
          {"gamma", r.gamma},
          {"middleSlots", r.middleSlots}};
}

Json to_json(const SkewSuiteReport& r) { return {{"samples", r.samples}, {"worst", r.worst}}; }

Json to_json(const PerturbationSuiteReport& r) {
  return {{"samples", r.samples},
          {"stabilityHolds", r.stabilityHolds},
          {"stabilityPreconditions", r.stabilityPreconditions},
          {"stabilityMinSlack", r.stabilityMinSlack},
          {"splitHolds", r.splitHolds},
          {"splitMinSlack", r.splitMinSlack},
          {"splitMinRelativeSlack", r.splitMinRelativeSlack}};
}

std::vector<cd> parse_coefficients(const std::string& s) {
  std::vector<cd> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok.erase(std::remove_if(tok.begin(), tok.end(), [](unsigned char c) { return std::isspace(c); }), tok.end());
    if (tok.empty()) throw std::invalid_argument("empty coefficient in \"" + s + "\"");
    const auto colon = tok.find(':');
    size_t used = 0;
    try {
      if (colon == std::string::npos) {
        const double re = std::stod(tok, &used);
        if (used != tok.size()) throw std::invalid_argument("");
        out.emplace_back(re, 0.0);
      } else {
        const std::string a = tok.substr(0, colon), b = tok.substr(colon + 1);
        size_t ua = 0, ub = 0;
        const double re = std::stod(a, &ua), im = std::stod(b, &ub);
        if (ua != a.size() || ub != b.size()) throw std::invalid_argument("");
        out.emplace_back(re, im);
      }
    } catch (const std::exception&) {
      throw std::invalid_argument("bad coefficient \"" + tok + "\"");
    }
  }
  return out;
}

std::pair<int, int> parse_grid(const std::string& s) {
  const auto x = s.find('x');
  if (x == std::string::npos) throw std::invalid_argument("grid must look like 48x96");
  try {
    size_t ua = 0, ub = 0;
    const std::string a = s.substr(0, x), b = s.substr(x + 1);
    const int nr = std::stoi(a, &ua), np = std::stoi(b, &ub);
    if (ua != a.size() || ub != b.size()) throw std::invalid_argument("");
    return {nr, np};
  } catch (const std::exception&) {
    throw std::invalid_argument("grid must look like 48x96");
  }
}

void write_field_csv(const std::filesystem::path& path, const DiskGrid& grid, const std::vector<NamedColumn>& cols) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "node_index,r,phi";
  for (const auto& c : cols) {
    if (c.values.size() != grid.nodes()) throw std::invalid_argument("column " + c.name + " has wrong length");
    out << ',' << c.name;
  }
  out << '\n';
  for (int p = 0; p < grid.nodes(); ++p) {
    out << p << ',' << full(grid.r[grid.ring(p)]) << ',' << full(grid.phi[grid.slot(p)]);
    for (const auto& c : cols) out << ',' << full(c.values(p));
    out << '\n';
  }
}

void write_metric_csv(const std::filesystem::path& path, const DiskGrid& grid, const MatrixField& H) {
  std::vector<NamedColumn> cols;
  for (int a = 0; a < H.dim; ++a)
    for (int b = 0; b < H.dim; ++b) {
      const Vec e = H.entry(a, b);
      const std::string base = "h_" + std::to_string(a) + "_" + std::to_string(b);
      cols.push_back({base + "_re", e.real()});
      cols.push_back({base + "_im", e.imag()});
    }
  write_field_csv(path, grid, cols);
}

MatrixField read_metric_csv(const std::filesystem::path& path, const DiskGrid& grid, int dim) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::string line;
  std::getline(in, line);
  const int expected = 3 + 2 * dim * dim;
  MatrixField H(grid.nodes(), dim);
  int row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> v;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) v.push_back(std::stod(tok));
    if (static_cast<int>(v.size()) != expected || row >= grid.nodes())
      throw std::runtime_error("metric csv does not match grid and rank: " + path.string());
    int k = 3;
    for (int a = 0; a < dim; ++a)
      for (int b = 0; b < dim; ++b, k += 2) H.data(row, MatrixField::col(a, b, dim)) = cd(v[k], v[k + 1]);
    ++row;
  }
  if (row != grid.nodes()) throw std::runtime_error("metric csv has " + std::to_string(row) + " rows, expected " +
                                                    std::to_string(grid.nodes()));
  return H;
}

void write_json(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return Json::parse(in);
}

void write_polar_svg(const std::filesystem::path& path, const DiskGrid& grid, const Eigen::VectorXd& values,
                     const std::string& title) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  const double lo = values.minCoeff(), hi = values.maxCoeff();
  const double span = hi > lo ? hi - lo : 1.0;
  const double size = 400.0, c = size / 2.0, scale = 180.0 / grid.R;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size + 40 << "\">\n";
  out << "<text x=\"10\" y=\"" << size + 25 << "\" font-size=\"13\">" << title << " [" << full(lo) << ", " << full(hi)
      << "]</text>\n";
  const double dphi = 2.0 * std::numbers::pi / grid.Nphi;
  for (int i = 0; i < grid.Nr; ++i) {
    const double r0 = (i == 0 ? 0.0 : 0.5 * (grid.r[i - 1] + grid.r[i])) * scale;
    const double r1 = (i == grid.Nr - 1 ? grid.r[i] : 0.5 * (grid.r[i] + grid.r[i + 1])) * scale;
    for (int j = 0; j < grid.Nphi; ++j) {
      const double t = (values(grid.index(i, j)) - lo) / span;
      // blue to red ramp
      const int red = static_cast<int>(255 * t), blue = static_cast<int>(255 * (1.0 - t));
      const double a0 = grid.phi[j] - 0.5 * dphi, a1 = grid.phi[j] + 0.5 * dphi;
      auto pt = [&](double rr, double a) { return full(c + rr * std::cos(a)) + "," + full(c - rr * std::sin(a)); };
      out << "<polygon points=\"" << pt(r0, a0) << ' ' << pt(r1, a0) << ' ' << pt(r1, a1) << ' ' << pt(r0, a1)
          << "\" fill=\"rgb(" << red << ",64," << blue << ")\"/>\n";
    }
  }
  out << "</svg>\n";
}

}  // namespace sonn

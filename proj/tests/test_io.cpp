#include <filesystem>

#include "doctest.h"
#include "sonn/io.hpp"

using namespace sonn;

TEST_CASE("coefficient lists parse real and complex entries") {
  const auto c = parse_coefficients("1.5, -2:0.25,3e-2");
  REQUIRE(c.size() == 3);
  CHECK(c[0] == cd(1.5, 0.0));
  CHECK(c[1] == cd(-2.0, 0.25));
  CHECK(c[2] == cd(0.03, 0.0));
  CHECK_THROWS_AS(parse_coefficients("1,,2"), std::invalid_argument);
  CHECK_THROWS_AS(parse_coefficients("1x"), std::invalid_argument);
  CHECK_THROWS_AS(parse_coefficients("1:"), std::invalid_argument);
}

TEST_CASE("grid strings") {
  CHECK(parse_grid("48x96") == std::make_pair(48, 96));
  CHECK_THROWS_AS(parse_grid("48"), std::invalid_argument);
  CHECK_THROWS_AS(parse_grid("48x9a"), std::invalid_argument);
}

TEST_CASE("metric CSV round trip is bitwise") {
  const auto spec = build_bundle(2);
  const auto grid = build_grid(0.7, 8, 16);
  auto H = hX_field(spec, grid);
  H.data *= cd(1.0 / 3.0, 1e-7);
  const auto path = std::filesystem::temp_directory_path() / "sonn_metric_roundtrip.csv";
  write_metric_csv(path, grid, H);
  const auto back = read_metric_csv(path, grid, 4);
  CHECK((back.data - H.data).cwiseAbs().maxCoeff() == 0.0);
  std::filesystem::remove(path);
}

TEST_CASE("Higgs tuple JSON round trip") {
  HiggsTuple q = HiggsTuple::zero(3);
  q.coefficients[1] = {cd(0.1, -0.2)};
  q.coefficients[2] = {cd(1.0, 0.0), cd(0.0, 3.0)};
  const auto back = higgs_from_json(to_json(q), 3);
  for (int k = 0; k < 3; ++k) CHECK(back.coefficients[k] == q.coefficients[k]);
  CHECK_THROWS_AS(higgs_from_json(Json{{"q4", Json::array()}}, 3), std::invalid_argument);
}

TEST_CASE("solver config from JSON") {
  SolverConfig c;
  apply_json(Json{{"method", "heat_flow"}, {"residualTol", 1e-9}, {"baseCorrection", false}}, c);
  CHECK(c.method == Method::heat_flow);
  CHECK(c.residualTol == 1e-9);
  CHECK_FALSE(c.baseCorrection);
  CHECK(c.maxIterations == SolverConfig{}.maxIterations);
  const auto j = to_json(c);
  SolverConfig d;
  apply_json(j, d);
  CHECK(d.method == c.method);
  CHECK(d.residualTol == c.residualTol);
}

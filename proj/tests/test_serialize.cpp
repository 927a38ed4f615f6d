#include <doctest.h>

#include <cstdio>
#include <string>

#include "carnot/serialize.hpp"

using namespace carnot;

TEST_CASE("algebra JSON round trip") {
  const auto a = make_g_eps(2, 0.75);
  const Json j = algebra_to_json(a);
  const auto back = algebra_from_json(j);
  CHECK(back.m == a.m);
  CHECK(back.m2 == a.m2);
  for (int q = 0; q < a.m2; ++q) CHECK((back.B[q] - a.B[q]).norm() == doctest::Approx(0.0));
}

TEST_CASE("metric JSON round trip") {
  VerticalMetric v{Eigen::MatrixXd::Identity(2, 2)};
  v.G(0, 1) = v.G(1, 0) = 0.25;
  const auto back = metric_from_json(metric_to_json(v));
  CHECK((back.G - v.G).norm() == doctest::Approx(0.0));
}

TEST_CASE("solver config JSON honors defaults and overrides") {
  const SolverConfig def;
  const SolverConfig parsed = solver_from_json(Json::parse("{\"seed\": 99}"));
  CHECK(parsed.seed == 99);
  CHECK(parsed.restarts == def.restarts);
  CHECK(parsed.grid_density == def.grid_density);

  const SolverConfig round = solver_from_json(solver_to_json(def));
  CHECK(round.tol == def.tol);
  CHECK(round.max_iters == def.max_iters);
}

TEST_CASE("catalog names parse to the catalog constructors") {
  const auto heis = parse_group_name("heis(1,2)");
  CHECK(heis.m == 4);
  CHECK((heis.B[0] - make_heisenberg_aniso({1, 2}).B[0]).norm() == doctest::Approx(0.0));

  CHECK(parse_group_name("free(4)").m2 == 6);
  CHECK(parse_group_name("geps(2,1)").m2 == 2);
  CHECK(parse_group_name("geps(2,0)").m2 == 1);
  CHECK(parse_group_name("gbar(3,0.25)").m == 6);

  CHECK_THROWS_AS(parse_group_name("sphere(3)"), UnknownGroupError);
  CHECK_THROWS_AS(parse_group_name("heis()"), UnknownGroupError);
  CHECK_THROWS_AS(parse_group_name("free(2,3)"), UnknownGroupError);
  CHECK_THROWS_AS(parse_group_name("free(2.5)"), UnknownGroupError);
  CHECK_THROWS_AS(parse_group_name("heis(1,-2)"), UnknownGroupError);
}

TEST_CASE("group loading distinguishes names, files, and garbage") {
  CHECK(looks_like_group_name("heis(1,2)"));
  CHECK_FALSE(looks_like_group_name("groups/my_group.json"));

  const std::string path = "serialize_test_group.json";
  write_text_file(path, algebra_to_json(make_free_step_two(3)).dump());
  const auto loaded = load_group(path);
  CHECK(loaded.m == 3);
  CHECK(loaded.m2 == 3);
  std::remove(path.c_str());

  CHECK_THROWS_AS(load_group("no_such_file.json"), IoError);

  const std::string bad = "serialize_test_bad.json";
  write_text_file(bad, "{ not json");
  CHECK_THROWS_AS(load_group(bad), MalformedJsonError);
  std::remove(bad.c_str());
}

TEST_CASE("doubles are formatted with round-trip precision") {
  for (double x : {1.0 / 3.0, 0.5144957554275265, -2.25e-17, 6.02e23}) {
    CHECK(std::stod(format_double(x)) == x);
    CHECK(format_double(x).find(',') == std::string::npos);
  }
}

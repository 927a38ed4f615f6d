#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "carnot/cli.hpp"
#include "carnot/serialize.hpp"

using namespace carnot;

namespace {

struct CliResult {
  int exit_code;
  std::string out;
  std::string err;
};

CliResult run_spec(RunSpec spec) {
  std::ostringstream out, err;
  const int code = run(spec, out, err);
  return {code, out.str(), err.str()};
}

SolverConfig fast_solver() {
  SolverConfig cfg;
  cfg.restarts = 3;
  cfg.max_iters = 120;
  cfg.tol = 1e-9;
  cfg.seed = 7;
  cfg.grid_density = 1024;
  return cfg;
}

}  // namespace

TEST_CASE("validate command on a catalog group") {
  RunSpec spec;
  spec.command = "validate";
  spec.group = "heis(1,2)";
  spec.solver = fast_solver();
  const auto res = run_spec(spec);
  CHECK(res.exit_code == 0);
  const Json j = Json::parse(res.out);
  CHECK(j.at("violations").empty());
  CHECK(j.at("version").get<std::string>() == std::string("0.1.0"));
  CHECK(j.at("seed").get<unsigned long long>() == 7);
  CHECK(j.contains("config"));
}

TEST_CASE("validate command flags a broken group file with exit 1") {
  const std::string path = "cli_test_bad_group.json";
  auto a = make_heisenberg_aniso({1.0});
  a.B[0](0, 0) = 1.0;  // break skewness
  write_text_file(path, algebra_to_json(a).dump());

  RunSpec spec;
  spec.command = "validate";
  spec.group = path;
  spec.solver = fast_solver();
  const auto res = run_spec(spec);
  CHECK(res.exit_code == 1);
  CHECK(res.out.find("not skew-symmetric") != std::string::npos);
  std::remove(path.c_str());
}

TEST_CASE("input errors exit with code 2 and distinct messages") {
  RunSpec spec;
  spec.command = "deviation";
  spec.solver = fast_solver();

  spec.group = "sphere(3)";
  auto res = run_spec(spec);
  CHECK(res.exit_code == 2);
  CHECK(res.err.find("unknown group name") != std::string::npos);

  spec.group = "missing_file.json";
  res = run_spec(spec);
  CHECK(res.exit_code == 2);
  CHECK(res.err.find("cannot read file") != std::string::npos);

  const std::string path = "cli_test_malformed.json";
  write_text_file(path, "{ not json");
  spec.group = path;
  res = run_spec(spec);
  CHECK(res.exit_code == 2);
  CHECK(res.err.find("malformed JSON") != std::string::npos);
  std::remove(path.c_str());

  spec.group = "heis(1,2)";
  spec.solver.tol = 1.0;  // out of range
  res = run_spec(spec);
  CHECK(res.exit_code == 2);
}

TEST_CASE("deviation command reports the closed-form value") {
  RunSpec spec;
  spec.command = "deviation";
  spec.group = "heis(1,2)";
  spec.metric = "optimal";
  spec.solver = fast_solver();
  const auto res = run_spec(spec);
  REQUIRE(res.exit_code == 0);
  const Json j = Json::parse(res.out);
  const double value = j.at("report").at("value").get<double>();
  CHECK(value == doctest::Approx(0.5144957554275265).epsilon(1e-3));
  CHECK(j.at("report").at("metric").at("G")[0][0].get<double>() ==
        doctest::Approx(5.0 / 17.0).epsilon(5e-3));
}

TEST_CASE("deviation at a fixed metric loaded from a file") {
  const std::string path = "cli_test_metric.json";
  write_text_file(path, "{\"G\": [[1.0]]}");
  RunSpec spec;
  spec.command = "deviation";
  spec.group = "heis(1,2)";
  spec.metric = path;
  spec.solver = fast_solver();
  const auto res = run_spec(spec);
  REQUIRE(res.exit_code == 0);
  const Json j = Json::parse(res.out);
  CHECK(j.at("report").at("value").get<double>() ==
        doctest::Approx(std::sqrt(18.0) / 2.0).epsilon(1e-9));
  std::remove(path.c_str());
}

TEST_CASE("conjecture command emits deterministic byte-identical CSV") {
  RunSpec spec;
  spec.command = "conjecture";
  spec.n_range = "2..3";
  spec.format = "csv";
  spec.solver = fast_solver();
  spec.solver.grid_density = 512;

  const auto first = run_spec(spec);
  const auto second = run_spec(spec);
  REQUIRE(first.exit_code == 0);
  CHECK(first.out == second.out);
  CHECK(first.out.find("n,sup,delta_sq,ratio,witness_z1,witness_zp,witness_t") !=
        std::string::npos);
  CHECK(first.out.find("# {\"config\"") != std::string::npos);

  // output to files through the binary-level interface as well
  spec.output = "cli_test_conjecture.csv";
  const auto file_run = run_spec(spec);
  REQUIRE(file_run.exit_code == 0);
  const std::string body = read_text_file(spec.output);
  CHECK(body == first.out);
  std::remove(spec.output.c_str());
}

TEST_CASE("defects command produces witness rows in CSV") {
  RunSpec spec;
  spec.command = "defects";
  spec.group = "heis(1,2)";
  spec.metric = "identity";
  spec.format = "csv";
  spec.solver = fast_solver();
  const auto res = run_spec(spec);
  REQUIRE(res.exit_code == 0);
  CHECK(res.out.find("kind,x1,x2,x3,x4,t1,value") != std::string::npos);
  CHECK(res.out.find("eikonal,") != std::string::npos);
  CHECK(res.out.find("harmonic,") != std::string::npos);
  CHECK(res.out.find("scaled_harmonic,") != std::string::npos);
}

TEST_CASE("verify-fundamental reports residual maxima") {
  RunSpec spec;
  spec.command = "verify-fundamental";
  spec.n_range = "2";
  spec.samples = 10;
  spec.solver = fast_solver();
  const auto res = run_spec(spec);
  REQUIRE(res.exit_code == 0);
  const Json j = Json::parse(res.out);
  const auto& row = j.at("results").at(0);
  CHECK(row.at("n").get<int>() == 2);
  CHECK(row.at("max_nq_lu_residual").get<double>() <= 1e-9);
  CHECK(row.at("max_frame_identity_residual").get<double>() <= 1e-10);
  CHECK(row.at("max_pqr_identity_residual").get<double>() <= 1e-10);
  CHECK(row.at("max_fd_residual").get<double>() <= 1e-6);
  CHECK(row.at("max_grad_log_u_fd_residual").get<double>() <= 1e-6);
}

TEST_CASE("catalog lists the group constructors") {
  RunSpec spec;
  spec.command = "catalog";
  spec.solver = fast_solver();
  const auto res = run_spec(spec);
  REQUIRE(res.exit_code == 0);
  const Json j = Json::parse(res.out);
  CHECK(j.at("groups").size() == 4);
}

TEST_CASE("the installed binary runs end to end") {
#ifdef CARNOT_BINARY_PATH
  const std::string binary = CARNOT_BINARY_PATH;
  const std::string out_path = "cli_test_binary_out.json";
  const std::string cmd = "\"" + binary + "\" validate --group \"free(3)\" --output " + out_path +
                          " > /dev/null 2>&1";
  const int code = std::system(cmd.c_str());
  CHECK(code == 0);
  const Json j = Json::parse(read_text_file(out_path));
  CHECK(j.at("violations").empty());
  std::remove(out_path.c_str());
#endif
}

#include "carnot/serialize.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace carnot {

Json algebra_to_json(const StepTwoAlgebra& a) {
  Json j;
  j["m"] = a.m;
  j["m2"] = a.m2;
  Json bs = Json::array();
  for (const auto& b : a.B) {
    Json rows = Json::array();
    for (int i = 0; i < b.rows(); ++i) {
      Json row = Json::array();
      for (int k = 0; k < b.cols(); ++k) row.push_back(b(i, k));
      rows.push_back(std::move(row));
    }
    bs.push_back(std::move(rows));
  }
  j["B"] = std::move(bs);
  return j;
}

StepTwoAlgebra algebra_from_json(const Json& j) {
  try {
    StepTwoAlgebra a;
    a.m = j.at("m").get<int>();
    a.m2 = j.at("m2").get<int>();
    const Json& bs = j.at("B");
    if (!bs.is_array()) throw MalformedJsonError("\"B\" must be an array of matrices");
    for (const auto& rows : bs) {
      Eigen::MatrixXd b(a.m, a.m);
      if (static_cast<int>(rows.size()) != a.m) {
        throw MalformedJsonError("structure matrix has wrong row count");
      }
      for (int i = 0; i < a.m; ++i) {
        const auto& row = rows.at(i);
        if (static_cast<int>(row.size()) != a.m) {
          throw MalformedJsonError("structure matrix has wrong column count");
        }
        for (int k = 0; k < a.m; ++k) b(i, k) = row.at(k).get<double>();
      }
      a.B.push_back(std::move(b));
    }
    return a;
  } catch (const Json::exception& e) {
    throw MalformedJsonError(std::string("group schema: ") + e.what());
  }
}

Json metric_to_json(const VerticalMetric& v) {
  Json rows = Json::array();
  for (int i = 0; i < v.G.rows(); ++i) {
    Json row = Json::array();
    for (int k = 0; k < v.G.cols(); ++k) row.push_back(v.G(i, k));
    rows.push_back(std::move(row));
  }
  Json j;
  j["G"] = std::move(rows);
  return j;
}

VerticalMetric metric_from_json(const Json& j) {
  try {
    const Json& rows = j.at("G");
    const int n = static_cast<int>(rows.size());
    Eigen::MatrixXd g(n, n);
    for (int i = 0; i < n; ++i) {
      const auto& row = rows.at(i);
      if (static_cast<int>(row.size()) != n) {
        throw MalformedJsonError("Gram matrix must be square");
      }
      for (int k = 0; k < n; ++k) g(i, k) = row.at(k).get<double>();
    }
    return VerticalMetric{std::move(g)};
  } catch (const Json::exception& e) {
    throw MalformedJsonError(std::string("metric schema: ") + e.what());
  }
}

Json solver_to_json(const SolverConfig& cfg) {
  Json j;
  j["restarts"] = cfg.restarts;
  j["max_iters"] = cfg.max_iters;
  j["tol"] = cfg.tol;
  j["seed"] = cfg.seed;
  j["grid_density"] = cfg.grid_density;
  j["threads"] = cfg.threads;
  return j;
}

SolverConfig solver_from_json(const Json& j) {
  try {
    SolverConfig cfg;
    if (j.contains("restarts")) cfg.restarts = j.at("restarts").get<int>();
    if (j.contains("max_iters")) cfg.max_iters = j.at("max_iters").get<int>();
    if (j.contains("tol")) cfg.tol = j.at("tol").get<double>();
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("grid_density")) cfg.grid_density = j.at("grid_density").get<int>();
    if (j.contains("threads")) cfg.threads = j.at("threads").get<int>();
    return cfg;
  } catch (const Json::exception& e) {
    throw MalformedJsonError(std::string("solver schema: ") + e.what());
  }
}

Json report_to_json(const DeviationReport& r) {
  Json j;
  j["value"] = r.value;
  Json witness = Json::array();
  for (int i = 0; i < r.witness_t.size(); ++i) witness.push_back(r.witness_t[i]);
  j["witness_t"] = std::move(witness);
  j["metric"] = metric_to_json(r.metric);
  j["inner_converged"] = r.inner_converged;
  j["outer_converged"] = r.outer_converged;
  j["evaluations"] = r.evaluations;
  return j;
}

namespace {

std::vector<double> parse_number_list(const std::string& body, const std::string& name) {
  std::vector<double> out;
  std::string token;
  std::istringstream is(body);
  while (std::getline(is, token, ',')) {
    try {
      std::size_t used = 0;
      const double value = std::stod(token, &used);
      while (used < token.size() && std::isspace(static_cast<unsigned char>(token[used]))) ++used;
      if (used != token.size()) throw std::invalid_argument(token);
      out.push_back(value);
    } catch (const std::exception&) {
      throw UnknownGroupError("unknown group name \"" + name + "\": bad argument \"" + token +
                              "\"");
    }
  }
  if (out.empty()) {
    throw UnknownGroupError("unknown group name \"" + name + "\": empty argument list");
  }
  return out;
}

}  // namespace

bool looks_like_group_name(const std::string& s) {
  return s.find('(') != std::string::npos && s.back() == ')';
}

StepTwoAlgebra parse_group_name(const std::string& name) {
  const auto open = name.find('(');
  if (open == std::string::npos || name.back() != ')') {
    throw UnknownGroupError("unknown group name \"" + name + "\"");
  }
  const std::string head = name.substr(0, open);
  const std::string body = name.substr(open + 1, name.size() - open - 2);
  const std::vector<double> args = parse_number_list(body, name);

  auto require_args = [&](std::size_t count) {
    if (args.size() != count) {
      throw UnknownGroupError("unknown group name \"" + name + "\": expected " +
                              std::to_string(count) + " arguments");
    }
  };
  auto as_int = [&](double x) {
    const int i = static_cast<int>(x);
    if (static_cast<double>(i) != x) {
      throw UnknownGroupError("unknown group name \"" + name + "\": expected integer argument");
    }
    return i;
  };

  try {
    if (head == "heis") return make_heisenberg_aniso(args);
    if (head == "free") {
      require_args(1);
      return make_free_step_two(as_int(args[0]));
    }
    if (head == "geps") {
      require_args(2);
      return make_g_eps(as_int(args[0]), args[1]);
    }
    if (head == "gbar") {
      require_args(2);
      return make_g_bar_eps(as_int(args[0]), args[1]);
    }
  } catch (const std::invalid_argument& e) {
    throw UnknownGroupError("unknown group name \"" + name + "\": " + e.what());
  }
  throw UnknownGroupError("unknown group name \"" + name + "\"");
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read file \"" + path + "\"");
  std::ostringstream os;
  os << in.rdbuf();
  if (in.bad()) throw IoError("cannot read file \"" + path + "\"");
  return os.str();
}

void write_text_file(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write file \"" + path + "\"");
  out << body;
  if (!out) throw IoError("cannot write file \"" + path + "\"");
}

StepTwoAlgebra load_group(const std::string& name_or_path) {
  if (looks_like_group_name(name_or_path)) return parse_group_name(name_or_path);
  const std::string text = read_text_file(name_or_path);
  Json parsed;
  try {
    parsed = Json::parse(text);
  } catch (const Json::exception& e) {
    throw MalformedJsonError("malformed JSON in \"" + name_or_path + "\": " + e.what());
  }
  return algebra_from_json(parsed);
}

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace carnot

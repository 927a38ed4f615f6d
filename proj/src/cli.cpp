#include "carnot/cli.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <sstream>

#include "carnot/anisotropic.hpp"
#include "carnot/calculus.hpp"
#include "carnot/serialize.hpp"
#include "carnot/version.hpp"
#include "rng.hpp"

namespace carnot {

namespace {

struct NRange {
  int lo = 0;
  int hi = 0;
};

NRange parse_n_range(const std::string& s) {
  const auto dots = s.find("..");
  try {
    if (dots == std::string::npos) {
      const int n = std::stoi(s);
      return {n, n};
    }
    const int lo = std::stoi(s.substr(0, dots));
    const int hi = std::stoi(s.substr(dots + 2));
    if (lo > hi) throw std::invalid_argument(s);
    return {lo, hi};
  } catch (const std::exception&) {
    throw std::invalid_argument("bad --n range \"" + s + "\" (expected e.g. 3 or 2..5)");
  }
}

Json run_header(const RunSpec& spec) {
  Json j;
  j["command"] = spec.command;
  j["config"] = solver_to_json(spec.solver);
  j["seed"] = spec.solver.seed;
  j["version"] = kVersion;
  return j;
}

std::string csv_preamble(const RunSpec& spec) {
  Json meta;
  meta["config"] = solver_to_json(spec.solver);
  meta["seed"] = spec.solver.seed;
  meta["version"] = kVersion;
  return "# " + meta.dump() + "\n";
}

void emit(const RunSpec& spec, const std::string& body, std::ostream& out) {
  if (spec.output.empty()) {
    out << body;
  } else {
    write_text_file(spec.output, body);
  }
}

struct ResolvedMetric {
  VerticalMetric metric{Eigen::MatrixXd()};
  bool from_minimax = false;
  DeviationReport minimax_report;
};

ResolvedMetric resolve_metric(const RunSpec& spec, const StepTwoAlgebra& algebra) {
  ResolvedMetric out;
  if (spec.metric == "identity" || spec.metric.empty()) {
    out.metric = VerticalMetric::identity(algebra.m2);
    return out;
  }
  if (spec.metric == "optimal") {
    out.minimax_report = deviation(algebra, spec.solver);
    out.metric = out.minimax_report.metric;
    out.from_minimax = true;
    return out;
  }
  const std::string text = read_text_file(spec.metric);
  Json parsed;
  try {
    parsed = Json::parse(text);
  } catch (const Json::exception& e) {
    throw MalformedJsonError("malformed JSON in \"" + spec.metric + "\": " + e.what());
  }
  out.metric = metric_from_json(parsed);
  return out;
}

int run_validate(const RunSpec& spec, std::ostream& out) {
  const StepTwoAlgebra algebra = load_group(spec.group);
  const ValidationReport report = validate(algebra);
  Json j = run_header(spec);
  j["group"] = spec.group;
  j["violations"] = report.violations;
  emit(spec, j.dump(2) + "\n", out);
  return report.ok() ? 0 : 1;
}

int run_deviation(const RunSpec& spec, std::ostream& out, std::ostream& err) {
  const StepTwoAlgebra algebra = load_group(spec.group);
  const ValidationReport check = validate(algebra);
  if (!check.ok()) {
    for (const auto& v : check.violations) err << "invalid group: " << v << "\n";
    return 1;
  }
  DeviationReport report;
  if (spec.metric == "optimal") {
    report = deviation(algebra, spec.solver);
  } else {
    ResolvedMetric resolved = resolve_metric(spec, algebra);
    const ValidationReport mcheck = validate(resolved.metric);
    if (!mcheck.ok()) {
      for (const auto& v : mcheck.violations) err << "invalid metric: " << v << "\n";
      return 1;
    }
    report = deviation_at_metric(algebra, resolved.metric, spec.solver);
  }

  if (spec.format == "csv") {
    std::ostringstream os;
    os << csv_preamble(spec);
    os << "value";
    for (int i = 0; i < report.witness_t.size(); ++i) os << ",t" << i + 1;
    os << ",inner_converged,outer_converged,evaluations\n";
    os << format_double(report.value);
    for (int i = 0; i < report.witness_t.size(); ++i) os << "," << format_double(report.witness_t[i]);
    os << "," << (report.inner_converged ? 1 : 0) << "," << (report.outer_converged ? 1 : 0) << ","
       << report.evaluations << "\n";
    emit(spec, os.str(), out);
  } else {
    Json j = run_header(spec);
    j["group"] = spec.group;
    j["report"] = report_to_json(report);
    emit(spec, j.dump(2) + "\n", out);
  }
  return 0;
}

int run_defects(const RunSpec& spec, std::ostream& out, std::ostream& err) {
  const StepTwoAlgebra algebra = load_group(spec.group);
  const ValidationReport check = validate(algebra);
  if (!check.ok()) {
    for (const auto& v : check.violations) err << "invalid group: " << v << "\n";
    return 1;
  }
  ResolvedMetric resolved = resolve_metric(spec, algebra);

  struct Row {
    const char* kind;
    SupDefectResult res;
  };
  std::vector<Row> rows;
  rows.push_back({"eikonal", sup_defect(algebra, resolved.metric, DefectKind::eikonal, spec.solver)});
  rows.push_back({"harmonic", sup_defect(algebra, resolved.metric, DefectKind::harmonic, spec.solver)});
  rows.push_back({"scaled_harmonic",
                  sup_defect(algebra, resolved.metric, DefectKind::scaled_harmonic, spec.solver)});

  if (spec.format == "csv") {
    std::ostringstream os;
    os << csv_preamble(spec);
    os << "kind";
    for (int i = 0; i < algebra.m; ++i) os << ",x" << i + 1;
    for (int q = 0; q < algebra.m2; ++q) os << ",t" << q + 1;
    os << ",value\n";
    for (const auto& row : rows) {
      os << row.kind;
      for (int i = 0; i < algebra.m; ++i) os << "," << format_double(row.res.witness.x[i]);
      for (int q = 0; q < algebra.m2; ++q) os << "," << format_double(row.res.witness.t[q]);
      os << "," << format_double(row.res.sup) << "\n";
    }
    emit(spec, os.str(), out);
  } else {
    Json j = run_header(spec);
    j["group"] = spec.group;
    j["metric"] = metric_to_json(resolved.metric);
    if (resolved.from_minimax) j["deviation"] = report_to_json(resolved.minimax_report);
    Json results = Json::array();
    for (const auto& row : rows) {
      Json r;
      r["kind"] = row.kind;
      r["sup"] = row.res.sup;
      Json witness;
      witness["x"] = std::vector<double>(row.res.witness.x.data(),
                                         row.res.witness.x.data() + row.res.witness.x.size());
      witness["t"] = std::vector<double>(row.res.witness.t.data(),
                                         row.res.witness.t.data() + row.res.witness.t.size());
      r["witness"] = std::move(witness);
      r["samples"] = row.res.samples;
      r["evaluations"] = row.res.evaluations;
      r["witness_interior"] = row.res.witness_interior;
      results.push_back(std::move(r));
    }
    j["results"] = std::move(results);
    emit(spec, j.dump(2) + "\n", out);
  }
  return 0;
}

aniso::AnisoPoint seeded_point(int n, detail::SplitMix64& rng) {
  aniso::AnisoPoint p;
  p.x1 = rng.gaussian();
  p.y1 = rng.gaussian();
  p.zprime = rng.gaussian_vector(2 * (n - 1));
  p.t = rng.gaussian();
  // rescale by a dilation so the homogeneous norm lands in [1/2, 2]
  const double norm = aniso::homogeneous_n(n, p);
  const double target = rng.uniform(0.5, 2.0);
  const double s = target / norm;
  p.x1 *= s;
  p.y1 *= s;
  p.zprime *= s;
  p.t *= s * s;
  return p;
}

int run_verify_fundamental(const RunSpec& spec, std::ostream& out) {
  const NRange range = parse_n_range(spec.n_range);
  Json results = Json::array();
  std::ostringstream csv;
  csv << csv_preamble(spec) << "n,check,value\n";

  for (int n = range.lo; n <= range.hi; ++n) {
    if (n < 2) throw std::invalid_argument("verify-fundamental: need n >= 2");
    detail::SplitMix64 rng = detail::stream(spec.solver.seed, 7000 + static_cast<unsigned>(n));
    const int q_hom = 2 * n + 2;

    double max_nq_lu = 0.0, max_frame = 0.0, max_pqr = 0.0, max_fd = 0.0, max_grad_fd = 0.0;
    const int fd_subset = std::min(spec.samples, 8);
    const StepTwoAlgebra algebra = aniso::group_algebra(n);
    (void)q_hom;

    for (int k = 0; k < spec.samples; ++k) {
      const aniso::AnisoPoint p = seeded_point(n, rng);
      const aniso::AbcFrame f = aniso::abc_frame(n, p);

      max_frame = std::max({max_frame, std::abs(f.vvec.squaredNorm() - (2 * f.B - f.A)),
                            std::abs(f.wvec.squaredNorm() - (2 * f.B - f.A)),
                            std::abs(f.uvec.squaredNorm() - f.A),
                            std::abs(f.uvec.dot(f.vvec) - f.A), std::abs(f.vvec.dot(f.wvec)),
                            std::abs(f.uvec.dot(f.wvec))});

      const aniso::Pqr c = aniso::pqr(n, p);
      max_pqr = std::max({max_pqr,
                          std::abs(c.P * c.P + c.Q * c.Q - 1.0 / (2 * f.C * (f.C + f.B))),
                          std::abs(p.t * c.Q - f.B * c.P - 0.5)});

      max_nq_lu = std::max(max_nq_lu, aniso::scaled_harmonicity_residual(n, p));

      if (k < fd_subset) {
        max_fd = std::max(max_fd, aniso::divergence_identities(n, p).max_fd_residual());

        ScalarField log_u_field = ScalarField::finite_difference([n](const GroupPoint& g) {
          return std::log(aniso::fundamental_u(n, aniso::from_group_point(n, g)));
        });
        const Eigen::VectorXd fd_grad =
            horizontal_gradient(log_u_field, algebra, aniso::to_group_point(p));
        max_grad_fd =
            std::max(max_grad_fd, (fd_grad - aniso::grad_log_u(n, p)).cwiseAbs().maxCoeff());
      }
    }

    Json r;
    r["n"] = n;
    r["points"] = spec.samples;
    r["max_nq_lu_residual"] = max_nq_lu;
    r["max_frame_identity_residual"] = max_frame;
    r["max_pqr_identity_residual"] = max_pqr;
    r["max_fd_residual"] = max_fd;
    r["max_grad_log_u_fd_residual"] = max_grad_fd;
    results.push_back(r);

    csv << n << ",nq_lu," << format_double(max_nq_lu) << "\n";
    csv << n << ",frame_identity," << format_double(max_frame) << "\n";
    csv << n << ",pqr_identity," << format_double(max_pqr) << "\n";
    csv << n << ",fd_residual," << format_double(max_fd) << "\n";
    csv << n << ",grad_log_u_fd," << format_double(max_grad_fd) << "\n";
  }

  if (spec.format == "csv") {
    emit(spec, csv.str(), out);
  } else {
    Json j = run_header(spec);
    j["results"] = std::move(results);
    emit(spec, j.dump(2) + "\n", out);
  }
  return 0;
}

int run_conjecture(const RunSpec& spec, std::ostream& out) {
  const NRange range = parse_n_range(spec.n_range);
  Json results = Json::array();
  std::ostringstream csv;
  csv << csv_preamble(spec) << "n,sup,delta_sq,ratio,witness_z1,witness_zp,witness_t\n";

  for (int n = range.lo; n <= range.hi; ++n) {
    if (n < 2) throw std::invalid_argument("conjecture: need n >= 2");
    const aniso::ConjectureScanResult res = aniso::conjecture_scan(n, spec.solver);
    const double wz1 =
        std::sqrt(res.witness.x1 * res.witness.x1 + res.witness.y1 * res.witness.y1);
    const double wzp = res.witness.zprime.norm();

    Json r;
    r["n"] = n;
    r["sup"] = res.sup;
    r["delta_sq"] = res.delta_sq;
    r["ratio"] = res.ratio;
    r["witness_z1"] = wz1;
    r["witness_zp"] = wzp;
    r["witness_t"] = res.witness.t;
    r["samples"] = res.samples;
    results.push_back(r);

    csv << n << "," << format_double(res.sup) << "," << format_double(res.delta_sq) << ","
        << format_double(res.ratio) << "," << format_double(wz1) << "," << format_double(wzp)
        << "," << format_double(res.witness.t) << "\n";
  }

  if (spec.format == "csv") {
    emit(spec, csv.str(), out);
  } else {
    Json j = run_header(spec);
    j["results"] = std::move(results);
    emit(spec, j.dump(2) + "\n", out);
  }
  return 0;
}

int run_catalog(const RunSpec& spec, std::ostream& out) {
  Json j = run_header(spec);
  Json groups = Json::array();
  groups.push_back({{"name", "heis(b1,...,bn)"},
                    {"description", "anisotropic Heisenberg algebra, [X_j,Y_j] = b_j T"}});
  groups.push_back({{"name", "free(m)"},
                    {"description", "free step-two algebra of rank m, [X_i,X_j] = T_ij"}});
  groups.push_back({{"name", "geps(n,eps)"},
                    {"description", "[X_j,Y_j] = T with [X_1,X_2] = eps U (two-dim center)"}});
  groups.push_back({{"name", "gbar(n,eps)"},
                    {"description", "[X_j,Y_j] = T with [X_1,X_2] = eps T (one-dim center)"}});
  j["groups"] = std::move(groups);
  j["group_schema"] = "{\"m\": int, \"m2\": int, \"B\": [m2 x (m x m)]}";
  j["metric_schema"] = "{\"G\": [[...]]} (identity when omitted)";
  emit(spec, j.dump(2) + "\n", out);
  return 0;
}

}  // namespace

int run(const RunSpec& spec, std::ostream& out, std::ostream& err) {
  try {
    spec.solver.check();
    if (spec.command == "validate") return run_validate(spec, out);
    if (spec.command == "deviation") return run_deviation(spec, out, err);
    if (spec.command == "defects") return run_defects(spec, out, err);
    if (spec.command == "verify-fundamental") return run_verify_fundamental(spec, out);
    if (spec.command == "conjecture") return run_conjecture(spec, out);
    if (spec.command == "catalog") return run_catalog(spec, out);
    err << "error: unknown command \"" << spec.command << "\"\n";
    return 2;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const MalformedJsonError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const UnknownGroupError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

int run(const RunSpec& spec) { return run(spec, std::cout, std::cerr); }

}  // namespace carnot

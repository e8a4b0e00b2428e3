// dcdual: command-line front end.
//
//   dcdual validate FILE
//   dcdual verify   FILE [--seeds S] [--rng R] [--samples M] [--json OUT]
//   dcdual sweep    [--n LO[:HI]] [--N LO[:HI]] [--count C] [--rng R] [--eps-list E1,E2,...] [--json OUT]
//   dcdual baseline FILE [--seeds S] [--rng R] [--json OUT]
//   dcdual chain    FILE [--seeds S] [--rng R] [--e-convention derived|statement] [--json OUT]
//
// Exit status: 0 success, 1 internal failure, 2 parse or validation failure.

#include "dcdual/dcdual.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

using namespace dcdual;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitInvalid = 2;

// Raised for problems with user input that are not instance errors.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

bool is_input_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::dimension_mismatch:
    case ErrorCode::asymmetric_matrix:
    case ErrorCode::nonpositive_gamma:
    case ErrorCode::k_minus_a_not_pd:
    case ErrorCode::coercivity_failed:
    case ErrorCode::parse_error:
    case ErrorCode::out_of_range:
      return true;
    default:
      return false;
  }
}

std::pair<int, int> parse_range(const std::string& text, const char* flag) {
  const auto colon = text.find(':');
  try {
    std::size_t used = 0;
    if (colon == std::string::npos) {
      const int v = std::stoi(text, &used);
      if (used != text.size()) throw std::invalid_argument(text);
      return {v, v};
    }
    const std::string lo_text = text.substr(0, colon);
    const std::string hi_text = text.substr(colon + 1);
    const int lo = std::stoi(lo_text, &used);
    if (used != lo_text.size()) throw std::invalid_argument(text);
    const int hi = std::stoi(hi_text, &used);
    if (used != hi_text.size()) throw std::invalid_argument(text);
    return {lo, hi};
  } catch (const std::logic_error&) {
    throw UsageError(std::string(flag) + " expects an integer or LO:HI, got '" + text + "'");
  }
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      throw UsageError("--eps-list expects comma-separated numbers, got '" + item + "'");
    }
  }
  return out;
}

void write_json(const std::string& path, const json& doc) {
  if (path.empty()) return;
  if (path == "-") {
    std::cout << doc.dump(2) << "\n";
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << doc.dump(2) << "\n";
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

std::string vec_text(const Vector& v) {
  std::string s = "[";
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += fmt("%.6g", v(i));
  }
  return s + "]";
}

std::string opt_text(const std::optional<double>& v) { return v ? fmt("%.2e", *v) : std::string("-"); }

// ---------------------------------------------------------------------------

int cmd_validate(const std::string& path, const std::string& json_path, std::ostream& out) {
  const ProblemInstance p = validate_instance(read_instance_file(path));
  const CoercivityCheck& c = p.coercivity();
  out << "ok: n=" << p.n() << " N=" << p.N() << "\n";
  out << "  lambda_min(K - A)   " << fmt("%.6g", p.k_minus_a_margin()) << "\n";
  out << "  coercivity          " << (c.overridden ? "overridden" : (c.passed ? "passed" : "failed")) << " ("
      << c.directions << " directions, min leading term " << fmt("%.3g", c.min_leading_value) << ")\n";
  out << "  digest              " << instance_digest(p) << "\n";
  write_json(json_path, {{"tool", "dcdual"},
                         {"version", kToolVersion},
                         {"valid", true},
                         {"instance_digest", instance_digest(p)},
                         {"n", p.n()},
                         {"N", p.N()},
                         {"k_minus_a_margin", p.k_minus_a_margin()},
                         {"instance", instance_json(p)}});
  return kExitOk;
}

void print_verify_table(const VerifyResult& v, std::ostream& out) {
  out << "instance " << v.digest << "  n=" << v.n << " N=" << v.N << "  seeds=" << v.options.seeds
      << " rng=" << v.options.rng << " samples=" << v.options.samples << "\n";
  out << "critical points: " << v.points.size() << " (" << v.dropped_starts << " starts dropped)\n";
  if (v.points.empty()) return;
  char line[256];
  std::snprintf(line, sizeof line, "%3s  %-13s %14s %10s %10s %10s %5s %7s %7s  %s\n", "#", "case", "J(x0)", "gap",
                "chain", "fd", "A*", "viol", "cert", "x0");
  out << line;
  int idx = 0;
  for (const PointRecord& r : v.points) {
    const ProbeEvidence& ev = r.report.probe;
    const std::string viol =
        ev.ran ? std::to_string(ev.primal_violations) + "/" + std::to_string(ev.dual_violations) : "-";
    const std::string cert = r.certificate ? (r.certificate->passed ? "pass" : "FAIL") : "-";
    std::snprintf(line, sizeof line, "%3d  %-13s %14.8g %10s %10s %10s %5s %7s %7s  %s\n", idx++,
                  to_string(r.report.case_id), r.primal_value, opt_text(r.gap).c_str(),
                  r.bundle ? fmt("%.2e", r.chain_residual).c_str() : "-", opt_text(r.fd_error).c_str(),
                  r.pair.in_a_star() ? "yes" : "no", viol.c_str(), cert.c_str(), vec_text(r.pair.x0).c_str());
    out << line;
  }
  const VerifySummary s = summarize(v);
  out << "gaps within tolerance: " << s.gap_ok << "/" << s.c_star_points << "  max |gap|/(1+|J|) "
      << fmt("%.2e", s.max_gap_ratio) << "  max chain " << fmt("%.2e", s.max_chain_residual) << "\n";
}

int cmd_verify(const std::string& path, const VerifyOptions& opt, const std::string& json_path, std::ostream& out) {
  if (opt.seeds < 0 || opt.samples < 0) throw UsageError("--seeds and --samples must be non-negative");
  const ProblemInstance p = validate_instance(read_instance_file(path));
  const VerifyResult v = run_verify(p, opt);
  print_verify_table(v, out);
  write_json(json_path, verify_json(v));
  return kExitOk;
}

int cmd_sweep(const EnsembleOptions& opt, const std::string& json_path, std::ostream& out) {
  const EnsembleResult e = run_ensemble(opt);
  const EnsembleSummary s = summarize(e);
  out << "instances " << s.instances << " (" << s.failed_instances << " failed validation)  n=" << opt.n_min << ":"
      << opt.n_max << " N=" << opt.N_min << ":" << opt.N_max << " rng=" << opt.rng << "\n";
  out << "critical points " << s.points << ", in C* " << s.c_star_points << "\n";
  out << "  gaps within tolerance     " << s.gap_ok << "/" << s.c_star_points << "\n";
  out << "  max |gap|/(1+|J|)         " << fmt("%.3e", s.max_gap_ratio) << "\n";
  out << "  max dual residual         " << fmt("%.3e", s.max_dual_residual) << "\n";
  out << "  max chain residual        " << fmt("%.3e", s.max_chain_residual) << "\n";
  out << "  max fd error              " << fmt("%.3e", s.max_fd_error) << " (" << s.fd_checked << " checked)\n";
  out << "  cases 1/2/3/unclassified  " << s.case_counts[0] << "/" << s.case_counts[1] << "/" << s.case_counts[2]
      << "/" << s.case_counts[3] << "\n";
  out << "  probe violations          " << s.probe_violations << " (unclassified pairs: "
      << s.unclassified_probe_violations << ")\n";
  out << "  baseline counterexamples  " << s.counterexamples.size() << "\n";
  if (s.scalar_pd_pairs > 0) {
    out << "  scalar PD agreement       " << s.scalar_pd_agreements << "/" << s.scalar_pd_pairs << "\n";
    out << "  max |alpha1| (n=N=1)      " << fmt("%.3e", s.max_scalar_alpha1) << "\n";
  }
  if (!opt.eps_list.empty()) {
    out << "  eps-sweep slopes          " << s.slopes.size() << "\n";
    for (const json& sl : s.slopes) {
      out << "    instance " << sl["instance"].get<int>() << "  slope " << fmt("%.4f", sl["slope"].get<double>())
          << "\n";
    }
  }
  write_json(json_path, ensemble_json(e));
  return kExitOk;
}

int cmd_baseline(const std::string& path, int seeds, std::uint64_t rng, const std::string& json_path,
                 std::ostream& out) {
  const ProblemInstance p = validate_instance(read_instance_file(path));
  const MultistartResult ms = multistart(p, seeds, rng);
  json points = json::array();
  char line[256];
  std::snprintf(line, sizeof line, "%3s %14s %12s %12s %9s %9s %6s  %s\n", "#", "J(x0)", "-J1*", "s_margin", "primal",
                "baseline", "match", "v0^");
  out << line;
  int idx = 0;
  for (const Vector& x : ms.points) {
    const CriticalPair pair = lift_to_dual(p, solve_primal_critical(p, x).x);
    json pj = {{"x0", vector_json(pair.x0)}, {"v0_hat", vector_json(pair.v0_hat)}};
    auto inertia_text = [](const Inertia& i) {
      return std::to_string(i.positive) + "," + std::to_string(i.negative) + "," + std::to_string(i.zero);
    };
    try {
      const BaselineReport b = correspondence_report(p, pair);
      pj["minus_j1_value"] = b.minus_j1_value;
      pj["minus_j1_gradient"] = vector_json(b.minus_j1_gradient);
      pj["minus_j1_hessian"] = matrix_rows_json(b.minus_j1_hessian);
      pj["primal_inertia"] = inertia_json(b.primal_hessian_inertia);
      pj["baseline_inertia"] = inertia_json(b.baseline_hessian_inertia);
      pj["correspondence"] = b.correspondence;
      pj["s_margin"] = b.s_margin;
      pj["scalar_pd_case"] = b.scalar_pd_case;
      std::snprintf(line, sizeof line, "%3d %14.8g %12.6g %12.4g %9s %9s %6s  %s\n", idx, primal_value(p, pair.x0),
                    b.minus_j1_value, b.s_margin, inertia_text(b.primal_hessian_inertia).c_str(),
                    inertia_text(b.baseline_hessian_inertia).c_str(), b.correspondence ? "yes" : "no",
                    vec_text(pair.v0_hat).c_str());
    } catch (const Error& e) {
      pj["error"] = e.what();
      std::snprintf(line, sizeof line, "%3d %14.8g  %s\n", idx, primal_value(p, pair.x0), e.what());
    }
    out << line;
    points.push_back(std::move(pj));
    ++idx;
  }
  write_json(json_path, {{"tool", "dcdual"},
                         {"version", kToolVersion},
                         {"instance_digest", instance_digest(p)},
                         {"settings", {{"seeds", seeds}, {"rng", rng}}},
                         {"critical_points", std::move(points)}});
  return kExitOk;
}

int cmd_chain(const std::string& path, int seeds, std::uint64_t rng, EConvention convention,
              const std::string& json_path, std::ostream& out) {
  const ProblemInstance p = validate_instance(read_instance_file(path));
  const MultistartResult ms = multistart(p, seeds, rng);
  json points = json::array();
  int idx = 0;
  for (const Vector& x : ms.points) {
    const CriticalPair pair = lift_to_dual(p, solve_primal_critical(p, x).x);
    json pj = {{"x0", vector_json(pair.x0)}, {"v_hat", vector_json(pair.v_hat)}, {"v0_hat", vector_json(pair.v0_hat)}};
    out << "point " << idx << "  x0 = " << vec_text(pair.x0) << "\n";
    try {
      const CurvatureBundle b = build_bundle(p, pair, convention);
      const double residual = verify_chain_identity(p, b);
      pj["identity_residual"] = residual;
      pj["e_condition"] = b.e_condition;
      for (const auto& [name, m] : std::initializer_list<std::pair<const char*, const Matrix*>>{
               {"M", &b.M}, {"P1", &b.P1}, {"P2", &b.P2}, {"E", &b.E}, {"E_bar", &b.E_bar}, {"H3", &b.H3},
               {"B_hat", &b.B_hat}, {"D", &b.D}, {"alpha", &b.alpha}, {"alpha1", &b.alpha1}, {"H1", &b.H1},
               {"H2", &b.H2}, {"dual_hessian", &b.dual_hessian}, {"primal_hessian", &b.primal_hessian}}) {
        pj[name] = matrix_rows_json(*m);
      }
      out << "  identity residual " << fmt("%.3e", residual) << "  cond(E) " << fmt("%.3e", b.e_condition)
          << "  |alpha1| " << fmt("%.3e", b.alpha1.norm()) << "\n";
    } catch (const Error& e) {
      pj["error"] = e.what();
      out << "  " << e.what() << "\n";
    }
    points.push_back(std::move(pj));
    ++idx;
  }
  if (ms.points.empty()) out << "no critical points\n";
  write_json(json_path, {{"tool", "dcdual"},
                         {"version", kToolVersion},
                         {"instance_digest", instance_digest(p)},
                         {"settings", {{"seeds", seeds}, {"rng", rng}, {"e_convention", to_string(convention)}}},
                         {"critical_points", std::move(points)}});
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Duality checks for quadratic-plus-squared-quadratic objectives"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  std::string file;
  std::string json_path;
  VerifyOptions vopt;
  std::string n_text = "1:4";
  std::string nn_text = "1:2";
  std::string eps_text;
  EnsembleOptions eopt;
  bool no_fd = false;
  std::string convention_text = "derived";
  const std::map<std::string, EConvention> conventions = {{"derived", EConvention::derived},
                                                          {"statement", EConvention::statement}};

  CLI::App* validate = app.add_subcommand("validate", "check an instance file against the model hypotheses");
  validate->add_option("file", file, "instance file")->required();
  validate->add_option("--json", json_path, "write a machine-readable report to this path ('-' for stdout)");

  CLI::App* verify = app.add_subcommand("verify", "find critical points and run every check on each");
  verify->add_option("file", file, "instance file")->required();
  verify->add_option("--seeds", vopt.seeds, "number of multistart seeds")->capture_default_str();
  verify->add_option("--rng", vopt.rng, "random seed")->capture_default_str();
  verify->add_option("--samples", vopt.samples, "ball samples per probe")->capture_default_str();
  verify->add_option("--fd-step", vopt.fd_step, "largest relative step of the dual Hessian finite differences")
      ->capture_default_str();
  verify->add_flag("--no-fd", no_fd, "skip the finite-difference dual Hessian check");
  verify->add_option("--json", json_path, "write the run report to this path ('-' for stdout)");

  CLI::App* sweep = app.add_subcommand("sweep", "verify a seeded ensemble of random instances");
  sweep->add_option("--n", n_text, "primal dimension, N or LO:HI")->capture_default_str();
  sweep->add_option("--N", nn_text, "number of quartic terms, N or LO:HI")->capture_default_str();
  sweep->add_option("--count", eopt.count, "number of instances")->capture_default_str();
  sweep->add_option("--rng", eopt.rng, "master random seed")->capture_default_str();
  sweep->add_option("--eps-list", eps_text, "comma-separated eps values; runs K = A + eps I per instance");
  sweep->add_option("--e-convention", convention_text, "E matrix used by the eps sweep")
      ->check(CLI::IsMember({"derived", "statement"}))
      ->capture_default_str();
  sweep->add_option("--seeds", vopt.seeds, "multistart seeds per instance")->capture_default_str();
  sweep->add_option("--samples", vopt.samples, "ball samples per probe")->capture_default_str();
  sweep->add_flag("--no-fd", no_fd, "skip the finite-difference dual Hessian check");
  sweep->add_option("--json", json_path, "write the ensemble report to this path ('-' for stdout)");

  CLI::App* baseline = app.add_subcommand("baseline", "compare against the classical dual at each critical point");
  baseline->add_option("file", file, "instance file")->required();
  baseline->add_option("--seeds", vopt.seeds, "number of multistart seeds")->capture_default_str();
  baseline->add_option("--rng", vopt.rng, "random seed")->capture_default_str();
  baseline->add_option("--json", json_path, "write the report to this path ('-' for stdout)");

  CLI::App* chain = app.add_subcommand("chain", "build the curvature chain and check its identity");
  chain->add_option("file", file, "instance file")->required();
  chain->add_option("--seeds", vopt.seeds, "number of multistart seeds")->capture_default_str();
  chain->add_option("--rng", vopt.rng, "random seed")->capture_default_str();
  chain->add_option("--e-convention", convention_text, "E matrix to assemble")
      ->check(CLI::IsMember({"derived", "statement"}))
      ->capture_default_str();
  chain->add_option("--json", json_path, "write the report to this path ('-' for stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitInvalid;
  }

  // Human output goes to stderr when the JSON document takes stdout.
  std::ostream& out = json_path == "-" ? std::cerr : std::cout;
  vopt.fd_check = !no_fd;
  try {
    if (*validate) return cmd_validate(file, json_path, out);
    if (*verify) return cmd_verify(file, vopt, json_path, out);
    if (*baseline) return cmd_baseline(file, vopt.seeds, vopt.rng, json_path, out);
    if (*chain) return cmd_chain(file, vopt.seeds, vopt.rng, conventions.at(convention_text), json_path, out);
    if (*sweep) {
      std::tie(eopt.n_min, eopt.n_max) = parse_range(n_text, "--n");
      std::tie(eopt.N_min, eopt.N_max) = parse_range(nn_text, "--N");
      if (!eps_text.empty()) eopt.eps_list = parse_list(eps_text);
      eopt.verify = vopt;
      eopt.sweep_convention = conventions.at(convention_text);
      return cmd_sweep(eopt, json_path, out);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return is_input_error(e.code()) ? kExitInvalid : kExitInternal;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}

// Verification workflows: the per-instance pipeline behind `verify`, the
// seeded random ensemble behind `sweep`, and their JSON reports.

#ifndef DCDUAL_HARNESS_HPP
#define DCDUAL_HARNESS_HPP

#include "dcdual/baseline.hpp"
#include "dcdual/gap.hpp"
#include "dcdual/io.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace dcdual {

inline constexpr const char* kToolVersion = "0.1.0";

struct VerifyOptions {
  int seeds = 32;
  std::uint64_t rng = 7;
  int samples = 1000;
  bool fd_check = true;  // finite-difference dual Hessian cross-check
  double fd_step = 1e-2;
  bool certificate = true;  // global certificate on case2 pairs
};

struct PointRecord {
  CriticalPair pair;
  double primal_value = 0.0;
  std::optional<double> gap;  // present when v0^ in C*
  std::string gap_error;
  std::optional<CurvatureBundle> bundle;
  std::string bundle_error;
  double chain_residual = 0.0;
  CaseReport report;
  std::optional<double> fd_error;  // relative Frobenius, analytic vs FD dual Hessian
  std::string fd_error_message;
  std::optional<GlobalCertificate> certificate;
  std::string certificate_error;
  std::optional<BaselineReport> baseline;
  std::string baseline_error;
};

struct VerifyResult {
  std::string digest;
  int n = 0;
  int N = 0;
  CoercivityCheck coercivity;
  VerifyOptions options;
  int dropped_starts = 0;
  std::vector<PointRecord> points;
};

/// Relative gap tolerance used throughout: |gap| <= 1e-8 (1 + |J(x0)|).
inline bool gap_within_tolerance(double gap, double primal_value) {
  return std::abs(gap) <= 1e-8 * (1.0 + std::abs(primal_value));
}

/// multistart -> lift -> bundle -> classify -> gap -> probes -> baseline.
/// Per-stage failures are recorded on the point and never abort the run.
inline VerifyResult run_verify(const ProblemInstance& p, const VerifyOptions& opt) {
  VerifyResult res;
  res.digest = instance_digest(p);
  res.n = p.n();
  res.N = p.N();
  res.coercivity = p.coercivity();
  res.options = opt;
  const MultistartResult ms = multistart(p, opt.seeds, opt.rng);
  res.dropped_starts = ms.dropped;

  for (std::size_t idx = 0; idx < ms.points.size(); ++idx) {
    PointRecord rec;
    const PrimalSolve polished = solve_primal_critical(p, ms.points[idx]);
    rec.pair = lift_to_dual(p, polished.x, polished.iterations);
    rec.primal_value = primal_value(p, rec.pair.x0);
    rec.report.primal_value = rec.primal_value;
    rec.report.c_star = rec.pair.c_star;
    rec.report.b_star = rec.pair.b_star;
    rec.report.in_a_star = rec.pair.in_a_star();

    try {
      rec.gap = verify_zero_gap(p, rec.pair);
    } catch (const Error& e) {
      rec.gap_error = e.what();
    }

    try {
      rec.bundle = build_bundle(p, rec.pair);
    } catch (const Error& e) {
      rec.bundle_error = e.what();
    }

    const std::uint64_t point_seed = opt.rng * 1000003ULL + idx + 1;
    if (rec.bundle) {
      rec.chain_residual = verify_chain_identity(p, *rec.bundle);
      rec.report = classify_case(p, rec.pair, *rec.bundle);
      if (opt.samples > 0) {
        rec.report.probe =
            local_extremality_probe(p, rec.pair, *rec.bundle, rec.report.case_id, opt.samples, point_seed);
      }
      if (opt.fd_check) {
        try {
          const FdHessian fd = dual_hessian_fd_converged(p, rec.pair, opt.fd_step);
          rec.fd_error = relative_frobenius(rec.bundle->dual_hessian, fd.hessian);
        } catch (const Error& e) {
          rec.fd_error_message = e.what();
        }
      }
    }

    if (opt.certificate && rec.pair.in_a_star()) {
      try {
        rec.certificate = global_min_certificate(p, rec.pair, ms.points, point_seed);
        rec.report.j2_convexity_checks = rec.certificate->convexity_checks;
        rec.report.j2_convexity_passed = rec.certificate->convexity_passed;
      } catch (const Error& e) {
        rec.certificate_error = e.what();
      }
    }

    try {
      rec.baseline = correspondence_report(p, rec.pair);
    } catch (const Error& e) {
      rec.baseline_error = e.what();
    }
    res.points.push_back(std::move(rec));
  }
  return res;
}

// ---------------------------------------------------------------------------
// Random ensembles

struct EnsembleOptions {
  int n_min = 1;
  int n_max = 4;
  int N_min = 1;
  int N_max = 2;
  int count = 10;
  std::uint64_t rng = 3;
  std::vector<double> eps_list;  // non-empty: run the K = A + eps I sweep per instance
  EConvention sweep_convention = EConvention::derived;
  VerifyOptions verify;
};

inline void check_ensemble_options(const EnsembleOptions& o) {
  auto bad = [](const std::string& what) { throw Error(ErrorCode::out_of_range, what); };
  if (o.n_min < 1 || o.n_max > 16 || o.n_min > o.n_max) bad("n must lie in [1, 16]");
  if (o.N_min < 1 || o.N_max > 8 || o.N_min > o.N_max) bad("N must lie in [1, 8]");
  if (o.count < 0 || o.count > 10000) bad("count must lie in [0, 10000]");
  if (o.verify.seeds < 0) bad("seeds must be non-negative");
  if (o.verify.samples < 0) bad("samples must be non-negative");
}

/// Symmetric Gaussian matrix scaled to unit spectral radius.
inline Matrix random_symmetric(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix g(n, n);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n; ++k) g(i, k) = normal(rng);
  }
  Matrix s = 0.5 * (g + g.transpose());
  const auto [lo, hi] = eigen_range(s);
  const double radius = std::max(std::abs(lo), std::abs(hi));
  if (radius > 0.0) s /= radius;
  return s;
}

/// gamma_j in [0.5, 2], c_j in [-1, 1], f standard normal,
/// K = (lambda_max(A) + 1 + u) I with u in [0.1, 1].
inline RawInstance random_instance(std::uint64_t seed, int n, int N) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> gamma_dist(0.5, 2.0);
  std::uniform_real_distribution<double> c_dist(-1.0, 1.0);
  std::uniform_real_distribution<double> k_dist(0.1, 1.0);
  RawInstance raw;
  raw.n = n;
  raw.N = N;
  raw.A = random_symmetric(rng, n);
  for (int j = 0; j < N; ++j) raw.B.push_back(random_symmetric(rng, n));
  raw.gamma.resize(N);
  raw.c.resize(N);
  for (int j = 0; j < N; ++j) raw.gamma(j) = gamma_dist(rng);
  for (int j = 0; j < N; ++j) raw.c(j) = c_dist(rng);
  raw.f.resize(n);
  for (int i = 0; i < n; ++i) raw.f(i) = normal(rng);
  raw.set_scalar_k(eigen_range(raw.A).second + 1.0 + k_dist(rng));
  return raw;
}

/// Seed of instance `index` in an ensemble drawn with master seed `rng`.
inline std::uint64_t instance_seed(std::uint64_t rng, int index) {
  std::seed_seq seq{static_cast<std::uint32_t>(rng & 0xffffffffULL), static_cast<std::uint32_t>(rng >> 32),
                    static_cast<std::uint32_t>(index)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

struct EnsembleMember {
  int index = 0;
  std::uint64_t seed = 0;
  int n = 0;
  int N = 0;
  std::string error;  // generation or validation failure
  std::optional<VerifyResult> verify;
  std::optional<SweepReport> sweep;
};

struct EnsembleResult {
  EnsembleOptions options;
  std::vector<EnsembleMember> members;
};

inline EnsembleResult run_ensemble(const EnsembleOptions& opt) {
  check_ensemble_options(opt);
  EnsembleResult out;
  out.options = opt;
  std::mt19937_64 dims(opt.rng);
  std::uniform_int_distribution<int> n_dist(opt.n_min, opt.n_max);
  std::uniform_int_distribution<int> nn_dist(opt.N_min, opt.N_max);
  for (int i = 0; i < opt.count; ++i) {
    EnsembleMember m;
    m.index = i;
    m.seed = instance_seed(opt.rng, i);
    m.n = n_dist(dims);
    m.N = nn_dist(dims);
    try {
      const ProblemInstance p = validate_instance(random_instance(m.seed, m.n, m.N));
      VerifyOptions vo = opt.verify;
      vo.rng = m.seed;
      m.verify = run_verify(p, vo);
      if (!opt.eps_list.empty()) m.sweep = epsilon_sweep(p, opt.eps_list, vo.seeds, vo.rng, opt.sweep_convention);
    } catch (const Error& e) {
      m.error = e.what();
    }
    out.members.push_back(std::move(m));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Reports

inline json membership_json(const Membership& m) { return {{"holds", m.holds}, {"margin", m.margin}}; }

inline json definiteness_json(const Definiteness& d) {
  return {{"holds", d.holds}, {"margin", d.margin}, {"tolerance", d.tolerance}};
}

inline json inertia_json(const Inertia& i) {
  return {{"positive", i.positive}, {"negative", i.negative}, {"zero", i.zero}};
}

inline json nullable(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json point_json(const PointRecord& r) {
  json j;
  const CriticalPair& p = r.pair;
  j["x0"] = vector_json(p.x0);
  j["v_hat"] = vector_json(p.v_hat);
  j["v0_hat"] = vector_json(p.v0_hat);
  j["J"] = r.primal_value;
  j["residuals"] = {{"primal", p.primal_residual},
                    {"dual_vstar", nullable(p.dual_residual_vstar)},
                    {"dual_v0", nullable(p.dual_residual_v0)},
                    {"lift_identity", p.lift_identity_residual},
                    {"lift_identity_checked", p.lift_identity_checked}};
  j["newton_iterations"] = p.newton_iterations;
  j["membership"] = {{"c_star", membership_json(p.c_star)},
                     {"b_star", membership_json(p.b_star)},
                     {"a_star", p.in_a_star()}};
  j["gap"] = r.gap ? json(*r.gap) : json(nullptr);
  if (!r.gap_error.empty()) j["gap_error"] = r.gap_error;
  j["case"] = to_string(r.report.case_id);
  if (r.bundle) {
    const CurvatureBundle& b = *r.bundle;
    j["chain"] = {{"residual", r.chain_residual},
                  {"e_condition", b.e_condition},
                  {"dual_hessian", matrix_rows_json(b.dual_hessian)},
                  {"dual_hessian_asymmetry", b.dual_hessian_asymmetry},
                  {"alpha1_norm", b.alpha1.norm()},
                  {"h1_margin", b.h1_margin},
                  {"h2_margin", b.h2_margin},
                  {"d_spectral_margin", b.d_spectral_margin}};
    j["hessian_margins"] = {{"primal_pd", definiteness_json(r.report.primal_hessian_pd)},
                            {"primal_nd", definiteness_json(r.report.primal_hessian_nd)},
                            {"corrected_pd", definiteness_json(r.report.corrected_hessian_pd)},
                            {"corrected_nd", definiteness_json(r.report.corrected_hessian_nd)}};
  } else {
    j["bundle_error"] = r.bundle_error;
  }
  if (r.fd_error) j["dual_hessian_fd_error"] = *r.fd_error;
  if (!r.fd_error_message.empty()) j["dual_hessian_fd_failure"] = r.fd_error_message;
  const ProbeEvidence& ev = r.report.probe;
  if (ev.ran) {
    j["probe"] = {{"r", ev.r},
                  {"r1", ev.r1},
                  {"samples", ev.samples},
                  {"expects", ev.expects_minimum ? "minimum" : "maximum"},
                  {"primal_violations", ev.primal_violations},
                  {"dual_violations", ev.dual_violations},
                  {"dual_evaluated", ev.dual_evaluated},
                  {"dual_excluded", ev.dual_excluded}};
  }
  if (r.certificate) {
    const GlobalCertificate& c = *r.certificate;
    j["global_certificate"] = {{"passed", c.passed},
                               {"below_all_samples", c.below_all_samples},
                               {"sampled_min", c.sampled_min},
                               {"sampled_points", c.sampled_points},
                               {"grid_half_width", c.grid_half_width},
                               {"critical_points_checked", c.critical_points_checked},
                               {"j2_value", c.j2_value},
                               {"j2_error", c.j2_error},
                               {"j2_matches", c.j2_matches},
                               {"j2_boundary", c.j2_boundary},
                               {"convexity_checks", c.convexity_checks},
                               {"convexity_passed", c.convexity_passed},
                               {"convexity_skipped", c.convexity_skipped},
                               {"weak_duality", c.weak_duality}};
  }
  if (!r.certificate_error.empty()) j["global_certificate_error"] = r.certificate_error;
  if (r.baseline) {
    const BaselineReport& b = *r.baseline;
    j["baseline"] = {{"minus_j1_value", b.minus_j1_value},
                     {"minus_j1_gradient", vector_json(b.minus_j1_gradient)},
                     {"minus_j1_hessian", matrix_rows_json(b.minus_j1_hessian)},
                     {"primal_inertia", inertia_json(b.primal_hessian_inertia)},
                     {"baseline_inertia", inertia_json(b.baseline_hessian_inertia)},
                     {"correspondence", b.correspondence},
                     {"s_margin", b.s_margin},
                     {"scalar_pd_case", b.scalar_pd_case}};
  } else {
    j["baseline_error"] = r.baseline_error;
  }
  return j;
}

struct VerifySummary {
  int points = 0;
  int c_star_points = 0;
  int gap_ok = 0;
  double max_gap_ratio = 0.0;  // max |gap| / (1 + |J|)
  double max_chain_residual = 0.0;
  double max_dual_residual = 0.0;
  double max_fd_error = 0.0;
  int case_counts[4] = {0, 0, 0, 0};
  int probe_violations = 0;               // on case1/case2/case3 pairs
  int unclassified_probe_violations = 0;  // saddles and degenerate pairs, expected
};

inline VerifySummary summarize(const VerifyResult& v) {
  VerifySummary s;
  for (const PointRecord& r : v.points) {
    ++s.points;
    ++s.case_counts[static_cast<int>(r.report.case_id)];
    if (r.gap) {
      ++s.c_star_points;
      const double ratio = std::abs(*r.gap) / (1.0 + std::abs(r.primal_value));
      s.max_gap_ratio = std::max(s.max_gap_ratio, ratio);
      if (gap_within_tolerance(*r.gap, r.primal_value)) ++s.gap_ok;
    }
    if (r.bundle) s.max_chain_residual = std::max(s.max_chain_residual, r.chain_residual);
    if (std::isfinite(r.pair.dual_residual_vstar)) {
      s.max_dual_residual = std::max({s.max_dual_residual, r.pair.dual_residual_vstar, r.pair.dual_residual_v0});
    }
    if (r.fd_error) s.max_fd_error = std::max(s.max_fd_error, *r.fd_error);
    const int violations = r.report.probe.primal_violations + r.report.probe.dual_violations;
    if (r.report.case_id == CaseId::unclassified) {
      s.unclassified_probe_violations += violations;
    } else {
      s.probe_violations += violations;
    }
  }
  return s;
}

inline json summary_json(const VerifySummary& s) {
  return {{"points", s.points},
          {"c_star_points", s.c_star_points},
          {"gap_ok", s.gap_ok},
          {"max_gap_ratio", s.max_gap_ratio},
          {"max_chain_residual", s.max_chain_residual},
          {"max_dual_residual", s.max_dual_residual},
          {"max_fd_error", s.max_fd_error},
          {"cases",
           {{"case1", s.case_counts[0]},
            {"case2", s.case_counts[1]},
            {"case3", s.case_counts[2]},
            {"unclassified", s.case_counts[3]}}},
          {"probe_violations", s.probe_violations},
          {"unclassified_probe_violations", s.unclassified_probe_violations}};
}

inline json verify_json(const VerifyResult& v) {
  json j;
  j["tool"] = "dcdual";
  j["version"] = kToolVersion;
  j["instance_digest"] = v.digest;
  j["n"] = v.n;
  j["N"] = v.N;
  j["coercivity"] = {{"directions", v.coercivity.directions},
                     {"min_leading_value", v.coercivity.min_leading_value},
                     {"passed", v.coercivity.passed},
                     {"overridden", v.coercivity.overridden}};
  j["settings"] = {{"seeds", v.options.seeds},
                   {"rng", v.options.rng},
                   {"samples", v.options.samples},
                   {"fd_step", v.options.fd_step}};
  j["dropped_starts"] = v.dropped_starts;
  json pts = json::array();
  for (const PointRecord& r : v.points) pts.push_back(point_json(r));
  j["critical_points"] = std::move(pts);
  j["summary"] = summary_json(summarize(v));
  return j;
}

inline json sweep_json(const SweepReport& s) {
  json j;
  j["e_convention"] = to_string(s.convention);
  j["eps"] = s.eps;
  j["eps_errors"] = s.eps_errors;
  json tracks = json::array();
  for (const SweepTrack& t : s.tracks) {
    json tj;
    tj["x0"] = vector_json(t.x0);
    tj["alpha1_nonzero"] = t.alpha1_nonzero;
    tj["slope"] = t.slope ? json(*t.slope) : json(nullptr);
    json recs = json::array();
    for (const SweepRecord& r : t.records) {
      json rj = {{"eps", r.eps}, {"ok", r.ok}};
      if (r.ok) {
        rj["alpha1_norm"] = r.alpha1_norm;
        rj["scaled_alpha1_norm"] = r.scaled_alpha1_norm;
        rj["gap"] = r.gap;
        rj["chain_residual"] = r.chain_residual;
        rj["h1_norm"] = r.h1_norm;
        rj["h1_condition"] = r.h1_condition;
      } else {
        rj["error"] = r.error;
      }
      recs.push_back(std::move(rj));
    }
    tj["records"] = std::move(recs);
    tracks.push_back(std::move(tj));
  }
  j["tracks"] = std::move(tracks);
  return j;
}

/// Aggregate statistics of an ensemble, including baseline counterexamples.
struct EnsembleSummary {
  int instances = 0;
  int failed_instances = 0;
  int points = 0;
  int c_star_points = 0;
  int gap_ok = 0;
  double max_gap_ratio = 0.0;
  double max_chain_residual = 0.0;
  double max_dual_residual = 0.0;
  double max_fd_error = 0.0;
  int fd_checked = 0;
  double max_scalar_alpha1 = 0.0;  // over n = N = 1 bundles
  int case_counts[4] = {0, 0, 0, 0};
  int probe_violations = 0;
  int unclassified_probe_violations = 0;
  int scalar_pd_pairs = 0;
  int scalar_pd_agreements = 0;
  json counterexamples = json::array();
  json slopes = json::array();
};

inline EnsembleSummary summarize(const EnsembleResult& e) {
  EnsembleSummary s;
  for (const EnsembleMember& m : e.members) {
    ++s.instances;
    if (!m.verify) {
      ++s.failed_instances;
      continue;
    }
    const VerifySummary v = summarize(*m.verify);
    s.points += v.points;
    s.c_star_points += v.c_star_points;
    s.gap_ok += v.gap_ok;
    s.max_gap_ratio = std::max(s.max_gap_ratio, v.max_gap_ratio);
    s.max_chain_residual = std::max(s.max_chain_residual, v.max_chain_residual);
    s.max_dual_residual = std::max(s.max_dual_residual, v.max_dual_residual);
    s.max_fd_error = std::max(s.max_fd_error, v.max_fd_error);
    s.probe_violations += v.probe_violations;
    s.unclassified_probe_violations += v.unclassified_probe_violations;
    for (int c = 0; c < 4; ++c) s.case_counts[c] += v.case_counts[c];
    for (const PointRecord& r : m.verify->points) {
      if (r.fd_error) ++s.fd_checked;
      if (m.n == 1 && m.N == 1 && r.bundle) s.max_scalar_alpha1 = std::max(s.max_scalar_alpha1, r.bundle->alpha1.norm());
      if (!r.baseline) continue;
      if (r.baseline->scalar_pd_case) {
        ++s.scalar_pd_pairs;
        if (r.baseline->correspondence) ++s.scalar_pd_agreements;
      }
      if (!r.baseline->correspondence) {
        s.counterexamples.push_back({{"instance", m.index},
                                     {"seed", m.seed},
                                     {"n", m.n},
                                     {"N", m.N},
                                     {"x0", vector_json(r.pair.x0)},
                                     {"s_margin", r.baseline->s_margin}});
      }
    }
    if (m.sweep) {
      for (const SweepTrack& t : m.sweep->tracks) {
        if (t.slope) s.slopes.push_back({{"instance", m.index}, {"seed", m.seed}, {"slope", *t.slope}});
      }
    }
  }
  return s;
}

inline json ensemble_json(const EnsembleResult& e, bool include_members = true) {
  const EnsembleSummary s = summarize(e);
  json j;
  j["tool"] = "dcdual";
  j["version"] = kToolVersion;
  j["settings"] = {{"n", {e.options.n_min, e.options.n_max}},
                   {"N", {e.options.N_min, e.options.N_max}},
                   {"count", e.options.count},
                   {"rng", e.options.rng},
                   {"eps_list", e.options.eps_list},
                   {"e_convention", to_string(e.options.sweep_convention)},
                   {"seeds", e.options.verify.seeds},
                   {"samples", e.options.verify.samples}};
  j["summary"] = {{"instances", s.instances},
                  {"failed_instances", s.failed_instances},
                  {"points", s.points},
                  {"c_star_points", s.c_star_points},
                  {"gap_ok", s.gap_ok},
                  {"max_gap_ratio", s.max_gap_ratio},
                  {"max_chain_residual", s.max_chain_residual},
                  {"max_dual_residual", s.max_dual_residual},
                  {"max_fd_error", s.max_fd_error},
                  {"fd_checked", s.fd_checked},
                  {"max_scalar_alpha1", s.max_scalar_alpha1},
                  {"cases",
                   {{"case1", s.case_counts[0]},
                    {"case2", s.case_counts[1]},
                    {"case3", s.case_counts[2]},
                    {"unclassified", s.case_counts[3]}}},
                  {"probe_violations", s.probe_violations},
                  {"unclassified_probe_violations", s.unclassified_probe_violations},
                  {"scalar_pd_pairs", s.scalar_pd_pairs},
                  {"scalar_pd_agreements", s.scalar_pd_agreements},
                  {"counterexamples", s.counterexamples},
                  {"slopes", s.slopes}};
  if (include_members) {
    json members = json::array();
    for (const EnsembleMember& m : e.members) {
      json mj = {{"index", m.index}, {"seed", m.seed}, {"n", m.n}, {"N", m.N}};
      if (!m.error.empty()) mj["error"] = m.error;
      if (m.verify) mj["verify"] = verify_json(*m.verify);
      if (m.sweep) mj["eps_sweep"] = sweep_json(*m.sweep);
      members.push_back(std::move(mj));
    }
    j["members"] = std::move(members);
  }
  return j;
}

}  // namespace dcdual

#endif  // DCDUAL_HARNESS_HPP

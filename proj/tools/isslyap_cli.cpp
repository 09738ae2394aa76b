#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "isslyap/analysis.hpp"
#include "isslyap/io.hpp"
#include "isslyap/selftest.hpp"

using namespace isslyap;

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kInfeasible = 3;
constexpr int kViolation = 4;

struct CommonOptions {
  std::string model;
  std::string config;
  std::vector<Index> modes;
  std::vector<double> gammas;
  std::string q;
  std::optional<double> horizon;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
  std::optional<double> epsilon;
  std::optional<double> delta_override;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--model", o.model, "zoo model: heat-dirichlet, heat-neumann, counterexample");
  cmd->add_option("--config", o.config, "JSON config file");
  cmd->add_option("--modes", o.modes, "mode counts N, e.g. --modes 16,64,256")->delimiter(',');
  cmd->add_option("--gamma", o.gammas, "extrapolation exponents")->delimiter(',');
  cmd->add_option("--q", o.q, "input exponent: 1, 2 or inf");
  cmd->add_option("--horizon", o.horizon, "time horizon T");
  cmd->add_option("--seed", o.seed, "random seed");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--epsilon", o.epsilon, "right-hand side scale in A^T P + P A = -eps I");
  cmd->add_option("--delta-override", o.delta_override, "decay rate used for the stability bound");
}

AnalysisConfig build_config(const CommonOptions& o) {
  AnalysisConfig c;
  if (!o.config.empty()) c = config_from_json(io::read_json_file(o.config));
  if (!o.model.empty()) c.system = io::parse_system_spec(io::json(o.model));
  if (!o.modes.empty()) c.modes = o.modes;
  if (!o.gammas.empty()) c.gammas = o.gammas;
  if (!o.q.empty()) c.q = parse_input_exponent(o.q);
  if (o.horizon) c.horizon = *o.horizon;
  if (o.seed) c.seed = *o.seed;
  if (o.epsilon) c.epsilon = *o.epsilon;
  if (o.delta_override) c.delta_override = o.delta_override;
  c.out_dir = o.out;
  validate(c);
  return c;
}

int cmd_analyze(const CommonOptions& o) {
  const AnalysisConfig cfg = build_config(o);
  const ImplicationReport r = analyze(cfg);
  std::printf("system %s\n", r.system.c_str());
  for (const Slot& s : r.slots) std::printf("  slot %-26s %s\n", s.name.c_str(), s.verdict.c_str());
  for (const Edge& e : r.edges) std::printf("  edge %-36s %s\n", e.id.c_str(), e.status.c_str());
  std::printf("wrote %s/report.json, trends.csv, trajectories.csv\n", cfg.out_dir.c_str());
  return r.exit_code();
}

int cmd_simulate(const CommonOptions& o) {
  const AnalysisConfig cfg = build_config(o);
  std::filesystem::create_directories(cfg.out_dir);
  std::vector<Trajectory> runs;
  if (io::is_spectral(cfg.system)) {
    runs = gain_ensemble(io::spectral_truncation(cfg.system, cfg.modes.front()), cfg.horizon, cfg.trajectory_nodes,
                         cfg.seed);
  } else {
    runs = gain_ensemble(io::matrix_system_of(cfg.system), cfg.horizon, cfg.trajectory_nodes, cfg.seed);
  }
  for (std::size_t k = 0; k < runs.size(); ++k) {
    detail::write_trajectory(cfg.out_dir + "/trajectory_" + std::to_string(k) + ".csv", runs[k]);
  }
  const GainEnvelope g = iss_gain_fit(runs);
  io::json j{{"schema", "1"},
             {"provenance", prov::kGainFit},
             {"overshoot", io::number(g.overshoot)},
             {"rate", io::number(g.rate)},
             {"gain", io::number(g.gain)},
             {"worst_ratio", io::number(g.worst_ratio)},
             {"certified", g.certified},
             {"not_iss", g.not_iss},
             {"runs", runs.size()}};
  io::write_json_file(cfg.out_dir + "/gain.json", j);
  std::printf("M=%s omega=%s g=%s certified=%s\n", io::format_double(g.overshoot).c_str(),
              io::format_double(g.rate).c_str(), io::format_double(g.gain).c_str(), g.certified ? "yes" : "no");
  return g.certified && !g.not_iss ? kOk : kInfeasible;
}

int cmd_admissibility_scan(const CommonOptions& o) {
  const AnalysisConfig cfg = build_config(o);
  if (!io::is_spectral(cfg.system)) throw InvalidArgument("admissibility-scan needs a spectral system");
  std::filesystem::create_directories(cfg.out_dir);
  const SystemFamily family = io::family_of(cfg.system);
  const std::string name = io::spec_label(cfg.system);
  io::CsvWriter csv(cfg.out_dir + "/trends.csv");
  csv.row(std::vector<std::string>{"system", "label", "quantity", "gamma_or_q", "N", "T", "value"});
  io::json j{{"schema", "1"}, {"system", name}};
  io::json scans = io::json::array();
  if (cfg.modes.size() >= 3) {
    for (double g : cfg.gammas) {
      const auto rep = operator_class_scan(family, cfg.modes, g, cfg.thresholds);
      for (const auto& p : rep.norms_by_modes) csv.row(name, name, "extrapolation_norm", g, p.modes, "", p.norm);
      scans.push_back({{"gamma", g},
                       {"verdict", to_string(rep.verdict)},
                       {"growth_exponent", rep.growth_exponent},
                       {"provenance", prov::kClassScan}});
      std::printf("gamma=%s %s\n", io::format_double(g).c_str(), to_string(rep.verdict));
    }
  }
  const std::vector<double> horizons{cfg.horizon};
  const auto est = admissibility_trend(family, cfg.q, cfg.modes, horizons, cfg.segment_length, cfg.thresholds);
  for (const auto& p : est.trend) csv.row(name, name, "admissibility_constant", to_string(cfg.q), p.modes, p.horizon, p.constant);
  const IssVerdict v = l2_iss_verdict(family(cfg.modes.back()), est);
  j["scans"] = scans;
  j["admissibility"] = {{"q", to_string(cfg.q)},
                        {"verdict", to_string(est.verdict)},
                        {"constant", io::number(est.constant)},
                        {"exact", est.exact},
                        {"provenance", prov::kAdmissibility}};
  j["iss"] = {{"status", to_string(v.status)}, {"reasons", v.reasons}, {"provenance", prov::kIssCriterion}};
  io::write_json_file(cfg.out_dir + "/scan.json", j);
  std::printf("q=%s K=%s %s; %s\n", to_string(cfg.q), io::format_double(est.constant).c_str(), to_string(est.verdict),
              to_string(v.status));
  return kOk;
}

int cmd_lyapunov_eval(const CommonOptions& o, const std::string& form_kind, double form_q) {
  const AnalysisConfig cfg = build_config(o);
  std::filesystem::create_directories(cfg.out_dir);
  auto run = [&](const auto& sys) {
    std::optional<QuadraticForm> form;
    if (form_kind == "v-half") {
      form = build_v_half(sys);
    } else if (form_kind == "w-q") {
      form = build_w_q(sys, form_q);
    } else if (form_kind == "half-norm") {
      form = build_half_norm(sys);
    } else {
      throw InvalidArgument("unknown form '" + form_kind + "' (v-half, w-q, half-norm)");
    }
    const auto rep = fit_dissipation(*form, sys, default_cloud(sys.dimension(), cfg.seed, cfg.cloud_size));
    io::json j{{"schema", "1"},
               {"form", io::to_json(*form)},
               {"a1", io::number(rep.a1)},
               {"a2", io::number(rep.a2)},
               {"a3", io::number(rep.a3)},
               {"a4", io::number(rep.a4)},
               {"violations", rep.violations},
               {"infeasible_reason", rep.infeasible_reason},
               {"feasible", rep.feasible},
               {"provenance", rep.provenance}};
    io::write_json_file(cfg.out_dir + "/lyapunov.json", j);
    std::printf("a1=%s a2=%s a3=%s a4=%s %s\n", io::format_double(rep.a1).c_str(), io::format_double(rep.a2).c_str(),
                io::format_double(rep.a3).c_str(), io::format_double(rep.a4).c_str(),
                rep.feasible ? "feasible" : "infeasible");
    return rep.feasible ? kOk : kInfeasible;
  };
  if (io::is_spectral(cfg.system)) return run(io::spectral_truncation(cfg.system, cfg.modes.front()));
  return run(io::matrix_system_of(cfg.system));
}

int cmd_selftest(std::uint64_t seed, const std::string& fault) {
  const auto results = run_selftest(seed, fault);
  bool ok = true;
  for (const auto& r : results) {
    std::printf("%s %s: %s\n", r.passed ? "PASS" : "FAIL", r.name.c_str(), r.detail.c_str());
    ok = ok && r.passed;
  }
  std::printf("%s\n", ok ? "all invariants hold" : "invariant failure");
  return ok ? kOk : kViolation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ISS Lyapunov and admissibility analysis for linear systems with boundary input"};
  app.require_subcommand(1);

  CommonOptions analyze_opts, simulate_opts, scan_opts, eval_opts;
  auto* analyze_cmd = app.add_subcommand("analyze", "implication report: scans, admissibility, certificates");
  add_common(analyze_cmd, analyze_opts);
  auto* simulate_cmd = app.add_subcommand("simulate", "trajectory CSVs and an ISS gain envelope");
  add_common(simulate_cmd, simulate_opts);
  auto* scan_cmd = app.add_subcommand("admissibility-scan", "extrapolation-space scans and admissibility trend");
  add_common(scan_cmd, scan_opts);
  auto* eval_cmd = app.add_subcommand("lyapunov-eval", "build a quadratic form and fit its dissipation inequality");
  add_common(eval_cmd, eval_opts);
  std::string form_kind = "v-half";
  double form_q = 0.5;
  eval_cmd->add_option("--form", form_kind, "v-half, w-q or half-norm");
  eval_cmd->add_option("--form-q", form_q, "exponent q of W_q");

  auto* self_cmd = app.add_subcommand("selftest", "run the invariant suite");
  std::uint64_t self_seed = 1;
  std::string fault;
  self_cmd->add_option("--seed", self_seed, "random seed");
  self_cmd->add_option("--inject-fault", fault, "deliberately break one check: corrupt-weight");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  try {
    if (*analyze_cmd) return cmd_analyze(analyze_opts);
    if (*simulate_cmd) return cmd_simulate(simulate_opts);
    if (*scan_cmd) return cmd_admissibility_scan(scan_opts);
    if (*eval_cmd) return cmd_lyapunov_eval(eval_opts, form_kind, form_q);
    if (*self_cmd) return cmd_selftest(self_seed, fault);
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfigError;
  } catch (const ParseError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfigError;
  } catch (const OverflowRefusal& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfigError;
  } catch (const nlohmann::json::exception& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfigError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return kOk;
}

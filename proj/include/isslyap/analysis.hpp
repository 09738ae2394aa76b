#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "isslyap/admissibility.hpp"
#include "isslyap/dissipation.hpp"
#include "isslyap/io.hpp"
#include "isslyap/lyapunov.hpp"
#include "isslyap/model_zoo.hpp"
#include "isslyap/operator_core.hpp"

namespace isslyap {

struct AnalysisConfig {
  io::SystemSpec system = io::ModelRef{"heat-neumann"};
  std::vector<Index> modes{16, 64, 256};
  std::vector<double> gammas{0.25, 0.4, 0.5, 0.75, 0.95, 1.0};
  InputExponent q = InputExponent::two;
  double horizon = 10.0;
  double segment_length = 0.1;
  std::uint64_t seed = 1;
  double epsilon = 1.0;
  std::optional<double> delta_override;
  TrendThresholds thresholds;
  int cloud_size = 50;
  int similarity_samples = 200;
  int trajectory_nodes = 201;
  std::string out_dir;  // empty: nothing written
};

/// Keys mirror AnalysisConfig; "system" is a model name or an inline system.
inline AnalysisConfig config_from_json(const io::json& j) {
  AnalysisConfig c;
  if (!j.is_object()) throw InvalidArgument("config: expected a JSON object");
  if (j.contains("system")) c.system = io::parse_system_spec(j["system"]);
  if (j.contains("model")) c.system = io::parse_system_spec(j["model"]);
  if (j.contains("modes")) {
    const auto& m = j["modes"];
    if (m.is_number_integer()) {
      c.modes = {m.get<Index>()};
    } else {
      c.modes = m.get<std::vector<Index>>();
    }
  }
  if (j.contains("gammas")) c.gammas = j["gammas"].get<std::vector<double>>();
  if (j.contains("q")) c.q = parse_input_exponent(j["q"].is_string() ? j["q"].get<std::string>() : j["q"].dump());
  c.horizon = j.value("horizon", c.horizon);
  c.segment_length = j.value("segment_length", c.segment_length);
  c.seed = j.value("seed", c.seed);
  c.epsilon = j.value("epsilon", c.epsilon);
  if (j.contains("delta_override") && !j["delta_override"].is_null()) c.delta_override = j["delta_override"].get<double>();
  if (j.contains("thresholds")) {
    c.thresholds.slope = j["thresholds"].value("slope", c.thresholds.slope);
    c.thresholds.ratio = j["thresholds"].value("ratio", c.thresholds.ratio);
  }
  c.cloud_size = j.value("cloud_size", c.cloud_size);
  c.similarity_samples = j.value("similarity_samples", c.similarity_samples);
  c.out_dir = j.value("out", c.out_dir);
  return c;
}

inline void validate(const AnalysisConfig& c) {
  if (c.modes.empty()) throw InvalidArgument("config: modes list is empty");
  for (Index n : c.modes) {
    if (n < 1) throw InvalidArgument("config: modes must be >= 1");
  }
  if (!std::is_sorted(c.modes.begin(), c.modes.end()) ||
      std::adjacent_find(c.modes.begin(), c.modes.end()) != c.modes.end()) {
    throw InvalidArgument("config: modes must be strictly increasing");
  }
  for (double g : c.gammas) {
    if (!(g >= 0.0)) throw InvalidArgument("config: gammas must be >= 0");
  }
  if (!(c.horizon > 0.0)) throw InvalidArgument("config: horizon must be positive");
  if (!(c.segment_length > 0.0)) throw InvalidArgument("config: segment_length must be positive");
  if (!(c.epsilon > 0.0)) throw InvalidArgument("config: epsilon must be positive");
  if (c.delta_override && !(*c.delta_override > 0.0)) throw InvalidArgument("config: delta_override must be positive");
  if (c.cloud_size < 1 || c.similarity_samples < 1 || c.trajectory_nodes < 2) {
    throw InvalidArgument("config: sample counts must be positive");
  }
}

/// Three-valued truth for slots that are read off finite-N trends.
enum class Truth { yes, no, unknown };

inline const char* to_string(Truth t) {
  switch (t) {
    case Truth::yes: return "yes";
    case Truth::no: return "no";
    case Truth::unknown: return "unknown";
  }
  return "unknown";
}

inline Truth truth_of(Verdict v) {
  return v == Verdict::bounded ? Truth::yes : v == Verdict::diverging ? Truth::no : Truth::unknown;
}

inline Truth all_of(std::initializer_list<Truth> ts) {
  bool unknown = false;
  for (Truth t : ts) {
    if (t == Truth::no) return Truth::no;
    if (t == Truth::unknown) unknown = true;
  }
  return unknown ? Truth::unknown : Truth::yes;
}

struct Slot {
  std::string name;
  std::string verdict;
  Truth truth = Truth::unknown;
  std::string provenance;
  io::json detail = io::json::object();
};

enum class EdgeKind { implication, non_implication };

struct Edge {
  std::string id;
  std::string statement;
  EdgeKind kind = EdgeKind::implication;
  std::string status;  // holds | vacuous | violated | inconclusive | witnessed | not-witnessed | not checkable at finite N
  std::string provenance;
  std::string reason;
};

struct ImplicationReport {
  std::string system;
  std::string kind;  // spectral | matrix
  std::vector<Index> modes;
  std::uint64_t seed = 0;
  std::vector<Slot> slots;
  std::vector<Edge> edges;
  bool violated = false;
  bool infeasible_finding = false;

  const Slot& slot(std::string_view name) const {
    for (const Slot& s : slots) {
      if (s.name == name) return s;
    }
    throw InvalidArgument("report has no slot '" + std::string(name) + "'");
  }
  const Edge& edge(std::string_view id) const {
    for (const Edge& e : edges) {
      if (e.id == id) return e;
    }
    throw InvalidArgument("report has no edge '" + std::string(id) + "'");
  }
  int exit_code() const { return violated ? 4 : infeasible_finding ? 3 : 0; }
};

inline io::json to_json(const ImplicationReport& r) {
  io::json j;
  j["schema"] = "1";
  j["system"] = {{"value", r.system}, {"provenance", "configuration"}};
  j["kind"] = {{"value", r.kind}, {"provenance", "configuration"}};
  j["modes"] = {{"value", r.modes}, {"provenance", "configuration"}};
  j["seed"] = {{"value", r.seed}, {"provenance", "configuration"}};
  io::json slots = io::json::object();
  for (const Slot& s : r.slots) {
    io::json o;
    o["verdict"] = s.verdict;
    o["provenance"] = s.provenance;
    o["detail"] = s.detail;
    slots[s.name] = std::move(o);
  }
  j["slots"] = std::move(slots);
  io::json edges = io::json::array();
  for (const Edge& e : r.edges) {
    edges.push_back({{"id", e.id},
                     {"statement", e.statement},
                     {"kind", e.kind == EdgeKind::implication ? "implication" : "non-implication"},
                     {"status", e.status},
                     {"provenance", e.provenance},
                     {"reason", e.reason}});
  }
  j["edges"] = std::move(edges);
  j["violated"] = {{"value", r.violated}, {"provenance", "no checked implication may fail: each edge is a theorem"}};
  j["infeasible_finding"] = {{"value", r.infeasible_finding},
                             {"provenance", "a Lyapunov certificate slot was found infeasible"}};
  return j;
}

namespace prov {
inline constexpr const char* kStability =
    "exponential stability from the spectral bound, ||T(t)|| <= M e^{-delta t}";
inline constexpr const char* kAdmissibility =
    "q-admissibility: sup over unit L^q inputs of ||int_0^T T(T-s)Bu(s)ds||, trend in N";
inline constexpr const char* kClassScan = "extrapolation-space membership B in L(U,X_{-gamma}): ||(-A)^{-gamma}B||_N trend";
inline constexpr const char* kIssCriterion = "L^2-ISS <=> exponential stability and 2-admissibility";
inline constexpr const char* kGainFit = "ISS envelope |x(t)| <= M e^{-omega t}|x0| + g ||u||_{L2(0,t)} on simulated runs";
inline constexpr const char* kSufficientAdmissibility =
    "B in L(U,X_{-1/2+p}), p>0 => q-admissible for q > 2/(1+2p), in particular 2-admissible";
inline constexpr const char* kSelfAdjointAdmissibility = "A self-adjoint and B in L(U,X_{-1/2}) => B 2-admissible";
inline constexpr const char* kCounterexample =
    "A = diag(-2^n), B = (2^{n/2}): 2-admissible although (-A)^{-1/2}B = (1,1,...) is unbounded";
inline constexpr const char* kChain = "coercive L^2-ISS Lyapunov function => L^2-ISS";
inline constexpr const char* kAdmissibleIfLf = "a coercive quadratic L^2-ISS Lyapunov function forces 2-admissibility";
inline constexpr const char* kContractionGap =
    "stability and 2-admissibility do not imply similarity to a contraction semigroup";
inline constexpr const char* kSelfAdjoint = "diagonal generator with real eigenvalues is self-adjoint";
}  // namespace prov

namespace detail {

inline Edge implication(std::string id, std::string statement, Truth premise, Truth conclusion, std::string provenance) {
  Edge e{std::move(id), std::move(statement), EdgeKind::implication, "", std::move(provenance), ""};
  if (premise == Truth::no) {
    e.status = "vacuous";
    e.reason = "premise fails at the tested truncations";
  } else if (premise == Truth::unknown) {
    e.status = "inconclusive";
    e.reason = "premise undetermined at the tested truncations";
  } else if (conclusion == Truth::yes) {
    e.status = "holds";
    e.reason = "premise and conclusion both observed";
  } else if (conclusion == Truth::no) {
    e.status = "violated";
    e.reason = "premise observed but conclusion fails";
  } else {
    e.status = "inconclusive";
    e.reason = "premise observed, conclusion undetermined";
  }
  return e;
}

struct CertificateTrend {
  std::vector<double> a1, a2, a3, a4, a4_required;
  std::vector<bool> feasible;
  TrendFit a4_fit;
  Truth truth = Truth::unknown;
  std::string verdict;
};

inline CertificateTrend certificate_trend(const SystemFamily& family, std::span<const Index> modes,
                                          const std::function<QuadraticForm(const SpectralSystem&)>& build,
                                          const AnalysisConfig& cfg, io::CsvWriter* csv, const std::string& name,
                                          const std::string& quantity) {
  CertificateTrend t;
  std::vector<double> xs;
  for (Index n : modes) {
    const SpectralSystem sys = family(n);
    const QuadraticForm form = build(sys);
    const SampleCloud cloud = default_cloud(n, cfg.seed + static_cast<std::uint64_t>(n), cfg.cloud_size);
    const DissipationReport rep = fit_dissipation(form, sys, cloud);
    const double req = rep.a3 > 0.0 ? required_input_coefficient(form, sys, rep.a3)
                                    : std::numeric_limits<double>::infinity();
    t.a1.push_back(rep.a1);
    t.a2.push_back(rep.a2);
    t.a3.push_back(rep.a3);
    t.a4.push_back(rep.a4);
    t.a4_required.push_back(req);
    t.feasible.push_back(rep.feasible);
    xs.push_back(static_cast<double>(n));
    if (csv) {
      csv->row(name, sys.label(), quantity + "_a1", "", n, "", rep.a1);
      csv->row(name, sys.label(), quantity + "_a3", "", n, "", rep.a3);
      csv->row(name, sys.label(), quantity + "_a4", "", n, "", rep.a4);
      csv->row(name, sys.label(), quantity + "_a4_required", "", n, "", req);
    }
  }
  const bool all_feasible = std::all_of(t.feasible.begin(), t.feasible.end(), [](bool b) { return b; });
  if (!all_feasible) {
    t.truth = Truth::no;
    t.verdict = "infeasible";
    return t;
  }
  if (xs.size() < 3) {
    t.truth = Truth::unknown;
    t.verdict = "inconclusive";
    return t;
  }
  // a4 may be 0 (no coupling); classify_trend treats a final 0 as bounded.
  t.a4_fit = classify_trend(xs, t.a4, cfg.thresholds);
  t.truth = truth_of(t.a4_fit.verdict);
  t.verdict = t.truth == Truth::yes ? "feasible" : t.truth == Truth::no ? "infeasible" : "inconclusive";
  return t;
}

inline io::json certificate_detail(const CertificateTrend& t, std::span<const Index> modes) {
  io::json d;
  d["modes"] = std::vector<Index>(modes.begin(), modes.end());
  auto arr = [](const std::vector<double>& v) {
    io::json a = io::json::array();
    for (double x : v) a.push_back(io::number(x));
    return a;
  };
  d["a1"] = arr(t.a1);
  d["a2"] = arr(t.a2);
  d["a3"] = arr(t.a3);
  d["a4"] = arr(t.a4);
  d["a4_required"] = arr(t.a4_required);
  d["a4_growth_exponent"] = t.a4_fit.slope;
  d["a4_tail_ratio"] = t.a4_fit.tail_ratio;
  return d;
}

inline std::vector<double> uniform_grid(double horizon, int nodes) {
  std::vector<double> g(static_cast<std::size_t>(nodes));
  for (int i = 0; i < nodes; ++i) g[static_cast<std::size_t>(i)] = horizon * i / (nodes - 1);
  g.back() = horizon;
  return g;
}

inline Vector random_unit(Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  Vector x(n);
  for (Index i = 0; i < n; ++i) x(i) = gauss(rng);
  return x / x.norm();
}

inline void write_trajectory(const std::string& path, const Trajectory& tr) {
  io::CsvWriter csv(path);
  std::vector<std::string> head{"t"};
  for (Index i = 0; i < tr.states.front().size(); ++i) head.push_back("mode_" + std::to_string(i + 1));
  head.push_back("u");
  csv.row(head);
  for (std::size_t k = 0; k < tr.times.size(); ++k) {
    std::vector<std::string> cells{io::format_double(tr.times[k])};
    for (Index i = 0; i < tr.states[k].size(); ++i) cells.push_back(io::format_double(tr.states[k](i)));
    cells.push_back(io::format_double(tr.input.at(tr.times[k])));
    csv.row(cells);
  }
}

}  // namespace detail

/// Runs for one system: homogeneous runs from random unit states, forced runs
/// from 0 (constant and sampled-sinusoid inputs), and one mixed run.
template <LinearSystem S>
std::vector<Trajectory> gain_ensemble(const S& sys, double horizon, int nodes, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const std::vector<double> grid = detail::uniform_grid(horizon, nodes);
  const Vector zero = Vector::Zero(sys.dimension());
  const InputSignal wave = InputSignal::sampled_sinusoid(1.0, 2.0, 0.3, horizon / 64.0, horizon);
  std::vector<Trajectory> runs;
  std::vector<Vector> starts;
  for (int k = 0; k < 3; ++k) {
    starts.push_back(detail::random_unit(sys.dimension(), rng));
    runs.push_back(simulate_mild(sys, starts.back(), InputSignal::zero(), grid));
  }
  runs.push_back(simulate_mild(sys, zero, InputSignal::constant(1.0), grid));
  runs.push_back(simulate_mild(sys, zero, wave, grid));
  runs.push_back(simulate_mild(sys, starts.front(), wave, grid));
  return runs;
}

namespace detail {

inline ImplicationReport analyze_spectral(const AnalysisConfig& cfg) {
  const SystemFamily family = io::family_of(cfg.system);
  const std::string name = io::spec_label(cfg.system);
  const std::span<const Index> modes(cfg.modes);
  const Index n_max = cfg.modes.back();
  const SpectralSystem top = family(n_max);

  ImplicationReport r;
  r.system = name;
  r.kind = "spectral";
  r.modes = cfg.modes;
  r.seed = cfg.seed;

  std::optional<io::CsvWriter> csv;
  if (!cfg.out_dir.empty()) csv.emplace(cfg.out_dir + "/trends.csv");
  if (csv) csv->row(std::vector<std::string>{"system", "label", "quantity", "gamma_or_q", "N", "T", "value"});
  io::CsvWriter* out = csv ? &*csv : nullptr;

  // Stability.
  DecayOptions dopt;
  dopt.rate_override = cfg.delta_override;
  const DecayBound db = decay_bound_estimate(top, 0.0, dopt);
  Slot stable{"exponential_stability", "", Truth::unknown, prov::kStability, {}};
  stable.truth = decay_floor(top) > 0.0 ? Truth::yes : Truth::no;
  stable.verdict = stable.truth == Truth::yes ? "holds" : "fails";
  stable.detail = {{"prefactor", io::number(db.prefactor)}, {"rate", io::number(db.rate)},
                   {"spectral_floor", io::number(decay_floor(top))}};

  Slot self_adjoint{"self_adjoint", "holds", Truth::yes, prov::kSelfAdjoint, {}};

  // Similarity to a contraction: P from A^T P + P A = -eps I on each truncation.
  Slot contraction{"similar_to_contraction", "", Truth::unknown, provenance::kContraction, {}};
  {
    io::json conds = io::json::array();
    bool all_ok = true;
    for (Index n : modes) {
      const SimilarityReport s = contraction_similarity(family(n), cfg.epsilon, cfg.similarity_samples, cfg.seed);
      conds.push_back(io::number(s.condition));
      all_ok = all_ok && s.dissipative_new;
      if (out) out->row(name, family(n).label(), "similarity_condition", "", n, "", s.condition);
    }
    contraction.truth = all_ok ? Truth::yes : Truth::no;
    contraction.verdict = all_ok ? "holds" : "fails";
    contraction.detail = {{"condition_by_modes", conds}, {"epsilon", cfg.epsilon}};
  }

  // Extrapolation-space scans.
  Slot scans{"extrapolation_scans", "", Truth::unknown, prov::kClassScan, io::json::object()};
  Truth below_half = Truth::no;
  Truth at_half = Truth::unknown;
  std::optional<double> smallest_bounded;
  bool any_unknown_below = false;
  for (double g : cfg.gammas) {
    const OperatorClassReport rep = operator_class_scan(family, modes, g, cfg.thresholds);
    io::json norms = io::json::array();
    for (const ScanPoint& p : rep.norms_by_modes) {
      norms.push_back(io::number(p.norm));
      if (out) out->row(name, top.label(), "extrapolation_norm", g, p.modes, "", p.norm);
    }
    scans.detail[io::format_double(g)] = {{"verdict", to_string(rep.verdict)},
                                          {"norms", norms},
                                          {"growth_exponent", rep.growth_exponent},
                                          {"tail_ratio", rep.tail_ratio}};
    const Truth t = truth_of(rep.verdict);
    if (g < 0.5) {
      if (t == Truth::yes) below_half = Truth::yes;
      if (t == Truth::unknown) any_unknown_below = true;
    }
    if (g == 0.5) at_half = t;
    if (t == Truth::yes && (!smallest_bounded || g < *smallest_bounded)) smallest_bounded = g;
  }
  if (below_half == Truth::no && any_unknown_below) below_half = Truth::unknown;
  scans.verdict = "see detail";
  scans.detail["in_X_minus_half"] = to_string(at_half);
  scans.detail["in_X_minus_gamma_below_half"] = to_string(below_half);
  scans.detail["smallest_bounded_gamma"] = smallest_bounded ? io::json(*smallest_bounded) : io::json(nullptr);

  // 2-admissibility trend (and the configured exponent, if different).
  std::vector<double> horizons{cfg.horizon / 2.0, cfg.horizon};
  auto adm_slot = [&](InputExponent q, const char* slot_name) {
    const AdmissibilityEstimate est =
        admissibility_trend(family, q, modes, horizons, cfg.segment_length, cfg.thresholds);
    io::json table = io::json::array();
    for (const auto& p : est.trend) {
      table.push_back({{"N", p.modes}, {"T", p.horizon}, {"K", io::number(p.constant)}});
      if (out) out->row(name, top.label(), "admissibility_constant", to_string(q), p.modes, p.horizon, p.constant);
    }
    Slot s{slot_name, to_string(est.verdict), truth_of(est.verdict), prov::kAdmissibility, {}};
    s.detail = {{"q", to_string(q)},
                {"trend", table},
                {"growth_exponent", est.growth_exponent},
                {"tail_ratio", est.tail_ratio},
                {"segment_length", cfg.segment_length},
                {"exact", est.exact}};
    return std::pair{s, est};
  };
  auto [adm2, adm2_est] = adm_slot(InputExponent::two, "admissibility_2");
  std::optional<Slot> admq;
  if (cfg.q != InputExponent::two) admq = adm_slot(cfg.q, "admissibility_q").first;

  // Certificates.
  const auto v_half = certificate_trend(
      family, modes, [](const SpectralSystem& s) { return build_v_half(s); }, cfg, out, name, "half_norm");
  Slot coercive{"coercive_quadratic_lf", v_half.verdict, v_half.truth, provenance::kHalfNorm,
                certificate_detail(v_half, modes)};
  const auto w0 = certificate_trend(
      family, modes, [](const SpectralSystem& s) { return build_w_q(s, 0.0); }, cfg, out, name, "plain_integral");
  Slot noncoercive{"noncoercive_w0_lf", w0.verdict, w0.truth, provenance::kPlainIntegral,
                   certificate_detail(w0, modes)};
  {
    std::vector<double> xs(cfg.modes.begin(), cfg.modes.end());
    if (xs.size() >= 3) {
      // a1(W_0) = 1/(2 lambda_N) -> 0: the form is not coercive in the limit.
      noncoercive.detail["a1_trend"] = to_string(classify_trend(xs, w0.a1, cfg.thresholds).verdict);
    }
  }
  if (coercive.truth == Truth::no || noncoercive.truth == Truth::no) r.infeasible_finding = true;

  // L2-ISS from the criterion, plus a simulated envelope.
  const IssVerdict iss = l2_iss_verdict(top, adm2_est);
  Slot l2iss{"l2_iss", to_string(iss.status),
             iss.status == IssStatus::iss ? Truth::yes : iss.status == IssStatus::not_iss ? Truth::no : Truth::unknown,
             prov::kIssCriterion, {}};
  l2iss.detail["reasons"] = iss.reasons;
  {
    io::json env = io::json::array();
    const SpectralSystem small = family(cfg.modes.front());
    for (Index n : modes) {
      const auto runs = gain_ensemble(family(n), cfg.horizon, cfg.trajectory_nodes, cfg.seed);
      const GainEnvelope g = iss_gain_fit(runs);
      env.push_back({{"N", n},
                     {"overshoot", io::number(g.overshoot)},
                     {"rate", io::number(g.rate)},
                     {"gain", io::number(g.gain)},
                     {"certified", g.certified},
                     {"not_iss", g.not_iss}});
      if (out) out->row(name, top.label(), "envelope_gain", "", n, cfg.horizon, g.gain);
    }
    l2iss.detail["envelope"] = env;
    l2iss.detail["envelope_provenance"] = prov::kGainFit;
    if (!cfg.out_dir.empty()) {
      const auto runs = gain_ensemble(small, cfg.horizon, cfg.trajectory_nodes, cfg.seed);
      detail::write_trajectory(cfg.out_dir + "/trajectories.csv", runs.back());
    }
  }

  r.slots = {stable, self_adjoint, contraction, scans, adm2};
  if (admq) r.slots.push_back(*admq);
  r.slots.insert(r.slots.end(), {coercive, noncoercive, l2iss});

  // Edges.
  const Truth base = all_of({stable.truth, contraction.truth});
  r.edges.push_back(implication("x_below_half=>x_half",
                                "B in X_{-gamma} for some gamma<1/2 (stable, contraction) => B in X_{-1/2}",
                                all_of({below_half, base}), at_half, prov::kClassScan));
  r.edges.push_back(implication("x_below_half=>2_admissible", "B in X_{-gamma} for some gamma<1/2 => 2-admissible",
                                below_half, adm2.truth, prov::kSufficientAdmissibility));
  r.edges.push_back(implication("self_adjoint&x_half=>2_admissible", "A self-adjoint, B in X_{-1/2} => 2-admissible",
                                all_of({self_adjoint.truth, at_half}), adm2.truth, prov::kSelfAdjointAdmissibility));
  r.edges.push_back(implication("self_adjoint&x_half=>coercive_lf",
                                "A self-adjoint, B in X_{-1/2}, stable => V(x)=||x||^2/2 is a coercive L^2-ISS LF",
                                all_of({self_adjoint.truth, at_half, stable.truth}), coercive.truth,
                                provenance::kHalfNorm));
  r.edges.push_back(implication("x_below_half=>coercive_lf",
                                "B in X_{-gamma}, gamma<1/2, stable, contraction => coercive quadratic L^2-ISS LF",
                                all_of({below_half, base}), coercive.truth, provenance::kSquareFunction));
  r.edges.push_back(implication("coercive_lf=>2_admissible", "coercive quadratic L^2-ISS LF => 2-admissible",
                                coercive.truth, adm2.truth, prov::kAdmissibleIfLf));
  r.edges.push_back(implication("coercive_lf=>l2_iss", "coercive quadratic L^2-ISS LF => L^2-ISS", coercive.truth,
                                l2iss.truth, prov::kChain));
  {
    const Truth premise = smallest_bounded ? all_of({stable.truth, *smallest_bounded < 1.0 ? Truth::yes : Truth::no})
                                           : Truth::unknown;
    Edge e = implication("x_p&p+2q<1=>w_q_lf", "B in X_{-p}, p+2q<1 (q=0) => W_0 is a non-coercive L^2-ISS LF", premise,
                         noncoercive.truth, provenance::kFractionalFamily);
    if (smallest_bounded) e.reason += "; p = " + io::format_double(*smallest_bounded);
    r.edges.push_back(e);
  }
  r.edges.push_back(implication("stable&self_adjoint=>contraction", "A self-adjoint, stable => similar to contraction",
                                all_of({stable.truth, self_adjoint.truth}), contraction.truth, prov::kSelfAdjoint));

  {
    Edge x1{"2_admissible=/=>x_half", "2-admissible does not imply B in X_{-1/2}", EdgeKind::non_implication, "",
            prov::kCounterexample, ""};
    if (adm2.truth == Truth::yes && at_half == Truth::no) {
      x1.status = "witnessed";
      x1.reason = "2-admissibility trend bounded while the gamma=1/2 scan diverges";
    } else if (adm2.truth == Truth::unknown || at_half == Truth::unknown) {
      x1.status = "inconclusive";
      x1.reason = "a required trend is undetermined";
    } else {
      x1.status = "not-witnessed";
      x1.reason = "this system is not a counterexample";
    }
    r.edges.push_back(x1);
  }
  {
    Edge x2{"stable&2_admissible=/=>contraction", "stability and 2-admissibility do not imply similarity to a contraction",
            EdgeKind::non_implication, "not checkable at finite N", prov::kContractionGap, ""};
    x2.reason = "every Hurwitz truncation is similar to a contraction; cond(P) by N: " +
                contraction.detail["condition_by_modes"].dump();
    r.edges.push_back(x2);
  }
  r.violated = std::any_of(r.edges.begin(), r.edges.end(), [](const Edge& e) { return e.status == "violated"; });
  return r;
}

inline ImplicationReport analyze_matrix(const AnalysisConfig& cfg) {
  const MatrixSystem sys = io::matrix_system_of(cfg.system);
  ImplicationReport r;
  r.system = sys.label();
  r.kind = "matrix";
  r.modes = {sys.dimension()};
  r.seed = cfg.seed;

  DecayOptions dopt;
  dopt.rate_override = cfg.delta_override;
  const DecayBound db = decay_bound_estimate(sys, 0.0, dopt);
  Slot stable{"exponential_stability", "holds", Truth::yes, prov::kStability, {}};
  stable.detail = {{"prefactor", io::number(db.prefactor)}, {"rate", io::number(db.rate)}};

  const SimilarityReport s = contraction_similarity(sys, cfg.epsilon, cfg.similarity_samples, cfg.seed);
  Slot contraction{"similar_to_contraction", s.dissipative_new ? "holds" : "fails",
                   s.dissipative_new ? Truth::yes : Truth::no, provenance::kContraction, {}};
  contraction.detail = {{"condition", io::number(s.condition)},
                        {"dissipative_in_standard_product", s.dissipative_standard},
                        {"new_margin", io::number(s.new_margin)},
                        {"decay_rate", io::number(s.decay_rate)}};

  const Index m = sys.b_matrix().cols();
  Slot coercive{"coercive_quadratic_lf", "inconclusive", Truth::unknown, provenance::kSquareFunction, {}};
  Slot noncoercive{"noncoercive_w0_lf", "inconclusive", Truth::unknown, provenance::kPlainIntegral, {}};
  if (m == 1) {
    auto fit = [&](const QuadraticForm& f, Slot& slot) {
      const DissipationReport d = fit_dissipation(f, sys, default_cloud(sys.dimension(), cfg.seed, cfg.cloud_size));
      slot.truth = d.feasible ? Truth::yes : Truth::no;
      slot.verdict = d.feasible ? "feasible" : "infeasible";
      slot.detail = {{"a1", io::number(d.a1)}, {"a2", io::number(d.a2)}, {"a3", io::number(d.a3)},
                     {"a4", io::number(d.a4)}, {"violations", d.violations.size()},
                     {"infeasible_reason", d.infeasible_reason}};
    };
    fit(build_v_half(sys), coercive);
    fit(build_w_q(sys, 0.0), noncoercive);
    if (coercive.truth == Truth::no || noncoercive.truth == Truth::no) r.infeasible_finding = true;
  } else {
    coercive.detail["reason"] = "dissipation fitting supports scalar inputs only";
    noncoercive.detail["reason"] = "dissipation fitting supports scalar inputs only";
  }
  Slot trends{"admissibility_2", "inconclusive", Truth::unknown, prov::kAdmissibility,
              {{"reason", "a single matrix system has no mode sweep"}}};
  r.slots = {stable, contraction, trends, coercive, noncoercive};
  r.edges.push_back(implication("stable=>contraction", "stable finite-dimensional system => similar to contraction",
                                stable.truth, contraction.truth, provenance::kContraction));
  if (!cfg.out_dir.empty()) {
    io::CsvWriter csv(cfg.out_dir + "/trends.csv");
    csv.row(std::vector<std::string>{"system", "label", "quantity", "gamma_or_q", "N", "T", "value"});
    csv.row(r.system, sys.label(), "similarity_condition", "", sys.dimension(), "", s.condition);
    if (m == 1) {
      const auto runs = gain_ensemble(sys, cfg.horizon, cfg.trajectory_nodes, cfg.seed);
      detail::write_trajectory(cfg.out_dir + "/trajectories.csv", runs.back());
    }
  }
  r.violated = std::any_of(r.edges.begin(), r.edges.end(), [](const Edge& e) { return e.status == "violated"; });
  return r;
}

}  // namespace detail

/// Class scans, admissibility trends, Lyapunov certificates and the
/// implication edges between them. Writes report.json, trends.csv and
/// trajectories.csv when cfg.out_dir is set.
inline ImplicationReport analyze(const AnalysisConfig& cfg) {
  validate(cfg);
  if (!cfg.out_dir.empty()) std::filesystem::create_directories(cfg.out_dir);
  ImplicationReport r = io::is_spectral(cfg.system) ? detail::analyze_spectral(cfg) : detail::analyze_matrix(cfg);
  if (!cfg.out_dir.empty()) io::write_json_file(cfg.out_dir + "/report.json", to_json(r));
  return r;
}

}  // namespace isslyap

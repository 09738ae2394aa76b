#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <sys/wait.h>

#include "isslyap/analysis.hpp"

using namespace isslyap;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("isslyap_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(ISSLYAP_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

AnalysisConfig quick_config(const std::string& model) {
  AnalysisConfig c;
  c.system = io::ModelRef{model};
  c.modes = {8, 16, 32};
  c.gammas = {0.25, 0.5, 1.0};
  c.horizon = 2.0;
  c.cloud_size = 10;
  c.similarity_samples = 50;
  c.trajectory_nodes = 21;
  return c;
}

}  // namespace

TEST(FormatDouble, ShortestRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 6.02214076e23, -2.5}) {
    EXPECT_EQ(std::stod(io::format_double(v)), v);
  }
  EXPECT_EQ(io::format_double(0.1), "0.1");
  EXPECT_EQ(io::format_double(INFINITY), "inf");
  EXPECT_EQ(io::number(NAN), io::json("nan"));
}

TEST(CsvWriter, LineEndingsAndCells) {
  const fs::path dir = scratch("csv");
  {
    io::CsvWriter csv((dir / "a.csv").string());
    csv.row(std::vector<std::string>{"x", "y"});
    csv.row("n", 3, 0.25);
  }
  EXPECT_EQ(slurp(dir / "a.csv"), "x,y\nn,3,0.25\n");
}

TEST(SystemSpec, ParsesAllKinds) {
  EXPECT_TRUE(std::holds_alternative<io::ModelRef>(io::parse_system_spec(io::json("heat-dirichlet"))));
  EXPECT_THROW(io::parse_system_spec(io::json("wave")), InvalidArgument);
  const auto rule = io::parse_system_spec(io::json::parse(R"({"type":"spectral","eigenvalue_rule":"n^2","coeff_rule":"1"})"));
  EXPECT_EQ(io::spectral_truncation(rule, 3).eigenvalues(), (Vector{{1.0, 4.0, 9.0}}));
  EXPECT_THROW(io::parse_system_spec(io::json::parse(R"({"type":"spectral","eigenvalue_rule":"n^"})")),
               InvalidArgument);
  EXPECT_THROW(io::parse_system_spec(io::json::parse(R"({"type":"spectral","eigenvalue_rule":"n^","coeff_rule":"1"})")),
               ParseError);
  const auto arr =
      io::parse_system_spec(io::json::parse(R"({"type":"spectral","eigenvalues":[1,2],"input_coeffs":[1,0]})"));
  EXPECT_THROW(io::spectral_truncation(arr, 3), InvalidArgument);
  EXPECT_THROW(io::parse_system_spec(io::json::parse(R"({"type":"spectral","eigenvalues":[2,1],"input_coeffs":[1,0]})")),
               InvalidSystem);
  const auto mat = io::parse_system_spec(io::json::parse(R"({"type":"matrix","a":[[-1,10],[0,-1]],"b":[[0],[1]]})"));
  EXPECT_FALSE(io::is_spectral(mat));
  EXPECT_THROW(io::parse_system_spec(io::json::parse(R"({"type":"matrix","a":[[1]],"b":[[1]]})")), InvalidSystem);
  EXPECT_THROW(io::parse_system_spec(io::json::parse(R"({"type":"matrix","a":[[-1,0],[0]],"b":[[1],[1]]})")),
               InvalidArgument);
}

TEST(FormJson, RoundTrip) {
  const auto s = make_model("heat-neumann", 4);
  const auto w = build_w_q(s, 0.25);
  const auto back = io::form_from_json(io::json::parse(io::to_json(w).dump()));
  EXPECT_EQ(back.weights(), w.weights());
  EXPECT_EQ(back.generator_power(), w.generator_power());
  EXPECT_EQ(back.provenance(), w.provenance());
  const MatrixSystem m(Matrix{{-1.0, 10.0}, {0.0, -1.0}}, Matrix{{0.0}, {1.0}});
  const auto d = build_w_q(m, 0.0);
  EXPECT_EQ(io::form_from_json(io::json::parse(io::to_json(d).dump())).matrix(), d.matrix());
}

TEST(Config, ParseAndValidate) {
  const auto c = config_from_json(io::json::parse(
      R"({"system":"counterexample","modes":[4,8,16],"gammas":[0.5],"q":"inf","horizon":3,"seed":9,"delta_override":0.5})"));
  EXPECT_EQ(io::spec_label(c.system), "counterexample");
  EXPECT_EQ(c.modes, (std::vector<Index>{4, 8, 16}));
  EXPECT_EQ(c.q, InputExponent::infinity);
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.delta_override, 0.5);
  EXPECT_NO_THROW(validate(c));
  AnalysisConfig bad = c;
  bad.modes = {16, 8, 32};
  EXPECT_THROW(validate(bad), InvalidArgument);
  bad = c;
  bad.horizon = 0.0;
  EXPECT_THROW(validate(bad), InvalidArgument);
  bad = c;
  bad.delta_override = -1.0;
  EXPECT_THROW(validate(bad), InvalidArgument);
  EXPECT_THROW(config_from_json(io::json::array()), InvalidArgument);
}

TEST(Implication, StatusTable) {
  EXPECT_EQ(detail::implication("e", "", Truth::no, Truth::no, "").status, "vacuous");
  EXPECT_EQ(detail::implication("e", "", Truth::yes, Truth::yes, "").status, "holds");
  EXPECT_EQ(detail::implication("e", "", Truth::yes, Truth::no, "").status, "violated");
  EXPECT_EQ(detail::implication("e", "", Truth::yes, Truth::unknown, "").status, "inconclusive");
  EXPECT_EQ(detail::implication("e", "", Truth::unknown, Truth::yes, "").status, "inconclusive");
  EXPECT_EQ(all_of({Truth::yes, Truth::unknown}), Truth::unknown);
  EXPECT_EQ(all_of({Truth::unknown, Truth::no}), Truth::no);
}

TEST(Analyze, QuickNeumannReport) {
  const auto r = analyze(quick_config("heat-neumann"));
  EXPECT_EQ(r.kind, "spectral");
  EXPECT_EQ(r.slot("exponential_stability").truth, Truth::yes);
  EXPECT_EQ(r.slot("admissibility_2").truth, Truth::yes);
  EXPECT_EQ(r.slot("l2_iss").verdict, "ISS");
  EXPECT_FALSE(r.violated);
  EXPECT_EQ(r.edge("stable&2_admissible=/=>contraction").status, "not checkable at finite N");
  EXPECT_NE(r.edge("stable&2_admissible=/=>contraction").reason.find("cond(P)"), std::string::npos);
  EXPECT_THROW(r.slot("nonexistent"), InvalidArgument);
}

TEST(Analyze, MatrixSystemReport) {
  AnalysisConfig c = quick_config("heat-neumann");
  c.system = io::parse_system_spec(io::json::parse(R"({"type":"matrix","a":[[-1,10],[0,-1]],"b":[[0],[1]]})"));
  const auto r = analyze(c);
  EXPECT_EQ(r.kind, "matrix");
  EXPECT_EQ(r.slot("similar_to_contraction").truth, Truth::yes);
  EXPECT_EQ(r.edge("stable=>contraction").status, "holds");
}

TEST(Analyze, OutputsAreDeterministic) {
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  AnalysisConfig c = quick_config("counterexample");
  c.out_dir = a.string();
  analyze(c);
  c.out_dir = b.string();
  analyze(c);
  for (const char* f : {"report.json", "trends.csv", "trajectories.csv"}) {
    ASSERT_TRUE(fs::exists(a / f)) << f;
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
  const auto j = io::read_json_file((a / "report.json").string());
  EXPECT_EQ(j["schema"], "1");
  EXPECT_TRUE(j["slots"].contains("admissibility_2"));
  const std::string traj = slurp(a / "trajectories.csv");
  EXPECT_EQ(traj.rfind("t,mode_1,", 0), 0u);
  EXPECT_EQ(traj.find('\r'), std::string::npos);
}

TEST(Cli, ExitCodes) {
  const fs::path out = scratch("cli");
  const std::string o = " --out " + out.string();
  EXPECT_EQ(run_cli("selftest"), 0);
  EXPECT_EQ(run_cli("selftest --inject-fault corrupt-weight"), 4);
  EXPECT_EQ(run_cli("analyze --model wave" + o), 2);
  EXPECT_EQ(run_cli("analyze --model heat-neumann --modes 16,8,32" + o), 2);
  EXPECT_EQ(run_cli("analyze --model counterexample --modes 8,16,2000" + o), 2);
  EXPECT_EQ(run_cli("analyze --no-such-flag"), 2);
  EXPECT_EQ(run_cli("lyapunov-eval --model heat-neumann --modes 16" + o), 0);
  EXPECT_TRUE(fs::exists(out / "lyapunov.json"));
  const fs::path cfg = out / "defective.json";
  std::ofstream(cfg) << R"({"system":{"type":"matrix","a":[[-1,10],[0,-1]],"b":[[0],[1]]}})";
  EXPECT_EQ(run_cli("lyapunov-eval --form half-norm --config " + cfg.string() + o), 3);
  EXPECT_EQ(run_cli("simulate --model heat-neumann --modes 8 --horizon 2" + o), 0);
  EXPECT_TRUE(fs::exists(out / "gain.json"));
  EXPECT_EQ(run_cli("admissibility-scan --model counterexample --modes 8,16,32 --gamma 0.5,0.75" + o), 0);
  EXPECT_TRUE(fs::exists(out / "scan.json"));
}

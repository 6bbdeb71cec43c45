#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "monolab/scenario.hpp"

using namespace monolab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("monolab_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

ScenarioConfig parsed(const std::string& text) {
  const ParseResult r = parse_config(text);
  for (const auto& e : r.errors) INFO(e.line, ": ", e.message);
  REQUIRE(r.ok());
  return r.config;
}

std::size_t count_csv(const fs::path& dir, const std::string& prefix) {
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().filename().string().rfind(prefix, 0) == 0) ++n;
  return n;
}

}  // namespace

TEST_CASE("model syntax") {
  const ScenarioConfig c = parsed("[scenario]\nmodel = exp_cone:0.5, 4\nmodel = euclidean,n=3\nmodel = power_growth:0.6 4\n");
  REQUIRE(c.models.size() == 3);
  CHECK(c.models[0].n == 4);
  CHECK(c.models[0].profile == Profile::exp_cone(0.5));
  CHECK(c.models[1].name() == "euclidean,n=3");
  CHECK(c.models[2].profile == Profile::power_growth(0.6));
  CHECK(c.suites == all_suites());
}

TEST_CASE("every error is reported with its line") {
  const ParseResult r = parse_config(
      "[scenario]\n"
      "model = power_growth:0.3, 3\n"
      "model = sphere:1, 3\n"
      "r_range = 0.1, 100\n"
      "t_range = 1, 0.5, 20\n"
      "suites = identities, heat\n"
      "colour = blue\n"
      "[tolerances]\n"
      "no_such_check = 1e-3\n"
      "mainmono_residual = -1\n");
  REQUIRE_FALSE(r.ok());
  std::vector<int> lines;
  for (const auto& e : r.errors) lines.push_back(e.line);
  CHECK(lines == std::vector<int>{2, 3, 4, 5, 5, 6, 7, 9, 10});
  CHECK(r.errors[0].message.find("parabolic") != std::string::npos);
  CHECK(r.errors[1].message.find("sphere") != std::string::npos);
  CHECK(r.errors[4].message.find("50") != std::string::npos);
}

TEST_CASE("ranges, suites, tolerances and defaults") {
  const ScenarioConfig c = parsed(
      "# comment\n[scenario]\nmodel = exp_cone:0.8, 5 ; trailing\nr_range = 1, 10, 60\nsuites = fund, identities\n"
      "output_dir = somewhere\nseed = 42\n[tolerances]\nmainmono_residual = 1e-3\n");
  CHECK(c.r_range.lo == 1.0);
  CHECK(c.r_range.points == 60);
  CHECK(c.t_range.points == 50);
  CHECK(c.suites == std::vector<Suite>{Suite::fund, Suite::identities});
  CHECK(c.output_dir == "somewhere");
  CHECK(c.seed == 42);
  CHECK(c.tolerances.at("mainmono_residual") == 1e-3);
  CHECK_FALSE(parse_config("[scenario]\nsuites = identities\n").ok());
  CHECK(parse_config("[scenario]\nsuites = koch\n").ok());
}

TEST_CASE("check catalog") {
  const auto& cat = check_catalog();
  CHECK(cat.size() >= 25);
  std::set<std::string> ids;
  for (const auto& c : cat) {
    CHECK(ids.insert(c.id).second);
    CHECK_FALSE(c.anchor.empty());
  }
  const std::string text = list_checks();
  CHECK(std::count(text.begin(), text.end(), '\n') == static_cast<long>(cat.size()));
  CHECK(text.find("mainmono_residual [identities, tol 0.0001] -> ") != std::string::npos);
}

TEST_CASE("flat space passes every suite, deterministically") {
  const fs::path dir = scratch("flat");
  ScenarioConfig c = parsed("[scenario]\nmodel = euclidean, 3\nmodel = euclidean, 5\nsuites = identities, gradient, cones, fund\n");
  c.output_dir = dir.string();
  const SuiteSummary s = run_scenario(c, Exec::serial);
  for (const auto& r : s.records) {
    INFO(r.check, " ", r.model, " ", r.value, " ", r.note);
    CHECK(r.pass);
  }
  CHECK(s.passed());
  const std::string first = slurp(dir / "summary.csv");
  CHECK(first.rfind("# monolab summary v1\ncheck,anchor,model,value,tolerance,status,note\n", 0) == 0);
  const std::string ident = slurp(dir / "identities_euclidean_n3.csv");
  run_scenario(c, Exec::parallel);
  CHECK(slurp(dir / "summary.csv") == first);
  CHECK(slurp(dir / "identities_euclidean_n3.csv") == ident);
}

TEST_CASE("one report per cell on the slope grid") {
  const fs::path dir = scratch("grid");
  std::string text = "[scenario]\nsuites = identities\n";
  for (const char* a : {"0.3", "0.5", "0.8", "1.0"})
    for (int n = 3; n <= 6; ++n) text += std::string("model = exp_cone:") + a + ", " + std::to_string(n) + "\n";
  ScenarioConfig c = parsed(text);
  c.output_dir = dir.string();
  const SuiteSummary s = run_scenario(c);
  CHECK(s.passed());
  CHECK(count_csv(dir, "identities_") == 16);
  CHECK(fs::exists(dir / "summary.csv"));
  CHECK(s.files.size() == 17);
}

TEST_CASE("a failing cell does not stop the others") {
  const fs::path dir = scratch("isolation");
  ScenarioConfig c = parsed("[scenario]\nmodel = exp_cone:0.5, 3\nt_range = 1e-5, 10, 50\nsuites = entropy, identities\n");
  c.output_dir = dir.string();
  const SuiteSummary s = run_scenario(c);
  CHECK_FALSE(s.passed());
  const auto bad = s.failing();
  REQUIRE(bad.size() == 1);
  CHECK(bad[0] == "cell_error@exp_cone:0.5,n=3");
  std::size_t identities = 0;
  for (const auto& r : s.records)
    if (r.check != "cell_error") identities += r.pass;
  CHECK(identities == 15);
}

TEST_CASE("tolerance overrides change verdicts") {
  const fs::path dir = scratch("override");
  ScenarioConfig c = parsed("[scenario]\nmodel = exp_cone:0.5, 4\nsuites = identities\n[tolerances]\ncoarea_residual = 0\n");
  c.output_dir = dir.string();
  const SuiteSummary s = run_scenario(c);
  for (const auto& r : s.records)
    if (r.check == "coarea_residual") {
      CHECK(r.tolerance == 0.0);
      CHECK(r.pass == (r.value <= 0.0));
    }
}

TEST_CASE("command line") {
  const std::string cli = MONOLAB_CLI;
  const fs::path dir = scratch("cli");
  fs::create_directories(dir);
  CHECK(std::system((cli + " list-checks > " + (dir / "checks.txt").string()).c_str()) == 0);
  CHECK(slurp(dir / "checks.txt") == list_checks());
  CHECK(std::system((cli + " --help > /dev/null").c_str()) == 0);
  CHECK(std::system((cli + " > /dev/null 2>&1").c_str()) != 0);

  std::ofstream(dir / "bad.ini") << "[scenario]\nmodel = power_growth:0.3, 3\n";
  CHECK(std::system((cli + " run " + (dir / "bad.ini").string() + " 2> " + (dir / "err.txt").string()).c_str()) != 0);
  CHECK(slurp(dir / "err.txt").find("bad.ini:2: ") != std::string::npos);

  std::ofstream(dir / "ok.ini") << "[scenario]\nsuites = koch\noutput_dir = ignored\n";
  const std::string env = "MONOLAB_OUTPUT_DIR=" + (dir / "env").string() + " ";
  CHECK(std::system((env + cli + " run " + (dir / "ok.ini").string() + " > /dev/null").c_str()) == 0);
  CHECK(fs::exists(dir / "env" / "koch.csv"));
  CHECK_FALSE(fs::exists("ignored"));

  std::ofstream(dir / "fail.ini") << "[scenario]\nsuites = koch\n[tolerances]\nkoch_scale_variation = 1\n";
  CHECK(std::system((env + cli + " run " + (dir / "fail.ini").string() + " > /dev/null 2> " + (dir / "fail.txt").string()).c_str()) != 0);
  CHECK(slurp(dir / "fail.txt").find("koch_scale_variation@-") != std::string::npos);

  const fs::path csv = dir / "green.csv";
  CHECK(std::system((cli + " dump-green 'exp_cone:0.5, 4' " + csv.string()).c_str()) == 0);
  CHECK(slurp(csv).rfind("# monolab green v1 model=exp_cone:0.5,n=4", 0) == 0);
}

TEST_CASE("shipped configs parse") {
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(fs::path(MONOLAB_SOURCE_DIR) / "configs")) {
    INFO(e.path().string());
    CHECK(parse_config(slurp(e.path())).ok());
    ++n;
  }
  CHECK(n >= 12);
}

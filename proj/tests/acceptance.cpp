// End-to-end acceptance: runs the shipped config of every criterion with the
// tolerances pinned below and prints one verdict line per criterion.
//
// Criterion 10 is a known failure of the model class (see README); its line
// still prints FAIL, but only an unexpected verdict changes the exit status.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "monolab/scenario.hpp"

using namespace monolab;
namespace fs = std::filesystem;

namespace {

struct Criterion {
  int id;
  std::string config;
  std::string title;
  std::map<std::string, double> tolerances;  // pinned; also the checks evaluated
  std::vector<std::pair<std::string, std::string>> must_apply;  // (check, model)
  double max_seconds;
  bool known_failure;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> c = {
      {1, "c01_euclidean.ini", "flat space exactness",
       {{"euclidean_exact", 1e-8}, {"euclidean_gradient_exact", 1e-8}, {"entropy_euclidean_zero", 1e-6},
        {"theta_flat_iff", 1e-8}},
       {{"euclidean_exact", "euclidean,n=6"}, {"entropy_euclidean_zero", "euclidean,n=3"}},
       30.0, false},
      {2, "c02_first_monotonicity.ini", "first monotonicity formula and sign",
       {{"mainmono_residual", 1e-4}, {"mainmono_sign", 1e-8}}, {}, 1e9, false},
      {3, "c03_second_third_monotonicity.ini", "second (both forms) and third monotonicity",
       {{"secondmono_e1_residual", 1e-4}, {"secondmono_e2_residual", 1e-4}, {"thirdmono_residual", 1e-4}},
       {}, 1e9, false},
      {4, "c04_structural_identities.ini", "coarea, I_1, J and transfer identities",
       {{"coarea_residual", 1e-6}, {"I1_constancy", 1e-6}, {"J_residual", 1e-6}, {"transfer_residual", 1e-6}},
       {}, 1e9, false},
      {5, "c05_sharp_gradient.ini", "sharp gradient bound and equality probe",
       {{"sharp_gradient", 1e-10}, {"equality_probe", 0.0}},
       {{"equality_probe", "exp_cone:0.9999,n=4"}}, 1e9, false},
      {6, "c06_asymptotics.ini", "limits of A, V and |grad b| at r = 1e3",
       {{"asymptotic_A", 0.01}, {"asymptotic_V", 0.01}, {"asymptotic_grad_b", 0.01}, {"asymptotic_A_zero_ratio", 0.05}},
       {{"asymptotic_A", "exp_cone:0.5,n=4"}, {"asymptotic_A_zero_ratio", "power_growth:0.6,n=4"}}, 1e9, false},
      {7, "c07_corollaries.ini", "volume corollaries and divergence of V_inf",
       {{"corollary_lower", 1e-8}, {"corollary_upper", 1e-8}, {"Vinf_divergence", 0.1}},
       {{"Vinf_divergence", "exp_cone:0.5,n=4"}, {"Vinf_divergence", "exp_cone:0.5,n=3"}}, 1e9, false},
      {8, "c08_entropy.ini", "Li-Yau, F, (tF)', decay and W monotonicity",
       {{"liyau_bound", 1e-6}, {"F_nonpositive", 1e-6}, {"F_equals_tdS", 1e-3}, {"dtF_equals_rhs", 1e-3},
        {"F_decay", 1e-5}, {"W_nonincreasing", 1e-6}},
       {{"F_equals_tdS", "exp_cone:0.8,n=4"}}, 180.0, false},
      {9, "c09_criteria.ini", "Dini 6/6, ODE 3/3, unique tangent cone",
       {{"dini_closed_form", 0.0}, {"ode_closed_form", 0.0}, {"uniqueC_verdict", 0.0}},
       {{"uniqueC_verdict", "exp_cone:0.5,n=4"}}, 1e9, false},
      {10, "c10_fund_ratios.ini", "four fund ratios within 20% on [100, 1000]",
       {{"fund_tracefree_l1", 0.2}, {"fund_tracefree_l2", 0.2}, {"fund_first_mono", 0.2}, {"fund_second_mono", 0.2}},
       {{"fund_second_mono", "exp_cone:0.5,n=4"}, {"fund_second_mono", "exp_cone:0.8,n=4"}}, 1e9, true},
      {11, "c11_koch.ini", "Koch curve angle dependence and degenerate chord",
       {{"koch_angle_monotone", 1.0}, {"koch_degenerate_zero", 1e-12}}, {{"koch_angle_monotone", "-"}}, 1e9, false},
  };
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

int main() {
  const fs::path src = MONOLAB_SOURCE_DIR;
  const fs::path out = fs::temp_directory_path() / "monolab_acceptance";
  int unexpected = 0;
  for (const Criterion& c : criteria()) {
    const ParseResult pr = parse_config(slurp(src / "configs" / c.config));
    std::string detail;
    bool pass = pr.ok();
    double seconds = 0.0;
    if (!pr.ok()) {
      detail = "config error: " + pr.errors.front().message;
    } else {
      ScenarioConfig cfg = pr.config;
      cfg.output_dir = (out / ("c" + std::to_string(c.id))).string();
      fs::remove_all(cfg.output_dir);
      for (const auto& [id, tol] : c.tolerances) cfg.tolerances[id] = tol;
      const auto t0 = std::chrono::steady_clock::now();
      const SuiteSummary s = run_scenario(cfg);
      seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      std::size_t evaluated = 0, failed = 0;
      std::string worst;
      for (const auto& r : s.records) {
        const bool counted = c.tolerances.count(r.check) || r.check == "cell_error";
        if (!counted) continue;
        ++evaluated;
        if (!r.pass) {
          if (failed++ == 0) {
            char buf[256];
            std::snprintf(buf, sizeof buf, "%s@%s value %.3g tol %.3g", r.check.c_str(), r.model.c_str(), r.value,
                          r.tolerance);
            worst = buf;
          }
        }
      }
      for (const auto& [id, model] : c.must_apply) {
        bool applied = false;
        for (const auto& r : s.records)
          applied = applied || (r.check == id && r.model == model && r.note.rfind("not applicable", 0) != 0);
        if (!applied) {
          ++failed;
          if (worst.empty()) worst = id + "@" + model + " did not run";
        }
      }
      if (c.id == 10)
        for (const char* g : {"fund_exp_cone_0.5_n4.csv", "fund_exp_cone_0.8_n4.csv"})
          if (!fs::exists(src / "tests" / "golden" / g)) {
            ++failed;
            worst += std::string(" missing golden ") + g;
          }
      if (c.id == 9)
        for (const auto& r : s.records)
          if (r.check == "uniqueC_verdict" && r.note.find("decay") == std::string::npos) {
            ++failed;
            worst += " uniqueC diagnostics lack the fitted decay";
          }
      if (seconds > c.max_seconds) {
        ++failed;
        worst += " runtime over budget";
      }
      pass = failed == 0 && evaluated > 0;
      char buf[128];
      std::snprintf(buf, sizeof buf, "%zu/%zu checks", evaluated - std::min(evaluated, failed), evaluated);
      detail = buf + (worst.empty() ? std::string() : "; first failure " + worst);
    }
    const bool as_expected = pass != c.known_failure;
    if (!as_expected) ++unexpected;
    std::printf("criterion %2d: %s%s  %s  [%s; %.1f s]\n", c.id, pass ? "PASS" : "FAIL",
                c.known_failure ? (pass ? " (expected FAIL)" : " (expected)") : "", c.title.c_str(), detail.c_str(),
                seconds);
  }
  std::printf("%s\n", unexpected ? "acceptance: unexpected verdicts" : "acceptance: all verdicts as expected");
  return unexpected ? 1 : 0;
}

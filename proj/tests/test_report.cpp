#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "lcsym/experiment.hpp"
#include "lcsym/report.hpp"

using namespace lcsym;

namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Minimal well-formedness check: balanced, properly nested elements.
bool balanced_xml(const std::string& s) {
  std::vector<std::string> stack;
  std::size_t i = 0;
  while ((i = s.find('<', i)) != std::string::npos) {
    const std::size_t j = s.find('>', i);
    if (j == std::string::npos) return false;
    const std::string tag = s.substr(i + 1, j - i - 1);
    i = j + 1;
    if (tag.empty()) return false;
    if (tag[0] == '?' || tag[0] == '!') continue;
    if (tag.back() == '/') continue;
    const std::size_t end = tag.find_first_of(" \t\n");
    if (tag[0] == '/') {
      if (stack.empty() || stack.back() != tag.substr(1)) return false;
      stack.pop_back();
    } else {
      stack.push_back(tag.substr(0, end));
    }
  }
  return stack.empty();
}

ExperimentConfig golden_config() {
  ExperimentConfig cfg;
  cfg.densities = {"normal"};
  cfg.sizes = {20, 50};
  cfg.reps = 10;
  cfg.seed = 7;
  cfg.estimators = {"mean", "median", "mle", "os:mean:pmle:trunc"};
  return cfg;
}

}  // namespace

TEST_CASE("number formatting") {
  CHECK(format_number(0.5) == "0.5");
  CHECK(format_number(1e-6) == "1e-06");
  CHECK(format_number(std::numeric_limits<double>::quiet_NaN()).empty());
  CHECK(format_number(0.1 + 0.2) == "0.30000000000000004");
}

TEST_CASE("empty tables are rejected") {
  CHECK_THROWS_AS(to_csv(EfficiencyTable{}), std::invalid_argument);
  CHECK_THROWS_AS(to_csv(InfoCurveTable{}), std::invalid_argument);
  CHECK_THROWS_AS(to_svg(EfficiencyTable{}), std::invalid_argument);
  CHECK_THROWS_AS(to_svg(InfoCurveTable{}), std::invalid_argument);
  CHECK_THROWS_AS(emit_csv(EfficiencyTable{}, fs::temp_directory_path() / "lcsym_empty.csv"),
                  std::invalid_argument);
}

TEST_CASE("headers") {
  const InfoCurveTable t = run_info_curves(std::vector<RefDensity>{RefDensity::normal()},
                                           std::vector<double>{0.001});
  const std::string csv = to_csv(t);
  CHECK(csv.rfind("density,eta,info_eta,ratio\nnormal,0.001,", 0) == 0);
  const DiagnosticsRun d = run_diagnostics(std::vector<double>{-1.0, 0.0, 1.0}, 10);
  CHECK(to_csv(d).rfind("t,h\n", 0) == 0);
  CHECK(diagnostics_summary(d).find("overall: pass") != std::string::npos);
}

TEST_CASE("golden efficiency CSV") {
  const EfficiencyTable t = run_efficiency(golden_config());
  const std::string csv = to_csv(t);
  CHECK(csv == slurp(fs::path(LCSYM_GOLDEN_DIR) / "efficiency_small.csv"));
  CHECK(csv == to_csv(run_efficiency(golden_config())));
}

TEST_CASE("SVG output is well formed") {
  const EfficiencyTable e = run_efficiency(golden_config());
  const InfoCurveTable i = run_info_curves(
      std::vector<RefDensity>{RefDensity::normal(), RefDensity::symbeta(2.1), RefDensity::symbeta(1.5)},
      default_eta_grid());
  const DiagnosticsRun d = run_diagnostics(RefDensity::logistic(), 30, 3);
  for (const std::string& svg : {to_svg(e), to_svg(i), to_svg(d)}) {
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("</svg>") != std::string::npos);
    CHECK(svg.find("nan") == std::string::npos);
    CHECK(balanced_xml(svg));
  }
  CHECK(to_svg(e) == to_svg(run_efficiency(golden_config())));
}

TEST_CASE("emit writes files and reports unwritable paths") {
  const fs::path dir = fs::temp_directory_path() / "lcsym_test_report";
  fs::create_directories(dir);
  const InfoCurveTable t = run_info_curves(std::vector<RefDensity>{RefDensity::laplace()},
                                           std::vector<double>{0.01, 0.1});
  emit_csv(t, dir / "i.csv");
  emit_svg(t, dir / "i.svg");
  CHECK(slurp(dir / "i.csv") == to_csv(t));
  CHECK(slurp(dir / "i.svg") == to_svg(t));
  CHECK_THROWS_AS(emit_csv(t, dir / "no" / "such" / "dir" / "i.csv"), std::runtime_error);
  fs::remove_all(dir);
}

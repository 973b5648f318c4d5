// Command-line front end: efficiency study, information curves, diagnostics
// on one fitted sample, and one-shot estimation on a data file.
//
// Exit codes: 0 success, 1 internal error, 2 bad input data, 3 bad
// configuration.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "lcsym/errors.hpp"
#include "lcsym/experiment.hpp"
#include "lcsym/refdist.hpp"
#include "lcsym/report.hpp"

namespace fs = std::filesystem;
using namespace lcsym;

namespace {

enum ExitCode { kOk = 0, kInternal = 1, kBadData = 2, kBadConfig = 3 };

struct Flags {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> reps;
  std::optional<double> eta;
  std::optional<std::string> out;
  std::optional<std::string> config;
  std::optional<std::vector<std::string>> densities;
  std::optional<std::vector<std::size_t>> sizes;
  std::optional<std::vector<std::string>> estimators;
};

void add_common_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--seed", f.seed, "base seed");
  cmd->add_option("--reps", f.reps, "replications per cell");
  cmd->add_option("--eta", f.eta, "truncation level");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--config", f.config, "key=value config file");
  cmd->add_option("--densities", f.densities, "comma separated density tags")->delimiter(',');
  cmd->add_option("--sizes", f.sizes, "comma separated sample sizes")->delimiter(',');
  cmd->add_option("--estimators", f.estimators, "comma separated estimator labels")->delimiter(',');
}

// Defaults, then the config file, then explicit flags.
ExperimentConfig resolve(const Flags& f) {
  ExperimentConfig cfg;
  if (f.config) apply_config_file(cfg, *f.config);
  if (f.seed) cfg.seed = *f.seed;
  if (f.reps) cfg.reps = *f.reps;
  if (f.eta) cfg.eta = *f.eta;
  if (f.out) cfg.out = *f.out;
  if (f.densities) cfg.densities = *f.densities;
  if (f.sizes) cfg.sizes = *f.sizes;
  if (f.estimators) cfg.estimators = *f.estimators;
  return cfg;
}

void prepare_output(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir))
    throw ConfigError("output directory " + dir.string() + " cannot be created");
  const fs::path probe = dir / ".lcsym_write_probe";
  if (std::FILE* fp = std::fopen(probe.c_str(), "w")) {
    std::fclose(fp);
    fs::remove(probe, ec);
  } else {
    throw ConfigError("output directory " + dir.string() + " is not writable");
  }
}

int cmd_efficiency(const Flags& f) {
  const ExperimentConfig cfg = resolve(f);
  validate(cfg);
  prepare_output(cfg.out);
  const EfficiencyTable table = run_efficiency(cfg);
  emit_csv(table, cfg.out / "efficiency.csv");
  emit_svg(table, cfg.out / "efficiency.svg");
  std::cout << to_csv(table);
  return kOk;
}

int cmd_info_curves(const Flags& f) {
  ExperimentConfig cfg = resolve(f);
  if (!f.densities && !f.config)
    cfg.densities = {"normal", "logistic", "laplace", "symbeta:2.1", "symbeta:2.5", "symbeta:3.5",
                     "symbeta:4.5"};
  std::vector<RefDensity> refs;
  for (const auto& d : cfg.densities) refs.push_back(RefDensity::parse(d));
  prepare_output(cfg.out);
  const auto etas = default_eta_grid();
  const InfoCurveTable table = run_info_curves(refs, etas);
  emit_csv(table, cfg.out / "info_curves.csv");
  emit_svg(table, cfg.out / "info_curves.svg");
  std::cout << to_csv(table);
  return kOk;
}

int cmd_diagnose(const Flags& f, const std::optional<std::string>& data) {
  const ExperimentConfig cfg = resolve(f);
  const DiagnosticsRun run = [&] {
    if (data) {
      const auto x = read_data_file(*data);
      prepare_output(cfg.out);
      return run_diagnostics(x);
    }
    const std::string tag = f.densities ? cfg.densities.front() : "normal";
    const std::size_t n = f.sizes ? cfg.sizes.front() : 50;
    if (n < 2) throw ConfigError("diagnose needs n >= 2");
    const RefDensity ref = RefDensity::parse(tag);
    prepare_output(cfg.out);
    return run_diagnostics(ref, n, cfg.seed);
  }();
  emit_csv(run, cfg.out / "diagnostics.csv");
  emit_svg(run, cfg.out / "diagnostics.svg");
  const std::string summary = diagnostics_summary(run);
  std::FILE* fp = std::fopen((cfg.out / "diagnostics_summary.txt").c_str(), "w");
  if (!fp) throw std::runtime_error("cannot write diagnostics summary");
  std::fputs(summary.c_str(), fp);
  std::fclose(fp);
  std::cout << summary;
  return kOk;
}

int cmd_estimate(const Flags& f, const std::string& data) {
  ExperimentConfig cfg = resolve(f);
  if (!f.estimators && !f.config)
    cfg.estimators = {"mean", "median", "trimmed", "mle", "os:mean:smsym:trunc",
                      "os:mean:pmle:trunc"};
  std::vector<EstimatorSpec> specs;
  for (const auto& e : cfg.estimators) specs.push_back(parse_estimator(e, cfg.eta));
  const auto x = read_data_file(data);
  std::cout << "estimator,value\n";
  if (x.size() < 2) throw DataError("need at least two observations");
  for (const auto& s : specs) {
    try {
      std::cout << s.label << "," << format_number(run_estimator(s, x, Execution::Parallel)) << "\n";
    } catch (const DegenerateSampleError&) {
      throw;
    } catch (const std::exception& e) {
      // An estimator that is undefined for this sample leaves a blank value.
      std::cout << s.label << ",\n";
      std::cerr << s.label << ": " << e.what() << "\n";
    }
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Location estimation for symmetric log-concave densities"};
  app.require_subcommand(1);

  Flags eff_flags, info_flags, diag_flags, est_flags;
  auto* eff = app.add_subcommand("efficiency", "Monte-Carlo efficiency table");
  add_common_flags(eff, eff_flags);
  auto* info = app.add_subcommand("info-curves", "truncated information ratio curves");
  add_common_flags(info, info_flags);
  auto* diag = app.add_subcommand("diagnose", "fit one sample and check the MLE characterization");
  add_common_flags(diag, diag_flags);
  std::optional<std::string> diag_data;
  diag->add_option("data", diag_data, "data file (one value per line); default draws a sample");
  auto* est = app.add_subcommand("estimate", "estimate the center of a data file");
  add_common_flags(est, est_flags);
  std::string est_data;
  est->add_option("data", est_data, "data file (one value per line)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kBadConfig;
  }

  try {
    if (*eff) return cmd_efficiency(eff_flags);
    if (*info) return cmd_info_curves(info_flags);
    if (*diag) return cmd_diagnose(diag_flags, diag_data);
    if (*est) return cmd_estimate(est_flags, est_data);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kBadConfig;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kBadData;
  } catch (const DegenerateSampleError& e) {
    std::cerr << "degenerate sample: " << e.what() << "\n";
    return kBadData;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternal;
  }
  return kInternal;
}

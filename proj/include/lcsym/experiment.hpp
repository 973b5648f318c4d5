#ifndef LCSYM_EXPERIMENT_HPP_
#define LCSYM_EXPERIMENT_HPP_

// Monte-Carlo efficiency study, information-ratio curves and single-sample
// diagnostics behind the command-line tool.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lcsym/onestep.hpp"
#include "lcsym/refdist.hpp"
#include "lcsym/symmle.hpp"

namespace lcsym {

// Estimator labels:
//   mean | median | trimmed | logistic | mle
//   os:<mean|median|trimmed|logistic>:<sym|smsym|pmle|geo>:<trunc|untrunc>[:<emp|model|full>]
// The information variant defaults to emp when truncated and full otherwise.
struct EstimatorSpec {
  enum class Kind { Preliminary, MLE, OneStep };
  std::string label;
  Kind kind = Kind::Preliminary;
  PreliminaryKind preliminary;
  OneStepConfig one_step;
};

// Throws ConfigError for a malformed label.
EstimatorSpec parse_estimator(std::string_view label, double eta);

double run_estimator(const EstimatorSpec& spec, std::span<const double> sample,
                     Execution execution = Execution::Serial);

struct ExperimentConfig {
  std::vector<std::string> densities{"normal", "logistic", "laplace", "symbeta:2.1"};
  std::vector<std::size_t> sizes{30, 100, 200, 500};
  std::size_t reps = 300;
  std::vector<std::string> estimators{"mean",
                                      "median",
                                      "trimmed",
                                      "mle",
                                      "os:mean:smsym:trunc",
                                      "os:mean:pmle:trunc",
                                      "os:mean:pmle:untrunc"};
  double eta = 0.002;
  std::uint64_t seed = 20240611;
  std::filesystem::path out = ".";
  Execution execution = Execution::Parallel;
};

// Checks the invariants (reps >= 2, sizes >= 5, eta in (0, 0.5), parsable
// tags and labels); throws ConfigError.
void validate(const ExperimentConfig& cfg);

// Applies key=value lines (keys seed, reps, eta, out, densities, sizes,
// estimators; '#' starts a comment) on top of cfg.
void apply_config_text(ExperimentConfig& cfg, std::string_view text);
void apply_config_file(ExperimentConfig& cfg, const std::filesystem::path& path);

struct EfficiencyRow {
  std::string density;
  std::string estimator;
  std::size_t n = 0;
  std::size_t reps = 0;
  std::size_t failures = 0;
  double mc_variance = 0.0;  // NaN when fewer than two replications succeeded
  double efficiency = 0.0;   // NaN when the Fisher information is infinite
};

struct EfficiencyTable {
  std::vector<EfficiencyRow> rows;
};

// Replication r of cell (density, n) uses the sample drawn from
// derive_seed(seed, density, n, r), shared by all estimators.
EfficiencyTable run_efficiency(const ExperimentConfig& cfg);

struct InfoCurveRow {
  std::string density;
  double eta = 0.0;
  double info_eta = 0.0;
  double ratio = 0.0;  // 0 when the full information is infinite
  bool infinite_info = false;
};

struct InfoCurveTable {
  std::vector<InfoCurveRow> rows;
};

InfoCurveTable run_info_curves(std::span<const RefDensity> refs, std::span<const double> etas);

// log-spaced grid from 1e-6 to 0.4
std::vector<double> default_eta_grid();

struct DiagnosticsRun {
  std::vector<double> sample;
  MLEResult fit;
  DiagnosticReport report;
  std::vector<double> t;
  std::vector<double> h;
};

DiagnosticsRun run_diagnostics(std::span<const double> sample, int grid_points = 1000);
DiagnosticsRun run_diagnostics(const RefDensity& ref, std::size_t n, std::uint64_t seed,
                               int grid_points = 1000);

// One value per line, blank lines and '#' comments ignored. Throws
// DataError for unreadable files or non-numeric lines.
std::vector<double> read_data_file(const std::filesystem::path& path);

// Sample variance with divisor k - 1 over pairwise sums.
double mc_variance(std::span<const double> xs);

}  // namespace lcsym

#endif  // LCSYM_EXPERIMENT_HPP_

#include "lcsym/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "lcsym/errors.hpp"
#include "lcsym/numeric.hpp"
#include "lcsym/rng.hpp"

namespace lcsym {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <class T>
bool parse_number(std::string_view s, T& out) {
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && !s.empty();
}

PreliminaryKind parse_preliminary(std::string_view s) {
  if (s == "mean") return PreliminaryKind::mean();
  if (s == "median") return PreliminaryKind::median();
  if (s == "trimmed") return PreliminaryKind::trimmed();
  if (s == "logistic") return PreliminaryKind::logistic();
  throw ConfigError("unknown preliminary estimator '" + std::string(s) + "'");
}

std::vector<std::string> parse_list(std::string_view s) {
  std::vector<std::string> out;
  for (auto item : split(s, ','))
    if (!item.empty()) out.emplace_back(item);
  return out;
}

}  // namespace

EstimatorSpec parse_estimator(std::string_view label, double eta) {
  EstimatorSpec spec;
  spec.label = std::string(label);
  if (label == "mle") {
    spec.kind = EstimatorSpec::Kind::MLE;
    return spec;
  }
  const auto parts = split(label, ':');
  if (parts.size() == 1) {
    spec.kind = EstimatorSpec::Kind::Preliminary;
    spec.preliminary = parse_preliminary(label);
    return spec;
  }
  if (parts[0] != "os" || parts.size() < 4 || parts.size() > 5)
    throw ConfigError("malformed estimator label '" + spec.label + "'");
  spec.kind = EstimatorSpec::Kind::OneStep;
  OneStepConfig& os = spec.one_step;
  os.eta = eta;
  os.preliminary = parse_preliminary(parts[1]);
  if (parts[2] == "sym") os.density = DensityEstimatorKind::Sym;
  else if (parts[2] == "smsym") os.density = DensityEstimatorKind::SmoothedSym;
  else if (parts[2] == "pmle") os.density = DensityEstimatorKind::PartialMLE;
  else if (parts[2] == "geo") os.density = DensityEstimatorKind::GeoSym;
  else throw ConfigError("unknown density estimator in '" + spec.label + "'");
  if (parts[3] == "trunc") os.truncated = true;
  else if (parts[3] == "untrunc") os.truncated = false;
  else throw ConfigError("expected trunc or untrunc in '" + spec.label + "'");
  os.fisher = os.truncated ? FisherVariant::Empirical : FisherVariant::Untruncated;
  if (parts.size() == 5) {
    if (parts[4] == "emp") os.fisher = FisherVariant::Empirical;
    else if (parts[4] == "model") os.fisher = FisherVariant::ModelWeighted;
    else if (parts[4] == "full") os.fisher = FisherVariant::Untruncated;
    else throw ConfigError("unknown information variant in '" + spec.label + "'");
  }
  return spec;
}

double run_estimator(const EstimatorSpec& spec, std::span<const double> sample,
                     Execution execution) {
  switch (spec.kind) {
    case EstimatorSpec::Kind::Preliminary: return preliminary(sample, spec.preliminary);
    case EstimatorSpec::Kind::MLE: {
      MLEOptions opt;
      opt.execution = execution;
      return fit_mle(sample, opt).theta_hat;
    }
    case EstimatorSpec::Kind::OneStep: return one_step(sample, spec.one_step).theta_tilde;
  }
  return kNaN;
}

void validate(const ExperimentConfig& cfg) {
  if (cfg.reps < 2) throw ConfigError("reps must be at least 2");
  if (cfg.sizes.empty()) throw ConfigError("no sample sizes given");
  for (std::size_t n : cfg.sizes)
    if (n < 5) throw ConfigError("sample sizes must be at least 5");
  if (!(cfg.eta > 0.0 && cfg.eta < 0.5)) throw ConfigError("eta must lie in (0, 0.5)");
  if (cfg.densities.empty()) throw ConfigError("no densities given");
  for (const auto& d : cfg.densities) RefDensity::parse(d);
  if (cfg.estimators.empty()) throw ConfigError("no estimators given");
  for (const auto& e : cfg.estimators) parse_estimator(e, cfg.eta);
}

void apply_config_text(ExperimentConfig& cfg, std::string_view text) {
  std::size_t line_no = 0;
  for (auto line : split(text, '\n')) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key=value");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    const auto bad = [&] {
      return ConfigError("config line " + std::to_string(line_no) + ": bad value for '" +
                         std::string(key) + "'");
    };
    if (key == "seed") {
      if (!parse_number(value, cfg.seed)) throw bad();
    } else if (key == "reps") {
      if (!parse_number(value, cfg.reps)) throw bad();
    } else if (key == "eta") {
      if (!parse_number(value, cfg.eta)) throw bad();
    } else if (key == "out") {
      cfg.out = std::string(value);
    } else if (key == "densities") {
      cfg.densities = parse_list(value);
    } else if (key == "estimators") {
      cfg.estimators = parse_list(value);
    } else if (key == "sizes") {
      cfg.sizes.clear();
      for (const auto& s : parse_list(value)) {
        std::size_t n = 0;
        if (!parse_number(std::string_view(s), n)) throw bad();
        cfg.sizes.push_back(n);
      }
    } else {
      throw ConfigError("config line " + std::to_string(line_no) + ": unknown key '" +
                        std::string(key) + "'");
    }
  }
}

void apply_config_file(ExperimentConfig& cfg, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  apply_config_text(cfg, ss.str());
}

double mc_variance(std::span<const double> xs) {
  if (xs.size() < 2) return kNaN;
  const double k = static_cast<double>(xs.size());
  const double mean = numeric::pairwise_sum(xs) / k;
  std::vector<double> sq(xs.size());
  std::transform(xs.begin(), xs.end(), sq.begin(), [&](double x) { return (x - mean) * (x - mean); });
  return numeric::pairwise_sum(sq) / (k - 1.0);
}

EfficiencyTable run_efficiency(const ExperimentConfig& cfg) {
  validate(cfg);
  std::vector<EstimatorSpec> specs;
  for (const auto& e : cfg.estimators) specs.push_back(parse_estimator(e, cfg.eta));
  const std::size_t m = specs.size();
  const bool parallel = cfg.execution == Execution::Parallel;

  EfficiencyTable table;
  for (const auto& tag : cfg.densities) {
    const RefDensity ref = RefDensity::parse(tag);
    const double info = fisher_info(ref);
    for (std::size_t n : cfg.sizes) {
      const auto reps = static_cast<long>(cfg.reps);
      std::vector<double> est(m * cfg.reps, kNaN);
      auto replicate = [&](long r) {
        const auto x = sample(ref, n, derive_seed(cfg.seed, tag, n, static_cast<std::uint64_t>(r)));
        for (std::size_t e = 0; e < m; ++e) {
          try {
            est[e * cfg.reps + r] = run_estimator(specs[e], x, Execution::Serial);
          } catch (const std::exception&) {
            // recorded as a failure below
          }
        }
      };
      if (parallel) {
#pragma omp parallel for schedule(dynamic)
        for (long r = 0; r < reps; ++r) replicate(r);
      } else {
        for (long r = 0; r < reps; ++r) replicate(r);
      }

      for (std::size_t e = 0; e < m; ++e) {
        std::vector<double> ok;
        for (std::size_t r = 0; r < cfg.reps; ++r) {
          const double v = est[e * cfg.reps + r];
          if (std::isfinite(v)) ok.push_back(v);
        }
        EfficiencyRow row{.density = tag,
                          .estimator = specs[e].label,
                          .n = n,
                          .reps = cfg.reps,
                          .failures = cfg.reps - ok.size(),
                          .mc_variance = mc_variance(ok),
                          .efficiency = kNaN};
        if (std::isfinite(info) && std::isfinite(row.mc_variance) && row.mc_variance > 0.0)
          row.efficiency = 1.0 / (static_cast<double>(n) * info) / row.mc_variance;
        table.rows.push_back(std::move(row));
      }
    }
  }
  return table;
}

InfoCurveTable run_info_curves(std::span<const RefDensity> refs, std::span<const double> etas) {
  for (double eta : etas)
    if (!(eta > 0.0 && eta < 0.5)) throw ConfigError("eta grid must lie in (0, 0.5)");
  InfoCurveTable table;
  for (const auto& ref : refs) {
    const double full = fisher_info(ref);
    for (double eta : etas) {
      InfoCurveRow row{.density = ref.tag(), .eta = eta, .info_eta = truncated_info(ref, eta)};
      row.infinite_info = !std::isfinite(full);
      row.ratio = row.infinite_info ? 0.0 : row.info_eta / full;
      table.rows.push_back(std::move(row));
    }
  }
  return table;
}

std::vector<double> default_eta_grid() {
  std::vector<double> etas;
  for (int k = 0; k <= 24; ++k) etas.push_back(std::pow(10.0, -6.0 + k * (6.0 + std::log10(0.4)) / 24.0));
  etas.back() = 0.4;
  return etas;
}

DiagnosticsRun run_diagnostics(std::span<const double> sample, int grid_points) {
  if (grid_points < 2) throw std::invalid_argument("run_diagnostics: need at least two grid points");
  DiagnosticsRun run{.sample = std::vector<double>(sample.begin(), sample.end()),
                     .fit = fit_mle(sample),
                     .report = {},
                     .t = {},
                     .h = {}};
  run.report = diagnostics(run.fit, sample, grid_points);
  double amax = 0.0;
  for (double x : sample) amax = std::max(amax, std::abs(x - run.fit.theta_hat));
  for (int i = 0; i < grid_points; ++i) {
    const double t = amax * i / (grid_points - 1);
    run.t.push_back(t);
    run.h.push_back(characterization_h(run.fit, sample, t));
  }
  return run;
}

DiagnosticsRun run_diagnostics(const RefDensity& ref, std::size_t n, std::uint64_t seed,
                               int grid_points) {
  const auto x = sample(ref, n, derive_seed(seed, ref.tag(), n, 0));
  return run_diagnostics(x, grid_points);
}

std::vector<double> read_data_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read data file " + path.string());
  std::vector<double> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view v = line;
    if (const auto hash = v.find('#'); hash != std::string_view::npos) v = v.substr(0, hash);
    v = trim(v);
    if (v.empty()) continue;
    double x = 0.0;
    if (!parse_number(v, x) || !std::isfinite(x))
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": not a number");
    out.push_back(x);
  }
  if (out.empty()) throw DataError("data file " + path.string() + " holds no values");
  return out;
}

}  // namespace lcsym

#ifndef LCSYM_REPORT_HPP_
#define LCSYM_REPORT_HPP_

// CSV and SVG output. Number formatting is fixed so that equal tables give
// byte-identical files.

#include <filesystem>
#include <string>

#include "lcsym/experiment.hpp"

namespace lcsym {

// All of these throw std::invalid_argument for an empty table and
// std::runtime_error when the file cannot be written.
std::string to_csv(const EfficiencyTable& table);
std::string to_csv(const InfoCurveTable& table);
std::string to_csv(const DiagnosticsRun& run);

// Efficiency against n, one panel per density, one line per estimator.
std::string to_svg(const EfficiencyTable& table);
// Ratio against log10(eta), one line per density.
std::string to_svg(const InfoCurveTable& table);
// h(t) against t.
std::string to_svg(const DiagnosticsRun& run);

std::string diagnostics_summary(const DiagnosticsRun& run);

template <class Table>
void emit_csv(const Table& table, const std::filesystem::path& path);
template <class Table>
void emit_svg(const Table& table, const std::filesystem::path& path);

// Shortest round-trip representation; "" for NaN.
std::string format_number(double x);

}  // namespace lcsym

#endif  // LCSYM_REPORT_HPP_

#ifndef LCSYM_ERRORS_HPP_
#define LCSYM_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace lcsym {

// Sample has fewer than two distinct points; no log-concave MLE exists.
class DegenerateSampleError : public std::runtime_error {
 public:
  explicit DegenerateSampleError(const std::string& what)
      : std::runtime_error(what) {}
};

// Estimated Fisher information is (numerically) zero, the one-step
// correction is undefined.
class DegenerateInformationError : public std::runtime_error {
 public:
  explicit DegenerateInformationError(const std::string& what)
      : std::runtime_error(what) {}
};

// Adaptive quadrature did not reach the requested tolerance.
class QuadratureError : public std::runtime_error {
 public:
  explicit QuadratureError(const std::string& what)
      : std::runtime_error(what) {}
};

// Integration window misses more than the allowed probability mass.
class CoverageError : public std::runtime_error {
 public:
  explicit CoverageError(const std::string& what)
      : std::runtime_error(what) {}
};

class InfiniteMomentError : public std::runtime_error {
 public:
  explicit InfiniteMomentError(const std::string& what)
      : std::runtime_error(what) {}
};

// GeoSym requires the preliminary center strictly inside the data range.
class EmptySupportError : public std::runtime_error {
 public:
  explicit EmptySupportError(const std::string& what)
      : std::runtime_error(what) {}
};

// Bad user-facing configuration (experiment config, CLI labels).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Unreadable or malformed data file.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace lcsym

#endif  // LCSYM_ERRORS_HPP_

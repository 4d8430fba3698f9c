#ifndef SEROREC_ERRORS_HPP
#define SEROREC_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace serorec {

// Covariance matrix failed symmetry / positive-semidefiniteness validation.
struct InvalidCovariance : std::invalid_argument {
  explicit InvalidCovariance(const std::string& what) : std::invalid_argument(what) {}
};

struct SingularMatrix : std::runtime_error {
  explicit SingularMatrix(const std::string& what) : std::runtime_error(what) {}
};

// Malformed input file; message carries line/field context.
struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

struct InsufficientData : std::invalid_argument {
  explicit InsufficientData(const std::string& what) : std::invalid_argument(what) {}
};

struct InsufficientSamples : std::invalid_argument {
  explicit InsufficientSamples(const std::string& what) : std::invalid_argument(what) {}
};

}  // namespace serorec

#endif

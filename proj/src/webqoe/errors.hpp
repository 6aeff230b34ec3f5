#pragma once

#include <stdexcept>
#include <string>

namespace webqoe {

// Process-level status taxonomy. The CLI exits with these values and the
// C API returns them; exceptions below map onto Data or Numeric.
enum class StatusCode : int {
  Ok = 0,
  Usage = 1,
  Data = 2,
  Numeric = 3,
};

class Error : public std::runtime_error {
 public:
  Error(StatusCode code, std::string msg)
      : std::runtime_error(std::move(msg)), code_(code) {}

  StatusCode code() const noexcept { return code_; }

 private:
  StatusCode code_;
};

struct UsageError : Error {
  explicit UsageError(std::string msg) : Error(StatusCode::Usage, std::move(msg)) {}
};

struct DataError : Error {
  explicit DataError(std::string msg) : Error(StatusCode::Data, std::move(msg)) {}
};

struct NumericError : Error {
  explicit NumericError(std::string msg) : Error(StatusCode::Numeric, std::move(msg)) {}
};

// -- data-shaped failures ----------------------------------------------------

class ParseError : public DataError {
 public:
  ParseError(long row, const std::string& reason)
      : DataError("row " + std::to_string(row) + ": " + reason), row_(row) {}

  long row() const noexcept { return row_; }

 private:
  long row_;
};

struct IoError : DataError {
  using DataError::DataError;
};

struct ValidationError : DataError {
  using DataError::DataError;
};

struct EmptyTrace : DataError {
  using DataError::DataError;
};

struct ZeroDuration : DataError {
  using DataError::DataError;
};

struct EmptyCell : DataError {
  using DataError::DataError;
};

struct InconsistentConditions : DataError {
  using DataError::DataError;
};

struct LabelMismatch : DataError {
  using DataError::DataError;
};

struct DegenerateTotals : DataError {
  using DataError::DataError;
};

struct MissingRegressor : DataError {
  using DataError::DataError;
};

// -- numeric failures --------------------------------------------------------

struct DomainError : NumericError {
  using NumericError::NumericError;
};

struct DegenerateMatrix : NumericError {
  using NumericError::NumericError;
};

struct RankDeficient : NumericError {
  using NumericError::NumericError;
};

struct TooFewRows : NumericError {
  using NumericError::NumericError;
};

struct NoValidSubset : NumericError {
  using NumericError::NumericError;
};

struct ZeroCoefficient : NumericError {
  using NumericError::NumericError;
};

struct ZeroWorkload : NumericError {
  using NumericError::NumericError;
};

}  // namespace webqoe

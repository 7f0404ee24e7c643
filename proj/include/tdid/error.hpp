#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace tdid {

enum class ErrorKind {
  Schema,
  Parse,
  Validation,
  Io,
  InsufficientData,
  SingularDesign,
  Convergence,
  Separation,
  Trimming,
  Configuration,
  UnsupportedMechanism,
  Estimation,
};

std::string_view error_kind_name(ErrorKind kind);

// Process exit code for the command-line tool.
// 2 ingestion, 3 nuisance fitting, 4 overlap/trimming, 5 estimation, 6 I/O.
int exit_code(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class SingularDesignError : public Error {
 public:
  SingularDesignError(const std::string& message, std::vector<std::string> columns)
      : Error(ErrorKind::SingularDesign, message), columns_(std::move(columns)) {}

  const std::vector<std::string>& dependent_columns() const noexcept { return columns_; }

 private:
  std::vector<std::string> columns_;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& message, std::vector<double> trace)
      : Error(ErrorKind::Convergence, message), trace_(std::move(trace)) {}

  // Log-likelihood after each accepted Newton step.
  const std::vector<double>& loglik_trace() const noexcept { return trace_; }

 private:
  std::vector<double> trace_;
};

class TrimmingError : public Error {
 public:
  TrimmingError(const std::string& message, std::vector<std::string> unit_ids)
      : Error(ErrorKind::Trimming, message), unit_ids_(std::move(unit_ids)) {}

  const std::vector<std::string>& unit_ids() const noexcept { return unit_ids_; }

 private:
  std::vector<std::string> unit_ids_;
};

}  // namespace tdid

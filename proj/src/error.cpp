#include "tdid/error.hpp"

namespace tdid {

std::string_view error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Schema: return "schema";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Validation: return "validation";
    case ErrorKind::Io: return "io";
    case ErrorKind::InsufficientData: return "insufficient_data";
    case ErrorKind::SingularDesign: return "singular_design";
    case ErrorKind::Convergence: return "convergence";
    case ErrorKind::Separation: return "separation";
    case ErrorKind::Trimming: return "trimming";
    case ErrorKind::Configuration: return "configuration";
    case ErrorKind::UnsupportedMechanism: return "unsupported_mechanism";
    case ErrorKind::Estimation: return "estimation";
  }
  return "unknown";
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Schema:
    case ErrorKind::Parse:
    case ErrorKind::Validation:
      return 2;
    case ErrorKind::InsufficientData:
    case ErrorKind::SingularDesign:
    case ErrorKind::Convergence:
    case ErrorKind::Separation:
      return 3;
    case ErrorKind::Trimming:
      return 4;
    case ErrorKind::Configuration:
    case ErrorKind::UnsupportedMechanism:
    case ErrorKind::Estimation:
      return 5;
    case ErrorKind::Io:
      return 6;
  }
  return 1;
}

}  // namespace tdid

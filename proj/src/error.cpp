#include "radet/error.hpp"

namespace radet {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_parameter: return "invalid-parameter";
    case ErrorKind::dimension_mismatch: return "dimension-mismatch";
    case ErrorKind::not_positive_definite: return "not-positive-definite";
    case ErrorKind::convergence_failure: return "convergence-failure";
    case ErrorKind::degenerate_data: return "degenerate-data";
    case ErrorKind::infeasible: return "infeasible";
    case ErrorKind::invalid_data: return "invalid-data";
    case ErrorKind::undefined_statistic: return "undefined-statistic";
    case ErrorKind::training_failure: return "training-failure";
    case ErrorKind::io: return "io";
    case ErrorKind::validation: return "validation";
  }
  return "unknown";
}

}  // namespace radet

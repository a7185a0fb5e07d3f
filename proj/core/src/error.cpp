#include "optwedge/error.hpp"

namespace optwedge {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Validation: return "validation";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Io: return "io";
    case ErrorKind::InsufficientData: return "insufficient_data";
    case ErrorKind::DegenerateSample: return "degenerate_sample";
    case ErrorKind::Fit: return "fit";
    case ErrorKind::State: return "state";
    case ErrorKind::Infeasible: return "infeasible";
    case ErrorKind::Numerical: return "numerical";
    case ErrorKind::Version: return "version";
  }
  return "unknown";
}

}  // namespace optwedge

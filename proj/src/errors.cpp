#include "lvlingam/errors.hpp"

namespace lvlingam {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::CycleDetected: return "CycleDetected";
    case ErrorKind::NotAPath: return "NotAPath";
    case ErrorKind::IllConditioned: return "IllConditioned";
    case ErrorKind::ObservedColumnsDependent: return "ObservedColumnsDependent";
    case ErrorKind::NotLatent: return "NotLatent";
    case ErrorKind::NotAbsorbable: return "NotAbsorbable";
    case ErrorKind::DegenerateCovariance: return "DegenerateCovariance";
    case ErrorKind::NonConvergence: return "NonConvergence";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::InconsistentVerdicts: return "InconsistentVerdicts";
    case ErrorKind::NoMatchingColumn: return "NoMatchingColumn";
    case ErrorKind::AmbiguousColumn: return "AmbiguousColumn";
    case ErrorKind::StructureUnsupported: return "StructureUnsupported";
    case ErrorKind::NonPositivePrice: return "NonPositivePrice";
    case ErrorKind::Parse: return "Parse";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace lvlingam

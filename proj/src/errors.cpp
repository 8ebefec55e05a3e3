#include "rigidflow/errors.hpp"

namespace rigidflow {

std::string_view error_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::AngleAtPi: return "AngleAtPi";
    case ErrorKind::AntipodalPair: return "AntipodalPair";
    case ErrorKind::DegenerateDensity: return "DegenerateDensity";
    case ErrorKind::NoResidues: return "NoResidues";
    case ErrorKind::MalformedRecord: return "MalformedRecord";
    case ErrorKind::CollinearAtoms: return "CollinearAtoms";
    case ErrorKind::DegenerateInertia: return "DegenerateInertia";
    case ErrorKind::TrajectoryTooShort: return "TrajectoryTooShort";
    case ErrorKind::ResidueMismatch: return "ResidueMismatch";
    case ErrorKind::Diverged: return "Diverged";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message,
             std::optional<std::size_t> residue)
    : std::runtime_error(std::string(error_name(kind)) + ": " + message),
      kind_(kind),
      residue_(residue) {}

}  // namespace rigidflow

#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace rigidflow {

enum class ErrorKind {
  AngleAtPi,
  AntipodalPair,
  DegenerateDensity,
  NoResidues,
  MalformedRecord,
  CollinearAtoms,
  DegenerateInertia,
  TrajectoryTooShort,
  ResidueMismatch,
  Diverged,
  InvalidArgument,
};

std::string_view error_name(ErrorKind kind);

// Library failure carrying a stable name (printed by the CLI) and, where it
// applies, the index of the residue that triggered it.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message,
        std::optional<std::size_t> residue = std::nullopt);

  ErrorKind kind() const noexcept { return kind_; }
  std::string_view name() const noexcept { return error_name(kind_); }
  std::optional<std::size_t> residue() const noexcept { return residue_; }

 private:
  ErrorKind kind_;
  std::optional<std::size_t> residue_;
};

}  // namespace rigidflow

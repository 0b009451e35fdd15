#pragma once

// Physical configuration of the spin-star model and the error types shared by
// every module. Frequencies are in units of the central-spin frequency
// (omega0 = 1) and times in units of 1/omega0.

#include <stdexcept>
#include <string>
#include <string_view>

namespace dnp {

enum class Interaction { XY, XX, XYZ };

std::string_view to_string(Interaction kind);
Interaction parse_interaction(std::string_view text);

struct ModelParams {
  int M = 1;                  // bath size
  double delta = 0.0;         // detuning (omega0 - omega1) / omega0
  double g = 0.1;             // homogeneous coupling / omega0
  double beta_omega1 = 0.0;   // beta * hbar * omega1
  Interaction interaction = Interaction::XY;

  // Bath-spin frequency omega1 / omega0.
  double omega1() const { return 1.0 - delta; }

  // Throws ConfigError when M < 1, g <= 0 or beta_omega1 < 0.
  void validate() const;
};

/// Invalid input or configuration. Maps to CLI exit code 1.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A protocol run cannot continue. Maps to CLI exit code 2.
class RuntimeSignal : public std::runtime_error {
 public:
  enum class Kind { Annihilated, Converged, Flat };

  RuntimeSignal(Kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

std::string_view to_string(RuntimeSignal::Kind kind);

/// Probabilities below this are treated as a fully annihilated state.
inline constexpr double kAnnihilationThreshold = 1e-300;

}  // namespace dnp

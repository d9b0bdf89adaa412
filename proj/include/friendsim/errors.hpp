#pragma once

#include <stdexcept>
#include <string>

namespace friendsim {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Register list problems: duplicate names, dimension cap, mismatched lists.
struct DuplicateRegister : Error { using Error::Error; };
struct ShapeError : Error { using Error::Error; };

// Operator/measurement validation.
struct InvalidOperator : Error { using Error::Error; };
struct IncompleteBasis : Error { using Error::Error; };
struct InvalidSpec : Error { using Error::Error; };

// Forcing an outcome whose probability is below the zero cutoff.
struct ImpossibleOutcome : Error { using Error::Error; };

// Knowledge-base misuse: announcing a statement the sender does not hold,
// recording an observation with no matching trace event.
struct ProvenanceError : Error { using Error::Error; };

// Rule Q: conditioning assignment has probability zero in the agent's view.
struct InconsistentConditioning : Error { using Error::Error; };

// Rule Q: variable not measured in the agent's view circuit.
struct ViewError : Error { using Error::Error; };

// Replay fed a report/seed pair that does not reproduce the recorded run.
struct DeterminismError : Error { using Error::Error; };

// Config document rejected; message carries the line number.
struct ConfigError : Error { using Error::Error; };

}  // namespace friendsim

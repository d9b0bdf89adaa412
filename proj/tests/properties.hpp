#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

// Randomised property suites shared by the unit tests and the acceptance
// runner. Each suite runs `cases` independent random cases from `seed` and
// reports how many violated the property.
namespace properties {

struct PropertyResult {
  std::size_t cases = 0;
  std::size_t failures = 0;
  std::string first_failure;

  bool ok() const { return failures == 0; }
};

// Random unitaries (plain, multi-register, controlled) applied to random
// states preserve the norm to algebraic tolerance.
PropertyResult norm_preservation(std::uint64_t seed, std::size_t cases);

// For random projective measurements, reading the record register of the
// unitary dilation reproduces outcome_distribution exactly, and postselect
// agrees on every branch probability.
PropertyResult dilation_equivalence(std::uint64_t seed, std::size_t cases);

// Every pair of agent views of one experiment agrees on shared gates.
PropertyResult view_consistency(std::uint64_t seed, std::size_t cases);

// Reports are byte-identical when the same configuration runs twice.
PropertyResult report_determinism(std::uint64_t seed, std::size_t cases);

}  // namespace properties

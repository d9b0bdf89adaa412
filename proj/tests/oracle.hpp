#pragma once

#include <array>
#include <cstddef>

// Independent brute-force check of the two-lab experiment. Everything here
// is computed on a hand-rolled six-qubit amplitude vector with no code
// shared with the library: qubits (most significant first) are
//   r   the register alice observes
//   am  alice's memory (0 = ready / saw 0, 1 = saw 1)
//   ae  alice's environment imprint
//   s   the qubit sent to bob
//   bm  bob's memory
//   be  bob's environment imprint
// Collapsing ready into the 0 outcome is harmless: the observed register
// keeps the two lab branches orthogonal, so every probability below is
// unchanged by the third memory level the library carries.
namespace oracle {

inline constexpr std::size_t kAmplitudes = 64;

// Conditional certainties read off each agent's own account of the circuit:
// other labs evolve unitarily, the agent's conditioning variables are
// projected at their slots.
struct ViewConditionals {
  double w_fail_given_a1 = 0.0;  // alice: P(w=fail | a=1)
  double a1_given_b1 = 0.0;      // bob:   P(a=1 | b=1)
  double b1_given_u_ok = 0.0;    // ursula: P(b=1 | u=ok)
};
ViewConditionals view_conditionals();

// Joint distribution of the recorded trace values (a, b, u, w) when no
// friend measurement collapses: a is read without disturbing anything, b is
// read conditioned on a's surviving record, u is sampled conditioned on b's
// record (a's record is destroyed by the measurement itself), and w is
// sampled from the u-projected state (both memory records are gone by then).
// Index a*8 + b*4 + u*2 + w with u, w encoded 0 = ok, 1 = fail.
std::array<double, 16> trace_joint();

// Joint distribution of (u, w) when each friend measurement collapses the
// lab onto the sampled branch. Index u*2 + w, 0 = ok.
std::array<double, 4> collapse_uw_joint();

}  // namespace oracle

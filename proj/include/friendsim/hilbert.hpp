#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "friendsim/errors.hpp"
#include "friendsim/rng.hpp"

namespace friendsim {

using cplx = std::complex<double>;

// Tolerances used throughout. Algebraic identities hold to kTolAlgebra,
// distributions sum to one within kTolDistribution, probabilities below
// kTolZero are treated as exactly zero, and a conditional counts as
// certainty above kCertainty.
inline constexpr double kTolAlgebra = 1e-10;
inline constexpr double kTolDistribution = 1e-9;
inline constexpr double kTolZero = 1e-12;
inline constexpr double kCertainty = 1.0 - 1e-9;

// Hard cap on the global amplitude count.
inline constexpr std::size_t kMaxGlobalDimension = std::size_t{1} << 20;

enum class RegisterRole { System, Memory, Environment, Notebook, Record };

std::string role_name(RegisterRole role);
RegisterRole role_from_name(const std::string& name);

struct RegisterSpec {
  std::string name;
  std::size_t dimension = 2;
  RegisterRole role = RegisterRole::System;
  // One human-readable label per basis index; defaults to "0", "1", ...
  std::vector<std::string> basis_labels;

  void validate() const;  // dimension >= 2, label count matches
  std::size_t index_of_label(const std::string& label) const;
  std::string label_of(std::size_t index) const;
};

// Dense row-major complex matrix. Big enough for lab-sized operators; the
// global dimension cap keeps everything small.
struct Matrix {
  std::size_t rows = 0, cols = 0;
  std::vector<cplx> a;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c) {}
  cplx& at(std::size_t r, std::size_t c) { return a[r * cols + c]; }
  const cplx& at(std::size_t r, std::size_t c) const { return a[r * cols + c]; }

  static Matrix identity(std::size_t n);
  Matrix adjoint() const;
  Matrix mul(const Matrix& rhs) const;
  bool is_unitary(double tol = kTolAlgebra) const;
  bool is_isometry(double tol = kTolAlgebra) const;  // adjoint * self == id
  bool approx_equal(const Matrix& rhs, double tol = kTolAlgebra) const;
};

// Pure state over an ordered list of named registers. Mixed-radix indexing,
// first-listed register most significant.
class StateVector {
 public:
  StateVector() = default;
  StateVector(std::vector<RegisterSpec> regs, std::vector<cplx> amplitudes);

  static StateVector basis(std::vector<RegisterSpec> regs,
                           const std::vector<std::size_t>& indices);
  // Single-register kets.
  static StateVector ket(const RegisterSpec& reg, std::size_t index);
  static StateVector ket(const RegisterSpec& reg, std::vector<cplx> amps);

  const std::vector<RegisterSpec>& registers() const { return regs_; }
  const std::vector<cplx>& amplitudes() const { return amps_; }
  std::vector<cplx>& amplitudes() { return amps_; }
  std::size_t dimension() const { return amps_.size(); }

  bool has_register(const std::string& name) const;
  std::size_t position(const std::string& name) const;  // throws ShapeError
  const RegisterSpec& reg(const std::string& name) const;
  // Stride of a register in the global index (product of dims to its right).
  std::size_t stride(std::size_t position) const;

  double norm() const;
  StateVector normalized() const;

  // Amplitude of one computational basis assignment (indices in register order).
  cplx amplitude(const std::vector<std::size_t>& indices) const;
  std::size_t flatten(const std::vector<std::size_t>& indices) const;
  std::vector<std::size_t> unflatten(std::size_t global) const;

  StateVector& operator+=(const StateVector& rhs);  // identical register lists
  StateVector& operator-=(const StateVector& rhs);
  StateVector& operator*=(cplx scale);
  friend StateVector operator+(StateVector lhs, const StateVector& rhs) { return lhs += rhs; }
  friend StateVector operator-(StateVector lhs, const StateVector& rhs) { return lhs -= rhs; }
  friend StateVector operator*(cplx scale, StateVector s) { return s *= scale; }

 private:
  std::vector<RegisterSpec> regs_;
  std::vector<cplx> amps_;
};

// Unitary (square) or isometry (tall) acting on named target registers.
// The matrix row/column index runs mixed-radix over `targets` in the listed
// order, most significant first. An isometry declares `outputs`: the
// registers that replace the targets (inserted at the first target's slot).
struct LinearOp {
  std::vector<std::string> targets;
  std::vector<RegisterSpec> outputs;  // empty => square unitary on targets
  Matrix matrix;

  bool is_isometry_op() const { return !outputs.empty(); }
};

// LinearOp builders.
LinearOp make_unitary(std::vector<std::string> targets, Matrix m);
LinearOp make_isometry(std::vector<std::string> targets,
                       std::vector<RegisterSpec> outputs, Matrix m);
// Block unitary applying branch `cases[i]` to the remaining targets when the
// control register holds i. Targets list = [control, rest...]; missing case
// indices act as identity.
LinearOp controlled(const std::string& control, std::size_t control_dim,
                    std::vector<std::string> rest, std::size_t rest_dim,
                    const std::vector<std::pair<std::size_t, Matrix>>& cases);

// Deterministic unitary with U|inputs[j]> = |outputs[j]|; both lists
// orthonormal, completed by Gram-Schmidt over the computational basis.
Matrix unitary_extension(const std::vector<std::vector<cplx>>& inputs,
                         const std::vector<std::vector<cplx>>& outputs,
                         std::size_t dim);

// Projective measurement on a register subset. `basis` holds one orthonormal
// StateVector fragment per outcome, each defined over exactly the target
// registers in target order. A partial basis must set `complete_with_other`;
// the complement subspace then forms one catch-all outcome.
struct MeasurementSpec {
  std::vector<std::string> targets;
  std::vector<std::string> outcome_labels;
  std::vector<StateVector> basis;
  bool complete_with_other = false;
  std::string other_label = "other";
  std::string record_register;  // optional: set to outcome index by measure_sample

  void validate() const;
  std::size_t outcome_count() const;  // includes catch-all when present
  std::string label_at(std::size_t outcome) const;
};

// Full computational-basis measurement of one register; outcome labels are
// the register's basis labels.
MeasurementSpec computational_measurement(const RegisterSpec& reg);

using Distribution = std::vector<std::pair<std::string, double>>;
double prob_of(const Distribution& dist, const std::string& label);

// Core operations ------------------------------------------------------

StateVector tensor(const std::vector<StateVector>& parts);
StateVector apply(const StateVector& state, const LinearOp& op);
cplx inner_product(const StateVector& bra, const StateVector& ket);
StateVector permute(const StateVector& state, const std::vector<std::string>& order);

Distribution outcome_distribution(const StateVector& state, const MeasurementSpec& m);

struct SampleResult {
  std::string outcome;
  std::size_t outcome_index = 0;
  double probability = 0.0;
  StateVector post;  // projected and renormalised
};
SampleResult measure_sample(const StateVector& state, const MeasurementSpec& m,
                            SplitMix64& rng);
// Force a specific outcome; probability below kTolZero -> ImpossibleOutcome.
SampleResult postselect(const StateVector& state, const MeasurementSpec& m,
                        const std::string& outcome);

// Probability that `m` yields outcome index `o` AND each (register, index)
// condition holds; all projectors must be on distinct registers.
double joint_probability(const StateVector& state, const MeasurementSpec& m,
                         std::size_t outcome,
                         const std::vector<std::pair<std::string, std::size_t>>& conditions);
// Marginal probability of the conditions alone.
double conditions_probability(const StateVector& state,
                              const std::vector<std::pair<std::string, std::size_t>>& conditions);

// Unitary dilation of `m`: isometry from the targets into targets + a fresh
// record register of dimension outcome_count(), mapping |psi> to
// sum_o (P_o|psi>) (x) |o>. Reading the record in its computational basis
// reproduces outcome_distribution exactly.
LinearOp dilate(const MeasurementSpec& m, const std::string& record_name);

// Reduced density matrix of one register (row-major, dim x dim).
Matrix reduced_density(const StateVector& state, const std::string& reg);

// Embed an op into the full register list of `regs` as a square matrix
// (identity on untouched registers). Isometries are rejected.
Matrix embed(const LinearOp& op, const std::vector<RegisterSpec>& regs);

// True when the op matrix is block-diagonal in the computational basis of
// `reg` (one of op.targets): it never moves amplitude between distinct basis
// indices of that register, so classical records held there survive it.
bool preserves_register_basis(const LinearOp& op,
                              const std::vector<RegisterSpec>& regs,
                              const std::string& reg);
// Same question for a measurement: every outcome projector must commute with
// the basis projectors of `reg`.
bool measurement_preserves_register_basis(const MeasurementSpec& m,
                                          const std::vector<RegisterSpec>& regs,
                                          const std::string& reg);

void check_register_list(const std::vector<RegisterSpec>& regs);

}  // namespace friendsim

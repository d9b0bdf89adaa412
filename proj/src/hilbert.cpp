#include "friendsim/hilbert.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace friendsim {

namespace {

std::string join_names(const std::vector<std::string>& names) {
  std::string out;
  for (const auto& n : names) {
    if (!out.empty()) out += ",";
    out += n;
  }
  return out;
}

}  // namespace

std::string role_name(RegisterRole role) {
  switch (role) {
    case RegisterRole::System: return "system";
    case RegisterRole::Memory: return "memory";
    case RegisterRole::Environment: return "environment";
    case RegisterRole::Notebook: return "notebook";
    case RegisterRole::Record: return "record";
  }
  return "system";
}

RegisterRole role_from_name(const std::string& name) {
  if (name == "system") return RegisterRole::System;
  if (name == "memory") return RegisterRole::Memory;
  if (name == "environment") return RegisterRole::Environment;
  if (name == "notebook") return RegisterRole::Notebook;
  if (name == "record") return RegisterRole::Record;
  throw InvalidSpec("unknown register role: " + name);
}

void RegisterSpec::validate() const {
  if (name.empty()) throw InvalidSpec("register with empty name");
  if (dimension < 2)
    throw ShapeError("register " + name + ": dimension must be >= 2");
  if (!basis_labels.empty() && basis_labels.size() != dimension)
    throw ShapeError("register " + name + ": " + std::to_string(basis_labels.size()) +
                     " labels for dimension " + std::to_string(dimension));
}

std::size_t RegisterSpec::index_of_label(const std::string& label) const {
  if (basis_labels.empty()) {
    for (std::size_t i = 0; i < dimension; ++i)
      if (label == std::to_string(i)) return i;
  } else {
    for (std::size_t i = 0; i < basis_labels.size(); ++i)
      if (basis_labels[i] == label) return i;
  }
  throw InvalidSpec("register " + name + ": no basis label \"" + label + "\"");
}

std::string RegisterSpec::label_of(std::size_t index) const {
  if (index >= dimension)
    throw ShapeError("register " + name + ": index " + std::to_string(index) +
                     " out of range");
  if (basis_labels.empty()) return std::to_string(index);
  return basis_labels[index];
}

// Matrix ----------------------------------------------------------------

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1.0;
  return m;
}

Matrix Matrix::adjoint() const {
  Matrix m(cols, rows);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) m.at(c, r) = std::conj(at(r, c));
  return m;
}

Matrix Matrix::mul(const Matrix& rhs) const {
  if (cols != rhs.rows) throw ShapeError("matrix product shape mismatch");
  Matrix m(rows, rhs.cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t k = 0; k < cols; ++k) {
      const cplx v = at(r, k);
      if (v == cplx{}) continue;
      for (std::size_t c = 0; c < rhs.cols; ++c) m.at(r, c) += v * rhs.at(k, c);
    }
  return m;
}

bool Matrix::is_isometry(double tol) const {
  const Matrix gram = adjoint().mul(*this);
  return gram.approx_equal(Matrix::identity(cols), tol);
}

bool Matrix::is_unitary(double tol) const {
  return rows == cols && is_isometry(tol);
}

bool Matrix::approx_equal(const Matrix& rhs, double tol) const {
  if (rows != rhs.rows || cols != rhs.cols) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::abs(a[i] - rhs.a[i]) > tol) return false;
  return true;
}

// StateVector ------------------------------------------------------------

void check_register_list(const std::vector<RegisterSpec>& regs) {
  std::set<std::string> seen;
  std::size_t dim = 1;
  for (const auto& r : regs) {
    r.validate();
    if (!seen.insert(r.name).second)
      throw DuplicateRegister("duplicate register name: " + r.name);
    if (dim > kMaxGlobalDimension / r.dimension)
      throw ShapeError("global dimension exceeds cap 2^20");
    dim *= r.dimension;
  }
}

StateVector::StateVector(std::vector<RegisterSpec> regs, std::vector<cplx> amplitudes)
    : regs_(std::move(regs)), amps_(std::move(amplitudes)) {
  check_register_list(regs_);
  std::size_t dim = 1;
  for (const auto& r : regs_) dim *= r.dimension;
  if (amps_.size() != dim)
    throw ShapeError("amplitude count " + std::to_string(amps_.size()) +
                     " does not match register dimension " + std::to_string(dim));
}

StateVector StateVector::basis(std::vector<RegisterSpec> regs,
                               const std::vector<std::size_t>& indices) {
  check_register_list(regs);
  if (indices.size() != regs.size())
    throw ShapeError("basis index count does not match register count");
  std::size_t dim = 1;
  for (const auto& r : regs) dim *= r.dimension;
  std::vector<cplx> amps(dim);
  StateVector s(std::move(regs), std::move(amps));
  s.amps_[s.flatten(indices)] = 1.0;
  return s;
}

StateVector StateVector::ket(const RegisterSpec& reg, std::size_t index) {
  return basis({reg}, {index});
}

StateVector StateVector::ket(const RegisterSpec& reg, std::vector<cplx> amps) {
  return StateVector({reg}, std::move(amps));
}

bool StateVector::has_register(const std::string& name) const {
  for (const auto& r : regs_)
    if (r.name == name) return true;
  return false;
}

std::size_t StateVector::position(const std::string& name) const {
  for (std::size_t i = 0; i < regs_.size(); ++i)
    if (regs_[i].name == name) return i;
  throw ShapeError("no register named " + name);
}

const RegisterSpec& StateVector::reg(const std::string& name) const {
  return regs_[position(name)];
}

std::size_t StateVector::stride(std::size_t position) const {
  std::size_t s = 1;
  for (std::size_t i = position + 1; i < regs_.size(); ++i) s *= regs_[i].dimension;
  return s;
}

double StateVector::norm() const {
  double n2 = 0.0;
  for (const auto& a : amps_) n2 += std::norm(a);
  return std::sqrt(n2);
}

StateVector StateVector::normalized() const {
  const double n = norm();
  if (n < kTolZero) throw ShapeError("cannot normalise a zero state");
  StateVector out = *this;
  for (auto& a : out.amps_) a /= n;
  return out;
}

std::size_t StateVector::flatten(const std::vector<std::size_t>& indices) const {
  if (indices.size() != regs_.size())
    throw ShapeError("index count does not match register count");
  std::size_t g = 0;
  for (std::size_t i = 0; i < regs_.size(); ++i) {
    if (indices[i] >= regs_[i].dimension)
      throw ShapeError("basis index out of range for register " + regs_[i].name);
    g = g * regs_[i].dimension + indices[i];
  }
  return g;
}

std::vector<std::size_t> StateVector::unflatten(std::size_t global) const {
  std::vector<std::size_t> idx(regs_.size());
  for (std::size_t i = regs_.size(); i-- > 0;) {
    idx[i] = global % regs_[i].dimension;
    global /= regs_[i].dimension;
  }
  return idx;
}

cplx StateVector::amplitude(const std::vector<std::size_t>& indices) const {
  return amps_[flatten(indices)];
}

static void require_same_registers(const StateVector& a, const StateVector& b) {
  const auto& ra = a.registers();
  const auto& rb = b.registers();
  if (ra.size() != rb.size())
    throw ShapeError("register lists differ in length");
  for (std::size_t i = 0; i < ra.size(); ++i)
    if (ra[i].name != rb[i].name || ra[i].dimension != rb[i].dimension)
      throw ShapeError("register lists differ at position " + std::to_string(i) +
                       " (" + ra[i].name + " vs " + rb[i].name + ")");
}

StateVector& StateVector::operator+=(const StateVector& rhs) {
  require_same_registers(*this, rhs);
  for (std::size_t i = 0; i < amps_.size(); ++i) amps_[i] += rhs.amps_[i];
  return *this;
}

StateVector& StateVector::operator-=(const StateVector& rhs) {
  require_same_registers(*this, rhs);
  for (std::size_t i = 0; i < amps_.size(); ++i) amps_[i] -= rhs.amps_[i];
  return *this;
}

StateVector& StateVector::operator*=(cplx scale) {
  for (auto& a : amps_) a *= scale;
  return *this;
}

// Subspace indexing ------------------------------------------------------

namespace {

// Precomputed offsets so that global = target_offsets[t] + rest_offsets[r].
// Target mixed-radix index runs over the op's target order, most significant
// first; rest runs over the remaining registers in state order.
struct SubspaceIndexer {
  std::vector<std::size_t> target_offsets;
  std::vector<std::size_t> rest_offsets;

  SubspaceIndexer(const StateVector& s, const std::vector<std::string>& targets) {
    std::vector<std::size_t> tpos;
    tpos.reserve(targets.size());
    std::set<std::string> tset;
    for (const auto& name : targets) {
      if (!tset.insert(name).second)
        throw ShapeError("operation lists register twice: " + name);
      tpos.push_back(s.position(name));
    }
    const auto& regs = s.registers();

    std::size_t tdim = 1;
    for (auto p : tpos) tdim *= regs[p].dimension;
    target_offsets.assign(tdim, 0);
    for (std::size_t k = 0; k < tdim; ++k) {
      std::size_t rem = k, off = 0;
      for (std::size_t j = tpos.size(); j-- > 0;) {
        const std::size_t d = regs[tpos[j]].dimension;
        off += (rem % d) * s.stride(tpos[j]);
        rem /= d;
      }
      target_offsets[k] = off;
    }

    std::vector<std::size_t> rpos;
    for (std::size_t i = 0; i < regs.size(); ++i)
      if (std::find(tpos.begin(), tpos.end(), i) == tpos.end()) rpos.push_back(i);
    std::size_t rdim = 1;
    for (auto p : rpos) rdim *= regs[p].dimension;
    rest_offsets.assign(rdim, 0);
    for (std::size_t k = 0; k < rdim; ++k) {
      std::size_t rem = k, off = 0;
      for (std::size_t j = rpos.size(); j-- > 0;) {
        const std::size_t d = regs[rpos[j]].dimension;
        off += (rem % d) * s.stride(rpos[j]);
        rem /= d;
      }
      rest_offsets[k] = off;
    }
  }

  std::size_t target_dim() const { return target_offsets.size(); }
  std::size_t rest_dim() const { return rest_offsets.size(); }
};

void require_fragment_shape(const MeasurementSpec& m, const StateVector& global,
                            const StateVector& fragment) {
  const auto& fregs = fragment.registers();
  if (fregs.size() != m.targets.size())
    throw ShapeError("measurement basis fragment register count mismatch");
  for (std::size_t i = 0; i < fregs.size(); ++i) {
    if (fregs[i].name != m.targets[i])
      throw ShapeError("measurement basis fragment register order must match targets");
    if (fregs[i].dimension != global.reg(m.targets[i]).dimension)
      throw ShapeError("measurement basis fragment dimension mismatch for " + fregs[i].name);
  }
}

}  // namespace

// tensor / apply / inner_product ------------------------------------------

StateVector tensor(const std::vector<StateVector>& parts) {
  if (parts.empty()) throw ShapeError("tensor of zero states");
  std::vector<RegisterSpec> regs;
  std::size_t dim = 1;
  for (const auto& p : parts) {
    for (const auto& r : p.registers()) regs.push_back(r);
    dim *= p.dimension();
  }
  check_register_list(regs);
  std::vector<cplx> amps{cplx{1.0}};
  amps.reserve(dim);
  for (const auto& p : parts) {
    std::vector<cplx> next(amps.size() * p.dimension());
    for (std::size_t i = 0; i < amps.size(); ++i)
      for (std::size_t j = 0; j < p.dimension(); ++j)
        next[i * p.dimension() + j] = amps[i] * p.amplitudes()[j];
    amps = std::move(next);
  }
  return StateVector(std::move(regs), std::move(amps));
}

LinearOp make_unitary(std::vector<std::string> targets, Matrix m) {
  if (m.rows != m.cols) throw InvalidOperator("unitary op must be square");
  return LinearOp{std::move(targets), {}, std::move(m)};
}

LinearOp make_isometry(std::vector<std::string> targets,
                       std::vector<RegisterSpec> outputs, Matrix m) {
  std::size_t out_dim = 1;
  for (const auto& r : outputs) {
    r.validate();
    out_dim *= r.dimension;
  }
  if (m.rows != out_dim)
    throw ShapeError("isometry rows do not match declared output registers");
  return LinearOp{std::move(targets), std::move(outputs), std::move(m)};
}

LinearOp controlled(const std::string& control, std::size_t control_dim,
                    std::vector<std::string> rest, std::size_t rest_dim,
                    const std::vector<std::pair<std::size_t, Matrix>>& cases) {
  Matrix m(control_dim * rest_dim, control_dim * rest_dim);
  std::vector<const Matrix*> branch(control_dim, nullptr);
  for (const auto& [idx, mat] : cases) {
    if (idx >= control_dim) throw ShapeError("controlled: case index out of range");
    if (mat.rows != rest_dim || mat.cols != rest_dim)
      throw ShapeError("controlled: case matrix shape mismatch");
    branch[idx] = &mat;
  }
  for (std::size_t c = 0; c < control_dim; ++c) {
    for (std::size_t r = 0; r < rest_dim; ++r)
      for (std::size_t k = 0; k < rest_dim; ++k)
        m.at(c * rest_dim + r, c * rest_dim + k) =
            branch[c] ? branch[c]->at(r, k) : (r == k ? cplx{1.0} : cplx{});
  }
  std::vector<std::string> targets{control};
  for (auto& r : rest) targets.push_back(std::move(r));
  return make_unitary(std::move(targets), std::move(m));
}

namespace {

double vec_norm2(const std::vector<cplx>& v) {
  double n = 0.0;
  for (const auto& a : v) n += std::norm(a);
  return n;
}

cplx vec_dot(const std::vector<cplx>& bra, const std::vector<cplx>& ket) {
  cplx s{};
  for (std::size_t i = 0; i < bra.size(); ++i) s += std::conj(bra[i]) * ket[i];
  return s;
}

void check_orthonormal(const std::vector<std::vector<cplx>>& vs, const char* what) {
  for (std::size_t i = 0; i < vs.size(); ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      const cplx d = vec_dot(vs[i], vs[j]);
      const cplx want = (i == j) ? cplx{1.0} : cplx{};
      if (std::abs(d - want) > kTolAlgebra)
        throw InvalidOperator(std::string(what) + " vectors are not orthonormal");
    }
}

std::vector<std::vector<cplx>> complete_basis(std::vector<std::vector<cplx>> vs,
                                              std::size_t dim) {
  for (std::size_t e = 0; e < dim && vs.size() < dim; ++e) {
    std::vector<cplx> v(dim);
    v[e] = 1.0;
    for (const auto& u : vs) {
      const cplx c = vec_dot(u, v);
      for (std::size_t i = 0; i < dim; ++i) v[i] -= c * u[i];
    }
    const double n = std::sqrt(vec_norm2(v));
    if (n > 1e-6) {
      for (auto& a : v) a /= n;
      vs.push_back(std::move(v));
    }
  }
  if (vs.size() != dim) throw InvalidOperator("basis completion failed");
  return vs;
}

}  // namespace

Matrix unitary_extension(const std::vector<std::vector<cplx>>& inputs,
                         const std::vector<std::vector<cplx>>& outputs,
                         std::size_t dim) {
  if (inputs.size() != outputs.size())
    throw ShapeError("unitary_extension: input/output count mismatch");
  for (const auto& v : inputs)
    if (v.size() != dim) throw ShapeError("unitary_extension: input dimension mismatch");
  for (const auto& v : outputs)
    if (v.size() != dim) throw ShapeError("unitary_extension: output dimension mismatch");
  check_orthonormal(inputs, "input");
  check_orthonormal(outputs, "output");
  const auto full_in = complete_basis(inputs, dim);
  const auto full_out = complete_basis(outputs, dim);
  Matrix u(dim, dim);
  for (std::size_t j = 0; j < dim; ++j)
    for (std::size_t r = 0; r < dim; ++r)
      for (std::size_t c = 0; c < dim; ++c)
        u.at(r, c) += full_out[j][r] * std::conj(full_in[j][c]);
  return u;
}

StateVector apply(const StateVector& state, const LinearOp& op) {
  const SubspaceIndexer ix(state, op.targets);
  const std::size_t in_dim = ix.target_dim();
  if (op.matrix.cols != in_dim)
    throw ShapeError("operator columns " + std::to_string(op.matrix.cols) +
                     " do not match target dimension " + std::to_string(in_dim) +
                     " of (" + join_names(op.targets) + ")");

  if (!op.is_isometry_op()) {
    if (op.matrix.rows != in_dim)
      throw InvalidOperator("square op expected on (" + join_names(op.targets) + ")");
    if (!op.matrix.is_unitary())
      throw InvalidOperator("operator on (" + join_names(op.targets) + ") is not unitary");
    StateVector out = state;
    std::vector<cplx> local(in_dim), image(in_dim);
    for (std::size_t r = 0; r < ix.rest_dim(); ++r) {
      const std::size_t base = ix.rest_offsets[r];
      for (std::size_t k = 0; k < in_dim; ++k)
        local[k] = state.amplitudes()[base + ix.target_offsets[k]];
      for (std::size_t i = 0; i < in_dim; ++i) {
        cplx s{};
        for (std::size_t k = 0; k < in_dim; ++k) s += op.matrix.at(i, k) * local[k];
        image[i] = s;
      }
      for (std::size_t i = 0; i < in_dim; ++i)
        out.amplitudes()[base + ix.target_offsets[i]] = image[i];
    }
    return out;
  }

  // Isometry: targets are removed, outputs inserted at the first target slot.
  if (!op.matrix.is_isometry())
    throw InvalidOperator("operator on (" + join_names(op.targets) + ") is not an isometry");
  for (const auto& o : op.outputs) {
    bool was_target = std::find(op.targets.begin(), op.targets.end(), o.name) != op.targets.end();
    if (!was_target && state.has_register(o.name))
      throw DuplicateRegister("isometry output register already present: " + o.name);
  }

  const auto& regs = state.registers();
  const std::size_t insert_at = state.position(op.targets.front());
  std::vector<RegisterSpec> new_regs;
  for (std::size_t i = 0; i < regs.size(); ++i) {
    if (i == insert_at)
      for (const auto& o : op.outputs) new_regs.push_back(o);
    if (std::find(op.targets.begin(), op.targets.end(), regs[i].name) == op.targets.end())
      new_regs.push_back(regs[i]);
  }
  check_register_list(new_regs);

  std::size_t out_tdim = 1;
  for (const auto& o : op.outputs) out_tdim *= o.dimension;
  std::size_t new_dim = 1;
  for (const auto& r : new_regs) new_dim *= r.dimension;

  std::vector<cplx> new_amps(new_dim);
  StateVector out(new_regs, std::move(new_amps));
  std::vector<std::string> out_names;
  for (const auto& o : op.outputs) out_names.push_back(o.name);
  const SubspaceIndexer ox(out, out_names);
  if (ox.rest_dim() != ix.rest_dim())
    throw ShapeError("isometry rest-space bookkeeping mismatch");

  std::vector<cplx> local(in_dim), image(out_tdim);
  for (std::size_t r = 0; r < ix.rest_dim(); ++r) {
    for (std::size_t k = 0; k < in_dim; ++k)
      local[k] = state.amplitudes()[ix.rest_offsets[r] + ix.target_offsets[k]];
    for (std::size_t i = 0; i < out_tdim; ++i) {
      cplx s{};
      for (std::size_t k = 0; k < in_dim; ++k) s += op.matrix.at(i, k) * local[k];
      image[i] = s;
    }
    for (std::size_t i = 0; i < out_tdim; ++i)
      out.amplitudes()[ox.rest_offsets[r] + ox.target_offsets[i]] = image[i];
  }
  return out;
}

cplx inner_product(const StateVector& bra, const StateVector& ket) {
  require_same_registers(bra, ket);
  return vec_dot(bra.amplitudes(), ket.amplitudes());
}

StateVector permute(const StateVector& state, const std::vector<std::string>& order) {
  if (order.size() != state.registers().size())
    throw ShapeError("permute: register count mismatch");
  std::vector<RegisterSpec> new_regs;
  new_regs.reserve(order.size());
  for (const auto& name : order) new_regs.push_back(state.reg(name));
  check_register_list(new_regs);
  std::vector<cplx> amps(state.dimension());
  StateVector out(std::move(new_regs), std::move(amps));
  std::vector<std::size_t> old_idx(order.size());
  for (std::size_t g = 0; g < state.dimension(); ++g) {
    const auto idx = out.unflatten(g);
    for (std::size_t i = 0; i < order.size(); ++i)
      old_idx[state.position(order[i])] = idx[i];
    out.amplitudes()[g] = state.amplitudes()[state.flatten(old_idx)];
  }
  return out;
}

// Measurements ------------------------------------------------------------

void MeasurementSpec::validate() const {
  if (targets.empty()) throw InvalidSpec("measurement with no target registers");
  if (basis.size() != outcome_labels.size())
    throw InvalidSpec("measurement outcome label count does not match basis");
  if (basis.empty()) throw InvalidSpec("measurement with no basis vectors");
  for (std::size_t i = 0; i < basis.size(); ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      const cplx d = vec_dot(basis[i].amplitudes(), basis[j].amplitudes());
      const cplx want = (i == j) ? cplx{1.0} : cplx{};
      if (std::abs(d - want) > kTolAlgebra)
        throw InvalidSpec("measurement basis vectors are not orthonormal");
    }
}

std::size_t MeasurementSpec::outcome_count() const {
  return basis.size() + (complete_with_other ? 1 : 0);
}

std::string MeasurementSpec::label_at(std::size_t outcome) const {
  if (outcome < outcome_labels.size()) return outcome_labels[outcome];
  if (complete_with_other && outcome == outcome_labels.size()) return other_label;
  throw ShapeError("outcome index out of range");
}

MeasurementSpec computational_measurement(const RegisterSpec& reg) {
  MeasurementSpec m;
  m.targets = {reg.name};
  for (std::size_t i = 0; i < reg.dimension; ++i) {
    m.outcome_labels.push_back(reg.label_of(i));
    m.basis.push_back(StateVector::ket(reg, i));
  }
  return m;
}

double prob_of(const Distribution& dist, const std::string& label) {
  for (const auto& [l, p] : dist)
    if (l == label) return p;
  return 0.0;
}

namespace {

// Shared projection workhorse. Computes, for every declared outcome, the
// per-rest-block overlap coefficients; from those both the distribution and
// the projected states follow.
struct MeasurementContext {
  const MeasurementSpec& m;
  const StateVector& state;
  SubspaceIndexer ix;
  std::size_t tdim;

  MeasurementContext(const StateVector& s, const MeasurementSpec& spec)
      : m(spec), state(s), ix(s, spec.targets), tdim(ix.target_dim()) {
    m.validate();
    for (const auto& b : m.basis) require_fragment_shape(m, s, b);
    if (!m.complete_with_other && m.basis.size() != tdim)
      throw IncompleteBasis("measurement basis spans " + std::to_string(m.basis.size()) +
                            " of " + std::to_string(tdim) +
                            " dimensions and declares no catch-all outcome");
    if (m.complete_with_other && m.basis.size() > tdim)
      throw InvalidSpec("measurement basis larger than target space");
  }

  double outcome_probability(std::size_t o) const {
    if (o < m.basis.size()) {
      const auto& v = m.basis[o].amplitudes();
      double p = 0.0;
      for (std::size_t r = 0; r < ix.rest_dim(); ++r) {
        cplx c{};
        for (std::size_t k = 0; k < tdim; ++k)
          c += std::conj(v[k]) * state.amplitudes()[ix.rest_offsets[r] + ix.target_offsets[k]];
        p += std::norm(c);
      }
      return p;
    }
    // Catch-all: residual mass after removing every declared outcome.
    double p = 0.0;
    std::vector<cplx> block(tdim);
    for (std::size_t r = 0; r < ix.rest_dim(); ++r) {
      for (std::size_t k = 0; k < tdim; ++k)
        block[k] = state.amplitudes()[ix.rest_offsets[r] + ix.target_offsets[k]];
      for (const auto& bvec : m.basis) {
        const cplx c = vec_dot(bvec.amplitudes(), block);
        for (std::size_t k = 0; k < tdim; ++k) block[k] -= c * bvec.amplitudes()[k];
      }
      p += vec_norm2(block);
    }
    return p;
  }

  // Unnormalised projection onto outcome o.
  StateVector project(std::size_t o) const {
    StateVector out = state;
    if (o < m.basis.size()) {
      const auto& v = m.basis[o].amplitudes();
      for (std::size_t r = 0; r < ix.rest_dim(); ++r) {
        cplx c{};
        for (std::size_t k = 0; k < tdim; ++k)
          c += std::conj(v[k]) * state.amplitudes()[ix.rest_offsets[r] + ix.target_offsets[k]];
        for (std::size_t k = 0; k < tdim; ++k)
          out.amplitudes()[ix.rest_offsets[r] + ix.target_offsets[k]] = c * v[k];
      }
      return out;
    }
    std::vector<cplx> block(tdim);
    for (std::size_t r = 0; r < ix.rest_dim(); ++r) {
      for (std::size_t k = 0; k < tdim; ++k)
        block[k] = state.amplitudes()[ix.rest_offsets[r] + ix.target_offsets[k]];
      for (const auto& bvec : m.basis) {
        const cplx c = vec_dot(bvec.amplitudes(), block);
        for (std::size_t k = 0; k < tdim; ++k) block[k] -= c * bvec.amplitudes()[k];
      }
      for (std::size_t k = 0; k < tdim; ++k)
        out.amplitudes()[ix.rest_offsets[r] + ix.target_offsets[k]] = block[k];
    }
    return out;
  }
};

}  // namespace

Distribution outcome_distribution(const StateVector& state, const MeasurementSpec& m) {
  const MeasurementContext ctx(state, m);
  Distribution dist;
  double total = 0.0;
  for (std::size_t o = 0; o < m.outcome_count(); ++o) {
    double p = ctx.outcome_probability(o);
    if (p < kTolZero) p = 0.0;
    dist.emplace_back(m.label_at(o), p);
    total += p;
  }
  if (std::abs(total - 1.0) > kTolDistribution)
    throw ShapeError("outcome distribution sums to " + std::to_string(total) +
                     " (state not normalised?)");
  return dist;
}

namespace {

SampleResult finish_outcome(const MeasurementContext& ctx, std::size_t o, double p) {
  SampleResult res;
  res.outcome = ctx.m.label_at(o);
  res.outcome_index = o;
  res.probability = p;
  StateVector post = ctx.project(o);
  const double n = post.norm();
  if (n < kTolZero) throw ImpossibleOutcome("projection onto " + res.outcome + " annihilates state");
  for (auto& a : post.amplitudes()) a /= n;
  if (!ctx.m.record_register.empty()) {
    // Record register must hold |0>; shift it to the outcome index.
    const auto& rec = post.reg(ctx.m.record_register);
    if (rec.dimension < ctx.m.outcome_count())
      throw ShapeError("record register " + rec.name + " too small for outcome count");
    Matrix shift(rec.dimension, rec.dimension);
    for (std::size_t i = 0; i < rec.dimension; ++i)
      shift.at((i + o) % rec.dimension, i) = 1.0;
    post = apply(post, make_unitary({rec.name}, std::move(shift)));
  }
  res.post = std::move(post);
  return res;
}

}  // namespace

SampleResult measure_sample(const StateVector& state, const MeasurementSpec& m,
                            SplitMix64& rng) {
  const MeasurementContext ctx(state, m);
  std::vector<double> probs(m.outcome_count());
  double total = 0.0;
  for (std::size_t o = 0; o < probs.size(); ++o) {
    probs[o] = ctx.outcome_probability(o);
    if (probs[o] < kTolZero) probs[o] = 0.0;
    total += probs[o];
  }
  if (std::abs(total - 1.0) > kTolDistribution)
    throw ShapeError("sampling from unnormalised distribution");
  const double u = rng.next_double() * total;
  double cum = 0.0;
  std::size_t chosen = probs.size();
  for (std::size_t o = 0; o < probs.size(); ++o) {
    if (probs[o] == 0.0) continue;
    cum += probs[o];
    chosen = o;
    if (u < cum) break;
  }
  if (chosen == probs.size()) throw ShapeError("no outcome with nonzero probability");
  return finish_outcome(ctx, chosen, probs[chosen]);
}

SampleResult postselect(const StateVector& state, const MeasurementSpec& m,
                        const std::string& outcome) {
  const MeasurementContext ctx(state, m);
  for (std::size_t o = 0; o < m.outcome_count(); ++o) {
    if (m.label_at(o) != outcome) continue;
    const double p = ctx.outcome_probability(o);
    if (p < kTolZero)
      throw ImpossibleOutcome("outcome " + outcome + " has probability zero");
    return finish_outcome(ctx, o, p);
  }
  throw InvalidSpec("measurement has no outcome labelled " + outcome);
}

static StateVector apply_conditions(
    const StateVector& state,
    const std::vector<std::pair<std::string, std::size_t>>& conditions) {
  StateVector out = state;
  std::set<std::string> seen;
  for (const auto& [reg, idx] : conditions) {
    if (!seen.insert(reg).second)
      throw ShapeError("duplicate condition register: " + reg);
    const std::size_t pos = out.position(reg);
    const std::size_t dim = out.registers()[pos].dimension;
    if (idx >= dim) throw ShapeError("condition index out of range for " + reg);
    const std::size_t stride = out.stride(pos);
    for (std::size_t g = 0; g < out.dimension(); ++g)
      if ((g / stride) % dim != idx) out.amplitudes()[g] = 0.0;
  }
  return out;
}

double conditions_probability(
    const StateVector& state,
    const std::vector<std::pair<std::string, std::size_t>>& conditions) {
  const StateVector proj = apply_conditions(state, conditions);
  double p = vec_norm2(proj.amplitudes());
  return p < kTolZero ? 0.0 : p;
}

double joint_probability(const StateVector& state, const MeasurementSpec& m,
                         std::size_t outcome,
                         const std::vector<std::pair<std::string, std::size_t>>& conditions) {
  for (const auto& [reg, idx] : conditions) {
    (void)idx;
    if (std::find(m.targets.begin(), m.targets.end(), reg) != m.targets.end())
      throw ShapeError("condition register " + reg + " overlaps measurement target");
  }
  const StateVector proj = apply_conditions(state, conditions);
  const MeasurementContext ctx(proj, m);
  double p = ctx.outcome_probability(outcome);
  return p < kTolZero ? 0.0 : p;
}

LinearOp dilate(const MeasurementSpec& m, const std::string& record_name) {
  m.validate();
  std::size_t tdim = 1;
  std::vector<RegisterSpec> out_regs;
  // Targets keep their specs; dims taken from the basis fragments.
  if (m.basis.empty()) throw InvalidSpec("cannot dilate an empty basis");
  for (const auto& r : m.basis.front().registers()) {
    out_regs.push_back(r);
    tdim *= r.dimension;
  }
  const std::size_t k = m.outcome_count();
  if (!m.complete_with_other && m.basis.size() != tdim)
    throw IncompleteBasis("cannot dilate a partial basis without a catch-all outcome");

  RegisterSpec rec;
  rec.name = record_name;
  rec.dimension = std::max<std::size_t>(k, 2);
  rec.role = RegisterRole::Record;
  for (std::size_t o = 0; o < rec.dimension; ++o)
    rec.basis_labels.push_back(o < k ? m.label_at(o) : "unused-" + std::to_string(o));
  out_regs.push_back(rec);

  // Projector matrices on the target space.
  std::vector<Matrix> projectors;
  Matrix declared_sum(tdim, tdim);
  for (const auto& b : m.basis) {
    Matrix p(tdim, tdim);
    for (std::size_t r = 0; r < tdim; ++r)
      for (std::size_t c = 0; c < tdim; ++c)
        p.at(r, c) = b.amplitudes()[r] * std::conj(b.amplitudes()[c]);
    for (std::size_t i = 0; i < p.a.size(); ++i) declared_sum.a[i] += p.a[i];
    projectors.push_back(std::move(p));
  }
  if (m.complete_with_other) {
    Matrix other = Matrix::identity(tdim);
    for (std::size_t i = 0; i < other.a.size(); ++i) other.a[i] -= declared_sum.a[i];
    projectors.push_back(std::move(other));
  }

  Matrix v(tdim * rec.dimension, tdim);
  for (std::size_t o = 0; o < projectors.size(); ++o)
    for (std::size_t r = 0; r < tdim; ++r)
      for (std::size_t c = 0; c < tdim; ++c)
        v.at(r * rec.dimension + o, c) = projectors[o].at(r, c);
  return make_isometry(m.targets, std::move(out_regs), std::move(v));
}

Matrix reduced_density(const StateVector& state, const std::string& reg) {
  const SubspaceIndexer ix(state, {reg});
  const std::size_t d = ix.target_dim();
  Matrix rho(d, d);
  for (std::size_t r = 0; r < ix.rest_dim(); ++r)
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j)
        rho.at(i, j) += state.amplitudes()[ix.rest_offsets[r] + ix.target_offsets[i]] *
                        std::conj(state.amplitudes()[ix.rest_offsets[r] + ix.target_offsets[j]]);
  return rho;
}

Matrix embed(const LinearOp& op, const std::vector<RegisterSpec>& regs) {
  if (op.is_isometry_op()) throw InvalidOperator("cannot embed an isometry");
  check_register_list(regs);
  std::size_t dim = 1;
  for (const auto& r : regs) dim *= r.dimension;
  std::vector<cplx> zeros(dim);
  const StateVector probe(regs, std::move(zeros));
  const SubspaceIndexer ix(probe, op.targets);
  if (op.matrix.cols != ix.target_dim())
    throw ShapeError("embed: operator does not match register dimensions");
  Matrix full(dim, dim);
  for (std::size_t r = 0; r < ix.rest_dim(); ++r)
    for (std::size_t i = 0; i < ix.target_dim(); ++i)
      for (std::size_t j = 0; j < ix.target_dim(); ++j)
        full.at(ix.rest_offsets[r] + ix.target_offsets[i],
                ix.rest_offsets[r] + ix.target_offsets[j]) = op.matrix.at(i, j);
  return full;
}

bool preserves_register_basis(const LinearOp& op,
                              const std::vector<RegisterSpec>& regs,
                              const std::string& reg) {
  const auto it = std::find(op.targets.begin(), op.targets.end(), reg);
  if (it == op.targets.end()) return !op.is_isometry_op();
  if (op.is_isometry_op()) return false;

  // Digit of `reg` inside the op's local mixed-radix index.
  std::vector<std::size_t> dims;
  for (const auto& t : op.targets) {
    bool found = false;
    for (const auto& r : regs)
      if (r.name == t) {
        dims.push_back(r.dimension);
        found = true;
      }
    if (!found) throw ShapeError("embed: unknown target register " + t);
  }
  const std::size_t pos = static_cast<std::size_t>(it - op.targets.begin());
  std::size_t stride = 1;
  for (std::size_t i = pos + 1; i < dims.size(); ++i) stride *= dims[i];
  const std::size_t d = dims[pos];

  for (std::size_t r = 0; r < op.matrix.rows; ++r)
    for (std::size_t c = 0; c < op.matrix.cols; ++c)
      if (std::abs(op.matrix.at(r, c)) > kTolAlgebra &&
          (r / stride) % d != (c / stride) % d)
        return false;
  return true;
}

bool measurement_preserves_register_basis(const MeasurementSpec& m,
                                          const std::vector<RegisterSpec>& regs,
                                          const std::string& reg) {
  if (std::find(m.targets.begin(), m.targets.end(), reg) == m.targets.end())
    return true;
  (void)regs;
  for (const auto& b : m.basis) {
    const std::size_t pos = b.position(reg);
    const std::size_t d = b.registers()[pos].dimension;
    const std::size_t stride = b.stride(pos);
    std::vector<double> mass(d, 0.0);
    for (std::size_t g = 0; g < b.dimension(); ++g)
      mass[(g / stride) % d] += std::norm(b.amplitudes()[g]);
    std::size_t heavy = 0;
    for (double w : mass)
      if (w > kTolAlgebra) ++heavy;
    if (heavy > 1) return false;
  }
  return true;
}

}  // namespace friendsim

#include "oracle.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

namespace oracle {
namespace {

using cplx = std::complex<double>;
using State = std::array<cplx, kAmplitudes>;

// Bit masks, most significant first.
constexpr std::size_t kR = 32, kAM = 16, kAE = 8, kS = 4, kBM = 2, kBE = 1;
constexpr std::size_t kAliceLab = kR | kAM | kAE;
constexpr std::size_t kBobLab = kS | kBM | kBE;

const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

State initial() {
  State psi{};
  psi[0] = std::sqrt(1.0 / 3.0);
  psi[kR] = std::sqrt(2.0 / 3.0);
  return psi;
}

void cnot(State& psi, std::size_t control, std::size_t target) {
  for (std::size_t i = 0; i < kAmplitudes; ++i)
    if ((i & control) && !(i & target)) std::swap(psi[i], psi[i | target]);
}

// Hadamard on `target` where `control` is set (control = 0 -> unconditional).
void controlled_h(State& psi, std::size_t control, std::size_t target) {
  for (std::size_t i = 0; i < kAmplitudes; ++i) {
    if ((i & control) != control || (i & target)) continue;
    const cplx a = psi[i], b = psi[i | target];
    psi[i] = (a + b) * kInvSqrt2;
    psi[i | target] = (a - b) * kInvSqrt2;
  }
}

double prob_bit(const State& psi, std::size_t mask, std::size_t value) {
  double p = 0.0;
  for (std::size_t i = 0; i < kAmplitudes; ++i)
    if (((i & mask) != 0) == (value != 0)) p += std::norm(psi[i]);
  return p;
}

// Projects onto bit == value and renormalises; returns the probability.
double project_bit(State& psi, std::size_t mask, std::size_t value) {
  const double p = prob_bit(psi, mask, value);
  if (p <= 0.0) throw std::runtime_error("oracle: impossible projection");
  const double scale = 1.0 / std::sqrt(p);
  for (std::size_t i = 0; i < kAmplitudes; ++i) {
    if (((i & mask) != 0) == (value != 0))
      psi[i] *= scale;
    else
      psi[i] = 0.0;
  }
  return p;
}

// ok = (|000> - |111>)/sqrt(2) on the three lab bits, fail the + combination.
double prob_okfail(const State& psi, std::size_t lab, bool fail) {
  const double sign = fail ? 1.0 : -1.0;
  double p = 0.0;
  for (std::size_t i = 0; i < kAmplitudes; ++i) {
    if (i & lab) continue;
    const cplx c = (psi[i] + sign * psi[i | lab]) * kInvSqrt2;
    p += std::norm(c);
  }
  return p;
}

double project_okfail(State& psi, std::size_t lab, bool fail) {
  const double sign = fail ? 1.0 : -1.0;
  State out{};
  double p = 0.0;
  for (std::size_t i = 0; i < kAmplitudes; ++i) {
    if (i & lab) continue;
    const cplx c = (psi[i] + sign * psi[i | lab]) * kInvSqrt2;
    p += std::norm(c);
    out[i] = c * kInvSqrt2;
    out[i | lab] = sign * c * kInvSqrt2;
  }
  if (p <= 0.0) throw std::runtime_error("oracle: impossible projection");
  const double scale = 1.0 / std::sqrt(p);
  for (std::size_t i = 0; i < kAmplitudes; ++i) psi[i] = out[i] * scale;
  return p;
}

void alice_measures(State& psi) {
  cnot(psi, kR, kAM);
  cnot(psi, kR, kAE);
}

// Controlled on alice's memory: she prepares |+> on s when she saw 1.
void prepare_s(State& psi) { controlled_h(psi, kAM, kS); }

void bob_measures(State& psi) {
  cnot(psi, kS, kBM);
  cnot(psi, kS, kBE);
}

State evolved() {
  State psi = initial();
  alice_measures(psi);
  prepare_s(psi);
  bob_measures(psi);
  return psi;
}

}  // namespace

ViewConditionals view_conditionals() {
  ViewConditionals out;
  {
    // Alice conditions on her own record right after she makes it.
    State psi = initial();
    alice_measures(psi);
    project_bit(psi, kAM, 1);
    prepare_s(psi);
    bob_measures(psi);
    out.w_fail_given_a1 = prob_okfail(psi, kBobLab, true);
  }
  {
    State psi = evolved();
    project_bit(psi, kBM, 1);
    out.a1_given_b1 = prob_bit(psi, kAM, 1);
  }
  {
    State psi = evolved();
    project_okfail(psi, kAliceLab, false);
    out.b1_given_u_ok = prob_bit(psi, kBM, 1);
  }
  return out;
}

std::array<double, 16> trace_joint() {
  std::array<double, 16> joint{};

  double pa[2];
  {
    State psi = initial();
    alice_measures(psi);
    for (std::size_t a = 0; a < 2; ++a) pa[a] = prob_bit(psi, kAM, a);
  }

  double pb[2][2];
  for (std::size_t a = 0; a < 2; ++a) {
    State psi = initial();
    alice_measures(psi);
    project_bit(psi, kAM, a);
    prepare_s(psi);
    bob_measures(psi);
    for (std::size_t b = 0; b < 2; ++b) pb[a][b] = prob_bit(psi, kBM, b);
  }

  // u is sampled conditioned on bob's record on the undisturbed state.
  double pu[2][2];
  for (std::size_t b = 0; b < 2; ++b) {
    State psi = evolved();
    project_bit(psi, kBM, b);
    pu[b][0] = prob_okfail(psi, kAliceLab, false);
    pu[b][1] = prob_okfail(psi, kAliceLab, true);
  }

  // By the time w is sampled both memory records are gone, so only the u
  // projection conditions the state.
  double pw[2][2];
  for (std::size_t u = 0; u < 2; ++u) {
    State psi = evolved();
    if (prob_okfail(psi, kAliceLab, u == 1) <= 0.0) {
      pw[u][0] = pw[u][1] = 0.0;
      continue;
    }
    project_okfail(psi, kAliceLab, u == 1);
    pw[u][0] = prob_okfail(psi, kBobLab, false);
    pw[u][1] = prob_okfail(psi, kBobLab, true);
  }

  for (std::size_t a = 0; a < 2; ++a)
    for (std::size_t b = 0; b < 2; ++b)
      for (std::size_t u = 0; u < 2; ++u) {
        if (pu[b][u] <= 0.0) continue;
        for (std::size_t w = 0; w < 2; ++w)
          joint[a * 8 + b * 4 + u * 2 + w] = pa[a] * pb[a][b] * pu[b][u] * pw[u][w];
      }
  return joint;
}

std::array<double, 4> collapse_uw_joint() {
  std::array<double, 4> joint{};
  for (std::size_t a = 0; a < 2; ++a)
    for (std::size_t b = 0; b < 2; ++b) {
      State psi = initial();
      alice_measures(psi);
      const double qa = prob_bit(psi, kAM, a);
      if (qa <= 0.0) continue;
      project_bit(psi, kAM, a);
      prepare_s(psi);
      bob_measures(psi);
      const double qb = prob_bit(psi, kBM, b);
      if (qb <= 0.0) continue;
      project_bit(psi, kBM, b);
      for (std::size_t u = 0; u < 2; ++u) {
        State branch = psi;
        const double qu = prob_okfail(branch, kAliceLab, u == 1);
        if (qu <= 0.0) continue;
        project_okfail(branch, kAliceLab, u == 1);
        for (std::size_t w = 0; w < 2; ++w) {
          const double qw = prob_okfail(branch, kBobLab, w == 1);
          joint[u * 2 + w] += qa * qb * qu * qw;
        }
      }
    }
  return joint;
}

}  // namespace oracle

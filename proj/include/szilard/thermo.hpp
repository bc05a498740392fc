// Copyright 2026 The Szilard Lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Free energy, per-outcome work, the weight-entropy feature test, demon
// erasure cost and the cycle work ledger.

#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "szilard/qop.hpp"

namespace szilard {

/// Reference temperature. Energies and K_B T share units.
struct ThermoContext {
  double temperature = 1.0;
  double boltzmann = 1.0;

  ThermoContext() = default;
  explicit ThermoContext(double t, double kb = 1.0) : temperature(t), boltzmann(kb) {
    if (!(t > 0.0) || !std::isfinite(t)) throw ArgumentError("temperature must be positive and finite");
    if (!(kb > 0.0) || !std::isfinite(kb)) throw ArgumentError("K_B must be positive and finite");
  }

  double kt() const { return boltzmann * temperature; }
  double beta() const { return 1.0 / kt(); }
};

/// tr[H rho] - K_B T S(rho)
inline double free_energy(const DensityMatrix& rho, const Operator& h, const ThermoContext& ctx) {
  if (rho.dim() != h.dim()) throw ArgumentError("free_energy: dimension mismatch");
  if (!h.is_hermitian()) throw ArgumentError("free_energy: Hamiltonian is not Hermitian");
  return rho.expectation(h) - ctx.kt() * von_neumann_entropy(rho);
}

/// -K_B T ln tr exp(-beta H), shifted for stability.
inline double equilibrium_free_energy(const Operator& h, const ThermoContext& ctx) {
  const auto sp = eigh(h);
  const double e0 = sp.values.minCoeff();
  const double z = (-(sp.values.array() - e0) * ctx.beta()).exp().sum();
  return e0 - ctx.kt() * std::log(z);
}

/// Work into the weight: F(after) - F(before).
inline double work_per_outcome(const DensityMatrix& before, const DensityMatrix& after, const Operator& h_w,
                               const ThermoContext& ctx) {
  if (before.dim() != after.dim() || before.dim() != h_w.dim())
    throw ArgumentError("work_per_outcome: dimension mismatch");
  return free_energy(after, h_w, ctx) - free_energy(before, h_w, ctx);
}

/// System-side form of the same work for energy-conserving feedback:
/// tr[H_S(post - post_after)] + K_B T (S_W before - S_W after).
inline double work_internal_form(const DensityMatrix& post, const DensityMatrix& post_after, const Operator& h_s,
                                 double weight_entropy_before, double weight_entropy_after,
                                 const ThermoContext& ctx) {
  return post.expectation(h_s) - post_after.expectation(h_s) +
         ctx.kt() * (weight_entropy_before - weight_entropy_after);
}

inline double default_entropy_tolerance(Index dim) { return 1e-9 * std::log(double(std::max<Index>(dim, 2))); }

struct EntropyCheck {
  std::string label;
  double delta;  // |S(after) - S(before)|
  bool pass;
};

struct Feature2Report {
  bool pass;
  std::vector<EntropyCheck> outcomes;
};

/// Per outcome: |S(Lambda_x*[rho_W]) - S(rho_W)| <= tol.
inline Feature2Report feature2_test(const std::vector<std::pair<std::string, double>>& entropies_after,
                                    double entropy_before, double tol) {
  Feature2Report rep{true, {}};
  for (const auto& [label, s] : entropies_after) {
    const double delta = std::abs(s - entropy_before);
    rep.outcomes.push_back({label, delta, delta <= tol});
    rep.pass = rep.pass && delta <= tol;
  }
  return rep;
}

inline Feature2Report feature2_test(const std::vector<std::pair<std::string, DensityMatrix>>& weights_after,
                                    const DensityMatrix& rho_w, std::optional<double> tol = std::nullopt) {
  std::vector<std::pair<std::string, double>> s;
  for (const auto& [label, rho] : weights_after) {
    if (rho.dim() != rho_w.dim()) throw ArgumentError("feature2_test: dimension mismatch");
    s.emplace_back(label, von_neumann_entropy(rho));
  }
  return feature2_test(s, von_neumann_entropy(rho_w), tol.value_or(default_entropy_tolerance(rho_w.dim())));
}

/// <post|H_S|post> - lowest eigenvalue of H_S: the most work an outcome can deliver when
/// the weight entropy is unchanged.
inline double outcome_work_ceiling(const PureState& post, const Operator& h_s) {
  if (post.dim() != h_s.dim()) throw ArgumentError("outcome_work_ceiling: dimension mismatch");
  const double e = post.amplitudes().dot(h_s * post.amplitudes()).real();
  return e - eigh(h_s).values.minCoeff();
}

inline double lemma5_bound(const PureState& post, const Operator& h_s) { return outcome_work_ceiling(post, h_s); }

// ---------------------------------------------------------------------------
// Erasure

struct LandauerOptimal {};

/// Finite thermal reservoir tau_R with Hamiltonian H_R and reset unitary U_R
/// acting on D (x) R.
struct ExplicitReservoir {
  DensityMatrix state;
  Operator hamiltonian;
  Operator unitary;
};

using ErasureMode = std::variant<LandauerOptimal, ExplicitReservoir>;

struct ErasureResult {
  double heat;  // Q
  double work;  // W_R
  std::optional<DensityMatrix> reservoir_after;
  std::optional<double> reset_fidelity;
  bool landauer_optimal;
};

/// Resets the demon marginal to |psi>. Q = K_B T S(rho_D') in the ideal mode;
/// the explicit mode measures the heat dumped into the reservoir and checks
/// Q >= K_B T (S(rho_D') - S(demon after)).
inline ErasureResult erase_demon(const DensityMatrix& rho_d, const Operator& h_d, const PureState& psi,
                                 const ThermoContext& ctx, const ErasureMode& mode = LandauerOptimal{}) {
  if (rho_d.dim() != h_d.dim() || psi.dim() != h_d.dim()) throw ArgumentError("erase_demon: dimension mismatch");
  const Matrix reset = psi.amplitudes() * psi.amplitudes().adjoint();
  const double energy = (h_d.matrix() * (reset - rho_d.matrix())).trace().real();
  const double entropy = von_neumann_entropy(rho_d);
  if (std::holds_alternative<LandauerOptimal>(mode)) {
    const double q = ctx.kt() * entropy;
    return {q, energy + q, std::nullopt, std::nullopt, true};
  }
  const auto& res = std::get<ExplicitReservoir>(mode);
  const Index dd = rho_d.dim(), dr = res.state.dim();
  if (res.hamiltonian.dim() != dr || res.unitary.dim() != dd * dr)
    throw ArgumentError("erase_demon: reservoir dimension mismatch");
  if (!res.unitary.is_unitary()) throw ErasureError("reset map is not unitary");
  const Matrix& u = res.unitary.matrix();
  const Matrix joint = u * kron(rho_d.matrix(), res.state.matrix()) * u.adjoint();
  const std::vector<Index> dims{dd, dr};
  const Matrix demon_after = partial_trace(joint, dims, std::vector<std::size_t>{0});
  const double fidelity = psi.amplitudes().dot(demon_after * psi.amplitudes()).real();
  if (fidelity < 1.0 - 1e-6)
    throw ErasureError("reset map leaves the demon at fidelity " + std::to_string(fidelity));
  const DensityMatrix r_after = DensityMatrix::from_trusted(partial_trace(joint, dims, std::vector<std::size_t>{1}));
  const double q = r_after.expectation(res.hamiltonian) - res.state.expectation(res.hamiltonian);
  const double residual = von_neumann_entropy(DensityMatrix::from_trusted(demon_after));
  if (q < ctx.kt() * (entropy - residual) - 1e-9)
    throw InternalInconsistency("explicit erasure beats the Landauer bound");
  return {q, energy + q, r_after, fidelity, false};
}

/// Reservoir of dim_D sectors with `per_sector` levels each: sector 0 at
/// energy 0, the rest at `gap`. U_R swaps the demon record with the sector
/// index, after a basis change taking |0> to |psi>.
inline ExplicitReservoir build_swap_erasure(const PureState& psi, const ThermoContext& ctx, Index per_sector = 4,
                                            double gap_in_kt = 14.0) {
  const Index dd = psi.dim(), dr = dd * per_sector;
  RealVector e = RealVector::Constant(dr, gap_in_kt * ctx.kt());
  e.head(per_sector).setZero();
  const Operator h_r = Operator::diagonal(e);
  const Matrix frame = complete_basis(Matrix(psi.amplitudes()), dd);
  Matrix swap = Matrix::Zero(dd * dr, dd * dr);
  for (Index k = 0; k < dd; ++k)
    for (Index s = 0; s < dd; ++s)
      for (Index j = 0; j < per_sector; ++j) {
        const Index from = k * dr + s * per_sector + j;
        const Index to = s * dr + k * per_sector + j;
        swap(to, from) = 1.0;
      }
  const Matrix f = kron(frame, Matrix::Identity(dr, dr));
  return {thermal_state(h_r, ctx.beta()), h_r, Operator(f * swap * f.adjoint())};
}

// ---------------------------------------------------------------------------
// Ledger

struct OutcomeWork {
  std::string label;
  double probability;
  double work;            // W_x
  double entropy_change;  // S(Lambda_x*[rho_W]) - S(rho_W)
  double energy_change;   // tr[H_W(Lambda_x*[rho_W] - rho_W)]
};

struct WorkLedger {
  std::vector<OutcomeWork> outcomes;
  double work_coarse = 0.0;      // W_X from the averaged weight state
  double work_average = 0.0;     // sum_x p_x W_x
  double heat = 0.0;             // Q
  double erasure_work = 0.0;     // W_R
  double net_coarse = 0.0;       // W_X - W_R
  double net_average = 0.0;      // <W_x> - W_R
  double bound_rhs_coarse = 0.0; // F(rho_S) - F(rho_S')
  double concavity_slack = 0.0;  // <W_x> - W_X
  double second_law_slack = 0.0; // bound_rhs_coarse - net_coarse
  bool landauer_optimal = true;
};

struct LedgerInput {
  std::vector<OutcomeWork> outcomes;
  double weight_free_energy_before;
  double weight_free_energy_after;  // of the outcome-averaged weight state
  double system_free_energy_before;
  double system_free_energy_after;
  ErasureResult erasure;
  bool energy_certified = true;  // second-law bound is asserted only when set
};

inline WorkLedger work_ledger(const LedgerInput& in) {
  WorkLedger l;
  l.outcomes = in.outcomes;
  for (const auto& o : in.outcomes) l.work_average += o.probability * o.work;
  l.work_coarse = in.weight_free_energy_after - in.weight_free_energy_before;
  l.heat = in.erasure.heat;
  l.erasure_work = in.erasure.work;
  l.net_coarse = l.work_coarse - l.erasure_work;
  l.net_average = l.work_average - l.erasure_work;
  l.bound_rhs_coarse = in.system_free_energy_before - in.system_free_energy_after;
  l.concavity_slack = l.work_average - l.work_coarse;
  l.second_law_slack = l.bound_rhs_coarse - l.net_coarse;
  l.landauer_optimal = in.erasure.landauer_optimal;
  if (l.concavity_slack < -1e-9) throw InternalInconsistency("coarse-grained work exceeds the average work");
  if (in.energy_certified && l.landauer_optimal && l.second_law_slack < -1e-9)
    throw InternalInconsistency("net coarse-grained work exceeds the system free-energy drop");
  return l;
}

// ---------------------------------------------------------------------------
// Reservoir-assisted feedback

/// Terms of the reservoir-assisted work chain for one outcome, with the
/// weight-entropy change kept explicit so the chain holds without assuming
/// it vanishes.
struct ReservoirBoundReport {
  double work;                  // F(Lambda_x*[rho_W]) - F(rho_W)
  double reservoir_energy;      // tr[H_R(tau - tau')]
  double system_energy;         // tr[H_S(phi - Lambda_x[phi])]
  double weight_entropy_change; // S(Lambda_x*[rho_W]) - S(rho_W)
  double reservoir_entropy_drop;  // S(tau) - S(tau')
  double reservoir_relative;    // S(tau' || tau)
  double system_entropy;        // S(Lambda_x[phi])
  double energy_form;           // reservoir + system energy - K_B T dS_W
  double entropy_form;          // K_B T (dS_R - D) + system energy - K_B T dS_W
  double subadditivity_form;    // K_B T (S(Lambda_x[phi]) - D) + system energy
  double rhs;                   // K_B T S(Lambda_x[phi]) + system energy
  bool holds;
};

inline ReservoirBoundReport reservoir_assisted_bound(double work, double weight_entropy_change,
                                                     const DensityMatrix& post, const DensityMatrix& system_after,
                                                     const Operator& h_s, const DensityMatrix& tau,
                                                     const DensityMatrix& tau_after, const Operator& h_r,
                                                     const ThermoContext& ctx) {
  ReservoirBoundReport r{};
  const double kt = ctx.kt();
  r.work = work;
  r.weight_entropy_change = weight_entropy_change;
  r.reservoir_energy = tau.expectation(h_r) - tau_after.expectation(h_r);
  r.system_energy = post.expectation(h_s) - system_after.expectation(h_s);
  r.reservoir_entropy_drop = von_neumann_entropy(tau) - von_neumann_entropy(tau_after);
  r.reservoir_relative = relative_entropy(tau_after, tau);
  r.system_entropy = von_neumann_entropy(system_after);
  r.energy_form = r.reservoir_energy + r.system_energy - kt * weight_entropy_change;
  r.entropy_form = kt * (r.reservoir_entropy_drop - r.reservoir_relative) + r.system_energy - kt * weight_entropy_change;
  r.subadditivity_form = kt * (r.system_entropy - r.reservoir_relative) + r.system_energy;
  r.rhs = kt * r.system_entropy + r.system_energy;
  const double tol = 1e-9;
  r.holds = std::abs(r.work - r.energy_form) <= tol && std::abs(r.energy_form - r.entropy_form) <= tol &&
            r.entropy_form <= r.subadditivity_form + tol && r.subadditivity_form <= r.rhs + tol &&
            r.work <= r.rhs + tol;
  return r;
}

}  // namespace szilard

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

// Full engine cycles: measure, objectify, feed back, erase. Feature
// evaluation, the named scenarios and seeded random engine families.

#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "szilard/feedback.hpp"
#include "szilard/measurement.hpp"
#include "szilard/qop.hpp"
#include "szilard/random.hpp"
#include "szilard/thermo.hpp"

namespace szilard {

struct WeightConfig {
  Operator hamiltonian;
  DensityMatrix state;
  std::optional<OscillatorWeight> oscillator;
};

/// Instrument-driven measurement. The demon is a classical register with one
/// level per Kraus operator, ready in level 0.
struct InstrumentMeasurement {
  Instrument instrument;
  Observable target;
};

using MeasurementStage = std::variant<MeasurementModel, InstrumentMeasurement>;

struct FeatureTolerances {
  double fidelity = 1e-9;
  std::optional<double> entropy;  // default 1e-9 ln(dim W)
};

struct EngineConfig {
  std::string name;
  Operator h_s;
  DensityMatrix rho_s;
  Operator h_d;
  MeasurementStage measurement;
  FeedbackScheme feedback;
  WeightConfig weight;
  ThermoContext thermo;
  ErasureMode erasure = LandauerOptimal{};
  std::optional<ReservoirSpec> reservoir;
  FeatureTolerances tolerances{};
  double omega = 1.0;
  bool conforming = true;

  const Observable& target() const {
    if (const auto* m = std::get_if<MeasurementModel>(&measurement)) return m->target();
    return std::get<InstrumentMeasurement>(measurement).target;
  }
  bool degenerate_target() const { return !target().is_nondegenerate(); }
  bool reservoir_in_feedback() const { return feedback.has_reservoir(); }
  Index demon_dim() const { return h_d.dim(); }
  PureState demon_initial() const {
    if (const auto* m = std::get_if<MeasurementModel>(&measurement)) return m->demon_initial();
    return PureState::basis(demon_dim(), 0);
  }
  double work_threshold() const { return 1e-9 * std::max(omega, thermo.kt()); }
  double entropy_tolerance() const {
    return tolerances.entropy.value_or(default_entropy_tolerance(weight.hamiltonian.dim()));
  }

  SubsystemLayout layout() const {
    std::vector<Factor> f{{Subsystem::W, weight.hamiltonian.dim(), weight.hamiltonian},
                          {Subsystem::S, h_s.dim(), h_s},
                          {Subsystem::D, h_d.dim(), h_d}};
    if (reservoir) f.push_back({Subsystem::R, reservoir->hamiltonian.dim(), reservoir->hamiltonian});
    return SubsystemLayout(std::move(f));
  }
};

/// Demon projectors for an instrument register (one level per Kraus operator).
inline LabeledOperators register_projectors(const Instrument& instr) {
  Index total = 0;
  for (const auto& f : instr.families()) total += static_cast<Index>(f.kraus.size());
  LabeledOperators out;
  Index level = 0;
  for (const auto& f : instr.families()) {
    RealVector diag = RealVector::Zero(total);
    for (std::size_t k = 0; k < f.kraus.size(); ++k) diag(level++) = 1.0;
    out.emplace_back(f.label, Operator::diagonal(diag));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Certification

struct CertificationReport {
  std::optional<MeasurementEnergyReport> measurement;
  std::optional<WayReport> way;
  FeedbackEnergyReport feedback;
  bool pass;
};

inline CertificationReport certify(const EngineConfig& c) {
  const auto layout = c.layout();  // validates factor dimensions
  if (c.rho_s.dim() != c.h_s.dim() || c.weight.state.dim() != c.weight.hamiltonian.dim())
    throw ArgumentError("engine state and Hamiltonian dimensions differ");
  if (c.feedback.demon_dim() != c.h_d.dim()) throw ArgumentError("feedback demon dimension mismatch");
  for (const auto& o : c.target().outcomes()) c.feedback.unitary(o.label);
  CertificationReport r{};
  bool measurement_ok = false;
  if (const auto* m = std::get_if<MeasurementModel>(&c.measurement)) {
    if (m->demon_dim() != c.h_d.dim() || m->system_dim() != c.h_s.dim())
      throw ArgumentError("measurement model dimensions do not match the engine");
    r.measurement = check_energy_conserving_measurement(*m, c.h_s, c.h_d);
    r.way = way_witness(*m, c.h_s, c.h_d);
    measurement_ok = r.measurement->pass;
  }
  std::optional<Operator> h_r;
  if (c.reservoir) h_r = c.reservoir->hamiltonian;
  r.feedback = check_feedback_energy(c.feedback, c.weight.hamiltonian, c.h_s, c.h_d, h_r);
  r.pass = measurement_ok && r.feedback.pass;
  return r;
}

// ---------------------------------------------------------------------------
// Cycle

struct BranchResult {
  std::string label;
  double probability = 0.0;
  std::optional<DensityMatrix> system_post;   // after objectification
  std::optional<DensityMatrix> system_after;  // after feedback
  std::optional<DensityMatrix> weight_after;
  std::optional<DensityMatrix> reservoir_after;
  double work = 0.0;
  double entropy_change = 0.0;
  double energy_change = 0.0;
  std::optional<double> internal_work;
};

struct CycleDiagnostics {
  std::optional<double> order_gap;       // objectify-then-feedback vs the reverse
  double marginal_gap = 0.0;             // global marginals vs branch mixtures
  double entropy_chain_slack = 0.0;      // S(W')+S(S')+S(D') - S(W) - S(S)
  double internal_form_deviation = 0.0;  // max_x |W_x - system-side form|
  std::vector<std::pair<std::string, ReservoirBoundReport>> reservoir_bounds;
};

struct CycleResult {
  std::vector<BranchResult> branches;
  DensityMatrix system_after;
  DensityMatrix weight_after;
  DensityMatrix demon_after;
  ErasureResult erasure;
  WorkLedger ledger;
  CertificationReport certification;
  CycleDiagnostics diagnostics;
  double weight_entropy_before;
};

namespace detail {

struct Objectified {
  Matrix premeasured;  // on S (x) D
  std::vector<Branch> branches;
};

inline Objectified objectify_stage(const EngineConfig& c) {
  if (const auto* m = std::get_if<MeasurementModel>(&c.measurement)) {
    auto res = premeasure_and_objectify(*m, c.rho_s);
    return {res.premeasured.matrix(), res.objectified.branches()};
  }
  const auto& im = std::get<InstrumentMeasurement>(c.measurement);
  const Index ds = c.h_s.dim(), dd = c.h_d.dim();
  // Stinespring isometry |phi> -> sum_{x,k} K_{x,k}|phi> (x) |x,k>.
  Matrix iso = Matrix::Zero(ds * dd, ds);
  Index level = 0;
  for (const auto& f : im.instrument.families())
    for (const auto& k : f.kraus) {
      for (Index i = 0; i < ds; ++i) iso.row(i * dd + level) = k.matrix().row(i);
      ++level;
    }
  if (level != dd) throw ArgumentError("demon register size does not match the instrument");
  const Matrix pre = iso * c.rho_s.matrix() * iso.adjoint();
  std::vector<Branch> branches;
  const auto projectors = register_projectors(im.instrument);
  for (const auto& [label, p] : projectors) {
    const Matrix big = kron(Matrix::Identity(ds, ds), p.matrix());
    branches.push_back(make_branch(label, big * pre * big));
  }
  return {pre, branches};
}

}  // namespace detail

inline CycleResult run_cycle(const EngineConfig& c) {
  CertificationReport cert = certify(c);
  if (c.conforming && !cert.pass)
    throw CertificationError("engine '" + c.name + "' fails energy certification");
  const ThermoContext& ctx = c.thermo;
  const Index dw = c.weight.hamiltonian.dim(), ds = c.h_s.dim(), dd = c.h_d.dim();
  const std::vector<Index> sd_dims{ds, dd};
  const auto obj = detail::objectify_stage(c);
  const double f_w_before = free_energy(c.weight.state, c.weight.hamiltonian, ctx);
  const double s_w_before = von_neumann_entropy(c.weight.state);
  const double e_w_before = c.weight.state.expectation(c.weight.hamiltonian);

  std::vector<BranchResult> branches;
  Matrix sys_mix = Matrix::Zero(ds, ds), w_mix = Matrix::Zero(dw, dw), sd_mix = Matrix::Zero(ds * dd, ds * dd);
  std::optional<Matrix> r_mix;
  if (c.reservoir) r_mix = Matrix::Zero(c.reservoir->state.dim(), c.reservoir->state.dim());
  CycleDiagnostics diag;
  for (const auto& b : obj.branches) {
    BranchResult br;
    br.label = b.label;
    br.probability = b.probability;
    if (b.state) {
      sd_mix += b.probability * b.state->matrix();
      const auto post = DensityMatrix::from_trusted(partial_trace(b.state->matrix(), sd_dims, std::vector<std::size_t>{0}));
      const auto out = conditional_feedback_maps(c.feedback, b.label, c.weight.state, post, c.reservoir);
      br.work = free_energy(out.weight, c.weight.hamiltonian, ctx) - f_w_before;
      br.entropy_change = von_neumann_entropy(out.weight) - s_w_before;
      br.energy_change = out.weight.expectation(c.weight.hamiltonian) - e_w_before;
      if (!c.reservoir) {
        br.internal_work = work_internal_form(post, out.system, c.h_s, s_w_before, s_w_before + br.entropy_change, ctx);
        if (cert.pass)
          diag.internal_form_deviation = std::max(diag.internal_form_deviation, std::abs(*br.internal_work - br.work));
      } else {
        diag.reservoir_bounds.emplace_back(
            b.label, reservoir_assisted_bound(br.work, br.entropy_change, post, out.system, c.h_s, c.reservoir->state,
                                              *out.reservoir, c.reservoir->hamiltonian, ctx));
        *r_mix += b.probability * out.reservoir->matrix();
      }
      sys_mix += b.probability * out.system.matrix();
      w_mix += b.probability * out.weight.matrix();
      br.system_post = post;
      br.system_after = out.system;
      br.weight_after = out.weight;
      br.reservoir_after = out.reservoir;
    }
    branches.push_back(std::move(br));
  }
  const auto rho_s_after = DensityMatrix::from_trusted(sys_mix);
  const auto rho_w_after = DensityMatrix::from_trusted(w_mix);
  const auto rho_d_after = DensityMatrix::from_trusted(partial_trace(sd_mix, sd_dims, std::vector<std::size_t>{1}));

  // Global route: V (rho_W (x) rho^{M,O} [(x) tau_R]) V^dagger, reduced.
  {
    std::vector<detail::Ensemble> parts{detail::ensemble_of(c.weight.state),
                                        detail::ensemble_of(DensityMatrix::from_trusted(sd_mix))};
    std::vector<Index> dims{dw, ds, dd};
    if (c.reservoir) {
      parts.push_back(detail::ensemble_of(c.reservoir->state));
      dims.push_back(c.reservoir->state.dim());
    }
    const auto e = detail::product_ensemble(parts);
    Matrix out(e.vectors.rows(), e.vectors.cols());
    if (c.reservoir) {
      out = c.feedback.composed().matrix() * e.vectors;
    } else {
      for (Index k = 0; k < e.vectors.cols(); ++k) out.col(k) = c.feedback.apply(e.vectors.col(k));
    }
    double gap = (detail::reduce_vectors(out, e.weights, dims, 0) - rho_w_after.matrix()).norm();
    gap = std::max(gap, (detail::reduce_vectors(out, e.weights, dims, 1) - rho_s_after.matrix()).norm());
    gap = std::max(gap, (detail::reduce_vectors(out, e.weights, dims, 2) - rho_d_after.matrix()).norm());
    if (c.reservoir) gap = std::max(gap, (detail::reduce_vectors(out, e.weights, dims, 3) - *r_mix).norm());
    diag.marginal_gap = gap;
  }
  if (!c.reservoir) diag.order_gap = objectification_order_gap(c.feedback, c.weight.state, DensityMatrix::from_trusted(obj.premeasured));

  double lhs = s_w_before + von_neumann_entropy(c.rho_s);
  double rhs = von_neumann_entropy(rho_w_after) + von_neumann_entropy(rho_s_after) + von_neumann_entropy(rho_d_after);
  if (c.reservoir) {
    lhs += von_neumann_entropy(c.reservoir->state);
    rhs += von_neumann_entropy(DensityMatrix::from_trusted(*r_mix));
  }
  diag.entropy_chain_slack = rhs - lhs;

  auto erasure = erase_demon(rho_d_after, c.h_d, c.demon_initial(), ctx, c.erasure);
  LedgerInput in{{},
                 f_w_before,
                 free_energy(rho_w_after, c.weight.hamiltonian, ctx),
                 free_energy(c.rho_s, c.h_s, ctx),
                 free_energy(rho_s_after, c.h_s, ctx),
                 erasure,
                 cert.pass};
  for (const auto& b : branches)
    in.outcomes.push_back({b.label, b.probability, b.work, b.entropy_change, b.energy_change});
  WorkLedger ledger = work_ledger(in);
  return {std::move(branches), rho_s_after, rho_w_after, rho_d_after, erasure, std::move(ledger), std::move(cert),
          std::move(diag), s_w_before};
}

// ---------------------------------------------------------------------------
// Features

struct FeatureReport {
  bool f1_repeatable;
  std::vector<std::pair<std::string, double>> fidelities;
  bool f2_entropy_invariant;
  std::vector<std::pair<std::string, double>> entropy_deltas;
  bool f3_positive_work;
  double min_work;
  bool degenerate_target;
  bool reservoir_in_feedback;
  bool theorem_applies;

  std::array<bool, 3> triple() const { return {f1_repeatable, f2_entropy_invariant, f3_positive_work}; }
};

/// Features 1-3 with the configured tolerances. On certified, conforming,
/// non-degenerate engines without a reservoir in the feedback, all three
/// holding at once is reported as an InternalInconsistency.
inline FeatureReport evaluate_features(const CycleResult& r, const EngineConfig& c) {
  FeatureReport f{};
  f.degenerate_target = c.degenerate_target();
  f.reservoir_in_feedback = c.reservoir_in_feedback();
  if (const auto* m = std::get_if<MeasurementModel>(&c.measurement)) {
    const auto rep = check_repeatable(*m);
    f.fidelities = rep.fidelities;
    f.f1_repeatable = true;
    for (const auto& [label, fid] : rep.fidelities) {
      const bool ok = f.degenerate_target ? rep.pass : 1.0 - fid <= c.tolerances.fidelity;
      f.f1_repeatable = f.f1_repeatable && ok;
    }
  } else {
    const auto& im = std::get<InstrumentMeasurement>(c.measurement);
    f.f1_repeatable = instrument_repeatable(im.instrument, im.target);
  }
  const double tol_s = c.entropy_tolerance();
  f.f2_entropy_invariant = true;
  f.f3_positive_work = true;
  f.min_work = std::numeric_limits<double>::infinity();
  for (const auto& b : r.branches) {
    if (b.probability <= kEigCutoff) continue;
    f.entropy_deltas.emplace_back(b.label, std::abs(b.entropy_change));
    f.f2_entropy_invariant = f.f2_entropy_invariant && std::abs(b.entropy_change) <= tol_s;
    f.min_work = std::min(f.min_work, b.work);
  }
  f.f3_positive_work = f.min_work > c.work_threshold();
  f.theorem_applies = !f.degenerate_target && !f.reservoir_in_feedback && c.conforming && r.certification.pass;
  if (f.theorem_applies && f.f1_repeatable && f.f2_entropy_invariant && f.f3_positive_work)
    throw InternalInconsistency("engine '" + c.name + "' satisfies all three features");
  return f;
}

// ---------------------------------------------------------------------------
// Scenario library

struct ScenarioParams {
  double q = 0.5;
  Index n = 20;
  double omega = 1.0;
  double temperature = 1.0;
  double kb = 1.0;
  Index dim = 4;
  Index reservoir_dim = 16;
  double coupling = 1.0;
  std::optional<Index> weight_cutoff;
  std::optional<double> tol_s;
  bool explicit_erasure = false;
};

namespace detail {

inline Vector unit(Index n, Index k) { return Vector::Unit(n, k); }

inline WeightConfig oscillator_weight(double omega, Index n, Index cutoff) {
  OscillatorWeight w(omega, n, cutoff);
  return {w.hamiltonian(), DensityMatrix::from_pure(w.initial()), w};
}

inline Observable qubit_observable(double plus, double minus) {
  return Observable::from_basis({"+", "-"}, {plus, minus}, {unit(2, 0), unit(2, 1)});
}

inline void check_unit_interval(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0)) throw ArgumentError(std::string(name) + " must lie in [0, 1]");
}

inline ErasureMode erasure_for(const ScenarioParams& p, const PureState& psi, const ThermoContext& ctx) {
  if (p.explicit_erasure) return build_swap_erasure(psi, ctx);
  return LandauerOptimal{};
}

inline EngineConfig qubit_example(const std::string& name, const ScenarioParams& p, const Vector& post_plus,
                                  const Vector& post_minus, const Operator& h_d, const Vector& psi) {
  check_unit_interval(p.q, "q");
  if (p.n < 1) throw ArgumentError("N must be >= 1");
  const ThermoContext ctx(p.temperature, p.kb);
  const Operator h_s = Operator::diagonal({p.omega / 2, -p.omega / 2});
  const auto target = qubit_observable(1.0, -1.0);
  const auto pointer = qubit_observable(1.0, -1.0);
  const PureState ready = PureState::normalized(psi);
  auto model = build_standard_premeasurement(target, {{"+", post_plus}, {"-", post_minus}}, pointer, ready,
                                             EnergyConstraint{h_s, h_d});
  const Index cutoff = p.weight_cutoff.value_or(p.n + 4);
  auto weight = oscillator_weight(p.omega, p.n, cutoff);
  const auto shifts = build_shift_unitaries(h_s, {{"+", post_plus}, {"-", post_minus}}, *weight.oscillator);
  LabeledOperators us;
  for (const auto& [label, u] : shifts) us.emplace_back(label, u.matrix());
  FeedbackScheme scheme(std::move(us), {{"+", pointer.at("+").projector}, {"-", pointer.at("-").projector}});
  RealVector pops(2);
  pops << p.q, 1.0 - p.q;
  EngineConfig c{name,  h_s, DensityMatrix::diagonal(pops), h_d, std::move(model), std::move(scheme),
                 std::move(weight), ctx};
  c.erasure = erasure_for(p, ready, ctx);
  c.omega = p.omega;
  c.tolerances.entropy = p.tol_s;
  return c;
}

}  // namespace detail

/// Repeatable qubit measurement with eigenstate post states; H_D = 0.
inline EngineConfig example_one(const ScenarioParams& p) {
  const Vector e0 = detail::unit(2, 0), e1 = detail::unit(2, 1);
  return detail::qubit_example("example_I", p, e0, e1, Operator::zero(2), e0);
}

/// Non-repeatable qubit measurement with post states (|+> +- |->)/sqrt 2,
/// H_D = (omega/2)(|psi_+><psi_+| - |psi_-><psi_-|), |psi> = (|psi_+> + |psi_->)/sqrt 2.
inline EngineConfig example_two(const ScenarioParams& p) {
  const double s = 1.0 / std::sqrt(2.0);
  Vector plus(2), minus(2);
  plus << s, s;
  minus << s, -s;
  return detail::qubit_example("example_II", p, plus, minus, Operator::diagonal({p.omega / 2, -p.omega / 2}), plus);
}

/// d = 4, H_S = omega diag(0,1,2,3), outcomes y = span(e0,e1), z = span(e2,e3).
/// Coarse-grained premeasurement sending every eigenvector of an outcome to
/// the highest-energy vector of its subspace; the demon stores alpha and
/// absorbs the energy difference. Feedback swaps that vector with the ground
/// state while the weight rises by the gap.
inline EngineConfig degenerate_circumvention(const ScenarioParams& p) {
  if (p.dim < 3) throw ArgumentError("dim must be >= 3 for a degenerate target");
  if (p.n < 1) throw ArgumentError("N must be >= 1");
  const Index d = p.dim, split = (d + 1) / 2;
  const ThermoContext ctx(p.temperature, p.kb);
  RealVector levels = RealVector::LinSpaced(d, 0.0, double(d - 1));
  const Operator h_s = Operator::diagonal(p.omega * levels);
  auto span = [&](Index lo, Index hi) {
    RealVector v = RealVector::Zero(d);
    v.segment(lo, hi - lo).setOnes();
    return Operator::diagonal(v);
  };
  const Observable target({{"y", 0.0, span(0, split)}, {"z", 1.0, span(split, d)}});
  const Observable pointer({{"y", 0.0, span(0, split)}, {"z", 1.0, span(split, d)}});
  // Record alpha of outcome x lives on demon level alpha; the ready state is
  // the record whose system energy does not change.
  std::vector<PremeasurementRecord> records;
  RealVector demon_e(d);
  const Index top_y = split - 1, top_z = d - 1;
  for (Index k = 0; k < d; ++k) {
    const bool y = k < split;
    const Index top = y ? top_y : top_z;
    const double gain = p.omega * (levels(top) - levels(k));
    demon_e(k) = p.omega * double(d) - gain;
    records.push_back({y ? "y" : "z", PureState::basis(d, k), PureState::basis(d, top), PureState::basis(d, k)});
  }
  const PureState ready = PureState::basis(d, top_y);
  const Operator h_d = Operator::diagonal(demon_e);
  auto model = build_premeasurement(target, pointer, ready, std::move(records), EnergyConstraint{h_s, h_d});
  const Index max_level = d - 1;
  const Index cutoff = p.weight_cutoff.value_or(p.n + 2 + max_level + 2);
  auto weight = detail::oscillator_weight(p.omega, p.n, cutoff);
  LabeledOperators us;
  for (const auto& [label, top] : std::vector<std::pair<std::string, Index>>{{"y", top_y}, {"z", top_z}}) {
    Matrix g = Matrix::Identity(d, d);
    g.col(0).setZero();
    g.col(top).setZero();
    g(0, top) = 1.0;
    g(top, 0) = 1.0;
    us.emplace_back(label, DressedUnitary(h_s, Operator(g), cutoff, p.omega, 0).matrix());
  }
  FeedbackScheme scheme(std::move(us), {{"y", pointer.at("y").projector}, {"z", pointer.at("z").projector}});
  EngineConfig c{"degenerate_circumvention", h_s, thermal_state(h_s, ctx.beta()), h_d, std::move(model),
                 std::move(scheme), std::move(weight), ctx};
  c.erasure = detail::erasure_for(p, c.demon_initial(), ctx);
  c.omega = p.omega;
  c.tolerances.entropy = p.tol_s;
  return c;
}

/// Smallest positive outcome gain of the degenerate scenario: the energy of
/// the highest vector of each outcome subspace above the ground level.
inline double degenerate_gap(const ScenarioParams& p) {
  const Index split = (p.dim + 1) / 2;
  return p.omega * double(split - 1);
}

/// Qubit with H_S = 0 measured repeatably in the standard basis; feedback
/// couples system flips to a thermal ladder reservoir and the weight:
/// |n, x, r> <-> |n+1, not x, r-1> for r >= 1, rotated by an angle set by
/// the coupling in [0, 1].
inline EngineConfig reservoir_circumvention(const ScenarioParams& p) {
  detail::check_unit_interval(p.coupling, "coupling");
  if (p.reservoir_dim < 2) throw ArgumentError("reservoir_dim must be >= 2");
  if (p.n < 1) throw ArgumentError("N must be >= 1");
  const ThermoContext ctx(p.temperature, p.kb);
  const Index dr = p.reservoir_dim;
  const Operator h_s = Operator::zero(2);
  const Operator h_d = Operator::zero(2);
  const auto target = detail::qubit_observable(1.0, -1.0);
  const auto pointer = detail::qubit_observable(1.0, -1.0);
  const PureState ready = PureState::basis(2, 0);
  auto model = build_standard_premeasurement(target, {{"+", detail::unit(2, 0)}, {"-", detail::unit(2, 1)}}, pointer,
                                             ready, EnergyConstraint{h_s, h_d});
  const Index cutoff = p.weight_cutoff.value_or(p.n + 4);
  auto weight = detail::oscillator_weight(p.omega, p.n, cutoff);
  const Operator h_r = Operator::diagonal(p.omega * RealVector::LinSpaced(dr, 0.0, double(dr - 1)));
  const auto tau = thermal_state(h_r, ctx.beta());
  const double excited = 1.0 - tau.matrix()(0, 0).real();
  const double s2 = p.coupling * std::min(1.0, 0.5 / excited);
  const double cs = std::sqrt(1.0 - s2), sn = std::sqrt(s2);
  const Index n_inner = cutoff * 2 * dr;
  auto index = [&](Index n, Index x, Index r) { return (n * 2 + x) * dr + r; };
  LabeledOperators us;
  for (const auto& [label, x] : std::vector<std::pair<std::string, Index>>{{"+", 0}, {"-", 1}}) {
    Matrix u = Matrix::Identity(n_inner, n_inner);
    for (Index n = 0; n + 1 < cutoff; ++n)
      for (Index r = 1; r < dr; ++r) {
        const Index a = index(n, x, r), b = index(n + 1, 1 - x, r - 1);
        u(a, a) = cs;
        u(b, b) = cs;
        u(b, a) = sn;
        u(a, b) = -sn;
      }
    us.emplace_back(label, Operator(std::move(u)));
  }
  FeedbackScheme scheme(std::move(us), {{"+", pointer.at("+").projector}, {"-", pointer.at("-").projector}}, dr);
  RealVector pops(2);
  pops << p.q, 1.0 - p.q;
  EngineConfig c{"reservoir_circumvention", h_s, DensityMatrix::diagonal(pops), h_d, std::move(model),
                 std::move(scheme), std::move(weight), ctx};
  c.reservoir = ReservoirSpec{tau, h_r};
  c.erasure = detail::erasure_for(p, ready, ctx);
  c.omega = p.omega;
  c.tolerances.entropy = p.tol_s;
  return c;
}

/// Single-outcome measurement, one-dimensional demon, identity feedback.
inline EngineConfig null_engine(const ScenarioParams& p) {
  detail::check_unit_interval(p.q, "q");
  const ThermoContext ctx(p.temperature, p.kb);
  const Operator h_s = Operator::diagonal({p.omega / 2, -p.omega / 2});
  const Observable target({{"0", 0.0, Operator::identity(2)}});
  const Observable pointer({{"0", 0.0, Operator::identity(1)}});
  const PureState ready = PureState::basis(1, 0);
  MeasurementModel model(target, pointer, ready, Operator::identity(2),
                         {{"0", PureState::basis(2, 0), PureState::basis(2, 0), ready},
                          {"0", PureState::basis(2, 1), PureState::basis(2, 1), ready}});
  const Index n = std::max<Index>(p.n, 1);
  auto weight = detail::oscillator_weight(p.omega, n, p.weight_cutoff.value_or(n + 4));
  const Index inner = weight.hamiltonian.dim() * 2;
  FeedbackScheme scheme({{"0", Operator::identity(inner)}}, {{"0", Operator::identity(1)}});
  RealVector pops(2);
  pops << p.q, 1.0 - p.q;
  EngineConfig c{"null_engine", h_s, DensityMatrix::diagonal(pops), Operator::zero(1), std::move(model),
                 std::move(scheme), std::move(weight), ctx};
  c.omega = p.omega;
  c.tolerances.entropy = p.tol_s;
  return c;
}

inline const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names{"example_I", "example_II", "degenerate_circumvention",
                                              "reservoir_circumvention", "null_engine"};
  return names;
}

inline EngineConfig scenario_library(const std::string& name, const ScenarioParams& p = {}) {
  if (name == "example_I") return example_one(p);
  if (name == "example_II") return example_two(p);
  if (name == "degenerate_circumvention") return degenerate_circumvention(p);
  if (name == "reservoir_circumvention") return reservoir_circumvention(p);
  if (name == "null_engine") return null_engine(p);
  throw ArgumentError("unknown scenario '" + name + "'");
}

// ---------------------------------------------------------------------------
// Random conforming engines

enum class MeasurementFamily { repeatable, non_repeatable };
enum class FeedbackFamily { dressed_ground, dressed_random, coherent_transfer, energy_blocks, cooling_swap };
enum class WeightFamily { flat_pure, random_pure, mixed_low_rank, mixed_two_level };

struct RandomEngineOptions {
  std::optional<MeasurementFamily> measurement;
  std::optional<FeedbackFamily> feedback;
  std::optional<WeightFamily> weight;
  bool thermal_system = false;
  double omega = 1.0;
  double temperature = 1.0;
};

namespace detail {

// Unitary sending `from` to `to` (unit vectors), completed by Gram-Schmidt.
inline Matrix transfer(const Vector& from, const Vector& to) {
  const Index n = from.size();
  return complete_basis(Matrix(to), n) * complete_basis(Matrix(from), n).adjoint();
}

inline Matrix random_block_unitary(const Operator& h, Rng& rng) {
  Matrix u = Matrix::Zero(h.dim(), h.dim());
  for (const Matrix& q : eigenspaces(h)) u += q * haar_unitary(q.cols(), rng).matrix() * q.adjoint();
  return u;
}

// Per energy eigenspace, moves the component of Psi (x) post onto |n> (x)
// |ground>, so the output is a product with a pure weight state.
inline Matrix coherent_transfer(const Operator& h_ws, const Vector& input, const Vector& ground, Index dw) {
  Matrix u = Matrix::Zero(h_ws.dim(), h_ws.dim());
  for (const Matrix& q : eigenspaces(h_ws)) {
    const Vector a = q.adjoint() * input;
    const double na = a.norm();
    if (na <= 1e-12) {
      u += q * q.adjoint();
      continue;
    }
    // The weight level holding |ground> is the one inside this eigenspace.
    Index level = -1;
    for (Index n = 0; n < dw; ++n) {
      const Vector cand = kron(Vector(Vector::Unit(dw, n)), ground);
      if ((q * (q.adjoint() * cand) - cand).norm() < 1e-9) level = n;
    }
    if (level < 0) throw ConstructionError("no ladder level matches an occupied energy eigenspace");
    const Vector b = q.adjoint() * kron(Vector(Vector::Unit(dw, level)), ground);
    u += q * isometric_completion(Matrix(a / na), Matrix(b)) * q.adjoint();
  }
  return u;
}

// Swaps |lo, a> <-> |lo + m_a, ground> for every excited level a (system
// factor in the H_S eigenbasis `basis`).
inline Matrix cooling_swap(const Matrix& basis, const std::vector<Index>& levels, Index lo, Index dw) {
  const auto d = static_cast<Index>(levels.size());
  Matrix perm = Matrix::Identity(dw * d, dw * d);
  for (Index a = 1; a < d; ++a) {
    const Index i = lo * d + a, j = (lo + levels[static_cast<std::size_t>(a)]) * d;
    perm(i, i) = perm(j, j) = 0.0;
    perm(i, j) = perm(j, i) = 1.0;
  }
  const Matrix frame = kron(Matrix::Identity(dw, dw), basis);
  return frame * perm * frame.adjoint();
}

}  // namespace detail

struct RandomEngine {
  EngineConfig config;
  MeasurementFamily measurement;
  FeedbackFamily feedback;
  WeightFamily weight;
};

/// Draws a conforming non-degenerate engine: integer-gap H_S in a random
/// basis, target in its eigenbasis, energy-compatible demon, ladder weight
/// and feedback commuting with H_W + H_S.
inline RandomEngine random_conforming_engine(Rng& rng, const RandomEngineOptions& opt = {}) {
  const double omega = opt.omega;
  const ThermoContext ctx(opt.temperature);
  const auto mfam = opt.measurement.value_or(uniform(rng, 0, 1) < 0.5 ? MeasurementFamily::repeatable
                                                                      : MeasurementFamily::non_repeatable);
  const Index d = mfam == MeasurementFamily::non_repeatable ? 2 : uniform_int(rng, 2, 3);
  std::vector<Index> levels{0};
  for (Index k = 1; k < d; ++k) levels.push_back(levels.back() + uniform_int(rng, 1, 2));
  const Index max_level = levels.back();
  const Matrix basis = haar_unitary(d, rng).matrix();
  RealVector ev(d);
  for (Index k = 0; k < d; ++k) ev(k) = omega * double(levels[k]);
  const Operator h_s(basis * ev.cast<cplx>().asDiagonal() * basis.adjoint());
  const Vector ground = basis.col(0);

  std::vector<std::string> labels;
  std::vector<double> values;
  std::vector<Vector> eig;
  for (Index k = 0; k < d; ++k) {
    labels.push_back("x" + std::to_string(k));
    values.push_back(double(k));
    eig.push_back(basis.col(k));
  }
  const auto target = Observable::from_basis(labels, values, eig);
  std::vector<Vector> demon_basis;
  for (Index k = 0; k < d; ++k) demon_basis.push_back(Vector::Unit(d, k));
  const auto pointer = Observable::from_basis(labels, values, demon_basis);

  LabeledVectors posts;
  Operator h_d = Operator::zero(d);
  Vector psi = Vector::Unit(d, 0);
  if (mfam == MeasurementFamily::repeatable) {
    h_d = Operator::diagonal(RealVector::Constant(d, uniform(rng, 0.0, omega)));
    for (Index k = 0; k < d; ++k)
      posts.emplace_back(labels[k], std::exp(cplx(0, uniform(rng, 0, 2 * M_PI))) * basis.col(k));
  } else {
    // Demon levels +-gap/2; the pointer of the excited outcome sits higher.
    const double gap = omega * double(max_level);
    h_d = Operator::diagonal({-gap / 2, gap / 2});
    const double r = uniform(rng, 0.1, 0.9);
    psi << std::sqrt(1.0 - r), std::sqrt(r);
    for (Index k = 0; k < 2; ++k) {
      const Vector v = std::sqrt(1.0 - r) * std::exp(cplx(0, uniform(rng, 0, 2 * M_PI))) * basis.col(0) +
                       std::sqrt(r) * std::exp(cplx(0, uniform(rng, 0, 2 * M_PI))) * basis.col(1);
      posts.emplace_back(labels[k], v);
    }
  }
  auto model = build_standard_premeasurement(target, posts, pointer, PureState(psi), EnergyConstraint{h_s, h_d});

  auto ffam = opt.feedback.value_or(static_cast<FeedbackFamily>(uniform_int(rng, 0, 4)));
  // Weight window [max_level, max_level + width) on a ladder with headroom.
  auto wfam = opt.weight.value_or(static_cast<WeightFamily>(uniform_int(rng, 0, 3)));
  if (ffam == FeedbackFamily::cooling_swap) wfam = WeightFamily::mixed_two_level;
  const Index width = wfam == WeightFamily::mixed_two_level ? 2 : uniform_int(rng, 1, 4);
  const Index lo = max_level, dw = lo + width + max_level + 1;
  const Operator h_w = Operator::diagonal(omega * RealVector::LinSpaced(dw, 0.0, double(dw - 1)));
  Matrix rho_w = Matrix::Zero(dw, dw);
  Vector weight_vec = Vector::Zero(dw);
  switch (wfam) {
    case WeightFamily::flat_pure:
      weight_vec.segment(lo, width).setConstant(1.0 / std::sqrt(double(width)));
      rho_w = weight_vec * weight_vec.adjoint();
      break;
    case WeightFamily::random_pure:
      weight_vec.segment(lo, width) = random_pure(width, rng).amplitudes();
      rho_w = weight_vec * weight_vec.adjoint();
      break;
    case WeightFamily::mixed_low_rank:
      rho_w.block(lo, lo, width, width) = random_density(width, rng, std::min<Index>(2, width)).matrix();
      break;
    case WeightFamily::mixed_two_level:
      rho_w(lo, lo) = 0.5;
      rho_w(lo + 1, lo + 1) = 0.5;
      break;
  }
  const auto weight_state = DensityMatrix::from_trusted(rho_w);
  const bool pure_weight = wfam == WeightFamily::flat_pure || wfam == WeightFamily::random_pure;

  if (ffam == FeedbackFamily::coherent_transfer && !pure_weight) ffam = FeedbackFamily::dressed_ground;
  const Operator h_ws = inner_hamiltonian(h_w, h_s);
  LabeledOperators us;
  for (const auto& [label, post] : posts) {
    Matrix u;
    switch (ffam) {
      case FeedbackFamily::dressed_ground:
        u = DressedUnitary(h_s, Operator(detail::transfer(post, ground)), dw, omega, 0).matrix().matrix();
        break;
      case FeedbackFamily::dressed_random:
        u = DressedUnitary(h_s, haar_unitary(d, rng), dw, omega, 0).matrix().matrix();
        break;
      case FeedbackFamily::coherent_transfer:
        u = detail::coherent_transfer(h_ws, kron(weight_vec, post), ground, dw);
        break;
      case FeedbackFamily::energy_blocks:
        u = detail::random_block_unitary(h_ws, rng);
        break;
      case FeedbackFamily::cooling_swap:
        u = detail::cooling_swap(basis, levels, lo, dw);
        break;
    }
    us.emplace_back(label, Operator(std::move(u)));
  }
  LabeledOperators ps;
  for (const auto& o : pointer.outcomes()) ps.emplace_back(o.label, o.projector);
  FeedbackScheme scheme(std::move(us), std::move(ps));

  const DensityMatrix rho_s = opt.thermal_system ? thermal_state(h_s, ctx.beta()) : random_density(d, rng);
  EngineConfig c{"random", h_s, rho_s, h_d, std::move(model), std::move(scheme),
                 WeightConfig{h_w, weight_state, std::nullopt}, ctx};
  c.omega = omega;
  return {std::move(c), mfam, ffam, wfam};
}

// ---------------------------------------------------------------------------
// Impossibility scan

struct ScanReport {
  std::size_t count = 0;
  std::map<std::string, std::size_t> triples;  // "TTF" -> occurrences
  std::size_t all_three = 0;
  std::size_t certification_failures = 0;
  double max_order_gap = 0.0;
  double min_concavity_slack = std::numeric_limits<double>::infinity();
  /// Witnesses of the proof's exclusions: two features hold, the third fails.
  bool f1_f2_not_f3 = false;
  bool f1_f3_not_f2 = false;
  bool f2_f3_not_f1 = false;
};

inline std::string triple_key(const std::array<bool, 3>& t) {
  std::string s;
  for (bool b : t) s += b ? 'T' : 'F';
  return s;
}

inline ScanReport impossibility_scan(std::size_t count, std::uint64_t seed, const RandomEngineOptions& opt = {}) {
  ScanReport rep;
  for (std::size_t i = 0; i < count; ++i) {
    Rng rng = make_rng(seed, i);
    auto eng = random_conforming_engine(rng, opt);
    ++rep.count;
    std::optional<CycleResult> run;
    try {
      run = run_cycle(eng.config);
    } catch (const CertificationError&) {
      ++rep.certification_failures;
      continue;
    }
    const CycleResult& r = *run;
    FeatureReport f{};
    try {
      f = evaluate_features(r, eng.config);
    } catch (const InternalInconsistency&) {
      ++rep.all_three;
      continue;
    }
    const auto t = f.triple();
    ++rep.triples[triple_key(t)];
    rep.f1_f2_not_f3 = rep.f1_f2_not_f3 || (t[0] && t[1] && !t[2]);
    rep.f1_f3_not_f2 = rep.f1_f3_not_f2 || (t[0] && !t[1] && t[2]);
    rep.f2_f3_not_f1 = rep.f2_f3_not_f1 || (!t[0] && t[1] && t[2]);
    if (r.diagnostics.order_gap) rep.max_order_gap = std::max(rep.max_order_gap, *r.diagnostics.order_gap);
    rep.min_concavity_slack = std::min(rep.min_concavity_slack, r.ledger.concavity_slack);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Brute-force qubit models for the WAY implication

struct WayInstance {
  MeasurementModel model;
  Operator h_s;
  Operator h_d;
};

/// Random 2 x 2 measurement model drawn from mixed structured families;
/// empty when the draw admits no energy-conserving premeasurement.
inline std::optional<WayInstance> random_way_instance(Rng& rng) {
  auto random_hermitian = [&](double scale) {
    const Matrix g = ginibre(2, 2, rng);
    return Operator(scale * 0.5 * (g + g.adjoint()));
  };
  const Operator h_s = random_hermitian(1.0);
  const auto sp = eigh(h_s);
  const int target_kind = uniform_int(rng, 0, 1);
  const Matrix tb = target_kind == 0 ? sp.vectors : haar_unitary(2, rng).matrix();
  const auto target = Observable::from_basis({"a", "b"}, {1.0, -1.0}, {tb.col(0), tb.col(1)});

  Operator h_d = Operator::zero(2);
  Vector psi = Vector::Unit(2, 0);
  Matrix db = Matrix::Identity(2, 2);
  const int demon_kind = uniform_int(rng, 0, 2);
  const double gap = sp.values(1) - sp.values(0);
  if (demon_kind == 1) {
    h_d = Operator::diagonal({gap / 2, -gap / 2});
    psi << std::sqrt(0.5), std::sqrt(0.5);
  } else if (demon_kind == 2) {
    h_d = random_hermitian(1.0);
    db = eigh(h_d).vectors;
    psi = random_pure(2, rng).amplitudes();
  }
  const auto pointer = Observable::from_basis({"a", "b"}, {1.0, -1.0}, {db.col(0), db.col(1)});

  LabeledVectors posts;
  const int post_kind = uniform_int(rng, 0, 2);
  for (Index k = 0; k < 2; ++k) {
    Vector v;
    if (post_kind == 0) {
      v = tb.col(k);
    } else if (post_kind == 1) {
      v = (sp.vectors.col(0) + (k == 0 ? 1.0 : -1.0) * sp.vectors.col(1)) / std::sqrt(2.0);
    } else {
      v = random_pure(2, rng).amplitudes();
    }
    posts.emplace_back(k == 0 ? "a" : "b", v);
  }
  try {
    auto model = build_standard_premeasurement(target, posts, pointer, PureState::normalized(psi),
                                               EnergyConstraint{h_s, h_d});
    return WayInstance{std::move(model), h_s, h_d};
  } catch (const ConstructionError&) {
    return std::nullopt;
  }
}

}  // namespace szilard

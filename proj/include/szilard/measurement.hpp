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

// Measurement models (demon Hilbert space, ready state, premeasurement
// unitary, pointer observable), objectification into a Gemenge, energy and
// repeatability certification, and instruments for degenerate observables.

#pragma once

#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "szilard/qop.hpp"

namespace szilard {

struct Outcome {
  std::string label;
  double value;
  Operator projector;
};

/// Spectral family of a self-adjoint operator: complete, mutually orthogonal
/// projectors with unique labels.
class Observable {
 public:
  explicit Observable(std::vector<Outcome> outcomes) : outcomes_(std::move(outcomes)) {
    if (outcomes_.empty()) throw ArgumentError("observable needs at least one outcome");
    const Index n = outcomes_.front().projector.dim();
    Matrix sum = Matrix::Zero(n, n);
    for (std::size_t i = 0; i < outcomes_.size(); ++i) {
      const auto& o = outcomes_[i];
      if (o.projector.dim() != n) throw ArgumentError("observable projectors differ in dimension");
      if (!o.projector.is_projector())
        throw ArgumentError("outcome '" + o.label + "' is not an orthogonal projector");
      for (std::size_t j = 0; j < i; ++j) {
        if (outcomes_[j].label == o.label)
          throw ArgumentError("duplicate outcome label '" + o.label + "'");
        if (!norm_within(outcomes_[j].projector.matrix() * o.projector.matrix(), kAlgTol))
          throw ArgumentError("projectors of '" + outcomes_[j].label + "' and '" + o.label +
                              "' are not orthogonal");
      }
      sum += o.projector.matrix();
    }
    if (!norm_within(sum - Matrix::Identity(n, n), kAlgTol))
      throw ArgumentError("observable projectors do not sum to the identity");
  }

  /// Rank-one spectral family from an orthonormal basis.
  static Observable from_basis(const std::vector<std::string>& labels,
                               const std::vector<double>& values,
                               const std::vector<Vector>& basis) {
    if (labels.size() != basis.size() || values.size() != basis.size())
      throw ArgumentError("from_basis: labels, values and basis differ in length");
    std::vector<Outcome> out;
    for (std::size_t k = 0; k < basis.size(); ++k) {
      const auto v = PureState::normalized(basis[k]).amplitudes();
      out.push_back({labels[k], values[k], Operator::outer(v, v)});
    }
    return Observable(std::move(out));
  }

  const std::vector<Outcome>& outcomes() const { return outcomes_; }
  std::size_t size() const { return outcomes_.size(); }
  Index dim() const { return outcomes_.front().projector.dim(); }

  std::size_t index_of(const std::string& label) const {
    for (std::size_t k = 0; k < outcomes_.size(); ++k)
      if (outcomes_[k].label == label) return k;
    throw ArgumentError("unknown outcome label '" + label + "'");
  }
  const Outcome& at(const std::string& label) const { return outcomes_[index_of(label)]; }

  bool is_nondegenerate() const {
    for (const auto& o : outcomes_)
      if (std::abs(o.projector.trace().real() - 1.0) > 1e-6) return false;
    return true;
  }

  /// sum_x x P^x
  Operator as_operator() const {
    Matrix m = Matrix::Zero(dim(), dim());
    for (const auto& o : outcomes_) m += o.value * o.projector.matrix();
    return Operator(std::move(m));
  }

 private:
  std::vector<Outcome> outcomes_;
};

/// One line of a premeasurement map: |input> (x) |ready> -> |output> (x) |pointer>.
struct PremeasurementRecord {
  std::string label;
  PureState input;
  PureState output;
  PureState pointer;
};

/// Hamiltonians used to demand [U_M, H_S + H_D] = 0 during unitary completion.
struct EnergyConstraint {
  Operator system;
  Operator demon;
};

// ---------------------------------------------------------------------------
// Instruments and Gemenge

struct KrausFamily {
  std::string label;
  std::vector<Operator> kraus;
};

class Instrument {
 public:
  explicit Instrument(std::vector<KrausFamily> families) : families_(std::move(families)) {
    if (families_.empty()) throw ArgumentError("instrument needs at least one outcome");
    const Index n = families_.front().kraus.at(0).dim();
    Matrix sum = Matrix::Zero(n, n);
    for (const auto& f : families_) {
      if (f.kraus.empty()) throw ArgumentError("outcome '" + f.label + "' has no Kraus operators");
      for (const auto& k : f.kraus) {
        if (k.dim() != n) throw ArgumentError("Kraus operators differ in dimension");
        sum += k.matrix().adjoint() * k.matrix();
      }
    }
    if (!norm_within(sum - Matrix::Identity(n, n), kAlgTol))
      throw ConstructionError("instrument violates Kraus completeness");
  }

  const std::vector<KrausFamily>& families() const { return families_; }
  Index dim() const { return families_.front().kraus.front().dim(); }

 private:
  std::vector<KrausFamily> families_;
};

struct Branch {
  std::string label;
  double probability;
  std::optional<DensityMatrix> state;  // empty when probability <= kEigCutoff
};

/// Proper mixture of outcome-labelled states.
class Gemenge {
 public:
  explicit Gemenge(std::vector<Branch> branches) : branches_(std::move(branches)) {
    double total = 0.0;
    for (const auto& b : branches_) {
      if (b.probability < -kAlgTol) throw ArgumentError("negative branch probability");
      if (b.probability > kEigCutoff && !b.state)
        throw ArgumentError("branch '" + b.label + "' with nonzero probability has no state");
      total += b.probability;
    }
    if (std::abs(total - 1.0) > kAlgTol) throw ArgumentError("branch probabilities do not sum to 1");
  }

  const std::vector<Branch>& branches() const { return branches_; }
  const Branch& at(const std::string& label) const {
    for (const auto& b : branches_)
      if (b.label == label) return b;
    throw ArgumentError("unknown branch '" + label + "'");
  }

  /// sum_x p_x rho_x
  DensityMatrix average() const {
    Matrix acc;
    for (const auto& b : branches_) {
      if (!b.state) continue;
      if (acc.size() == 0) acc = Matrix::Zero(b.state->dim(), b.state->dim());
      acc += b.probability * b.state->matrix();
    }
    return DensityMatrix::from_trusted(acc);
  }

 private:
  std::vector<Branch> branches_;
};

namespace detail {

inline Branch make_branch(std::string label, const Matrix& unnormalized) {
  const double p = std::max(0.0, unnormalized.trace().real());
  if (p <= kEigCutoff) return {std::move(label), p, std::nullopt};
  return {std::move(label), p, DensityMatrix::from_trusted(unnormalized / p)};
}

// Groups eigenvectors of a Hermitian matrix into degenerate eigenspaces.
inline std::vector<Matrix> eigenspaces(const Operator& h) {
  const auto sp = eigh(h);
  std::vector<Matrix> spaces;
  Index start = 0;
  const Index n = sp.values.size();
  for (Index k = 1; k <= n; ++k) {
    const bool split =
        k == n || sp.values(k) - sp.values(k - 1) > 1e-8 * std::max(1.0, std::abs(sp.values(k)));
    if (split) {
      spaces.push_back(sp.vectors.middleCols(start, k - start));
      start = k;
    }
  }
  return spaces;
}

// Unitary u on C^k with u a = b, where a^dagger a = b^dagger b. The
// complement of range(a) goes to the complement of range(b) in the order
// produced by complete_basis.
inline Matrix isometric_completion(const Matrix& a, const Matrix& b) {
  const Index k = a.rows();
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const RealVector& s = svd.singularValues();
  Index r = 0;
  while (r < s.size() && s(r) > 1e-10) ++r;
  Matrix ua = svd.matrixU().leftCols(r);
  Matrix wb(k, r);
  for (Index c = 0; c < r; ++c) wb.col(c) = b * svd.matrixV().col(c) / s(c);
  const Matrix domain = complete_basis(ua, k);
  const Matrix image = complete_basis(wb, k);
  return image * domain.adjoint();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Measurement model

class MeasurementModel {
 public:
  /// Validates that U_M is unitary and reproduces every record with fidelity
  /// >= 1 - 1e-9, and that each pointer vector lies in its outcome subspace.
  MeasurementModel(Observable target, Observable pointer, PureState demon_initial,
                   Operator premeasurement, std::vector<PremeasurementRecord> records)
      : target_(std::move(target)),
        pointer_(std::move(pointer)),
        ready_(std::move(demon_initial)),
        unitary_(std::move(premeasurement)),
        records_(std::move(records)) {
    if (ready_.dim() != pointer_.dim()) throw ArgumentError("demon state / pointer dimension mismatch");
    if (unitary_.dim() != target_.dim() * pointer_.dim())
      throw ArgumentError("premeasurement unitary does not act on S (x) D");
    if (!unitary_.is_unitary()) throw ConstructionError("premeasurement is not unitary");
    if (target_.size() != pointer_.size())
      throw ArgumentError("target and pointer observables have different outcome counts");
    for (const auto& o : target_.outcomes()) pointer_.index_of(o.label);
    for (const auto& r : records_) {
      const auto& pd = pointer_.at(r.label).projector;
      if ((pd * r.pointer.amplitudes() - r.pointer.amplitudes()).norm() > 1e-9)
        throw ConstructionError("pointer vector for '" + r.label + "' is outside its subspace");
      const Vector in = kron(r.input.amplitudes(), ready_.amplitudes());
      const Vector out = kron(r.output.amplitudes(), r.pointer.amplitudes());
      const double fid = std::norm(out.dot(unitary_ * in));
      if (fid < 1.0 - 1e-9)
        throw ConstructionError("premeasurement does not reproduce the record for '" + r.label + "'");
    }
  }

  const Observable& target() const { return target_; }
  const Observable& pointer() const { return pointer_; }
  const PureState& demon_initial() const { return ready_; }
  const Operator& premeasurement() const { return unitary_; }
  const std::vector<PremeasurementRecord>& records() const { return records_; }
  Index system_dim() const { return target_.dim(); }
  Index demon_dim() const { return pointer_.dim(); }

  /// Post-measurement state for `label` (non-degenerate targets only).
  const PureState& post_state(const std::string& label) const {
    const PureState* found = nullptr;
    for (const auto& r : records_)
      if (r.label == label) {
        if (found) throw ArgumentError("outcome '" + label + "' has several post-measurement states");
        found = &r.output;
      }
    if (!found) throw ArgumentError("no post-measurement state for '" + label + "'");
    return *found;
  }

  /// Instrument implemented on S: K_{x,k} = (1 (x) <e_k|) U_M (1 (x) |psi>)
  /// for an orthonormal basis e_k of the pointer subspace of x.
  Instrument instrument() const {
    const Index ds = system_dim(), dd = demon_dim();
    std::vector<Matrix> columns;  // U_M (|j> (x) |psi>) reshaped to ds x dd
    for (Index j = 0; j < ds; ++j) {
      const Vector col = unitary_ * kron(Vector(Vector::Unit(ds, j)), ready_.amplitudes());
      Matrix m(ds, dd);
      for (Index i = 0; i < ds; ++i)
        for (Index d = 0; d < dd; ++d) m(i, d) = col(i * dd + d);
      columns.push_back(std::move(m));
    }
    std::vector<KrausFamily> fam;
    for (const auto& o : pointer_.outcomes()) {
      const Matrix basis = range_basis(o.projector);
      KrausFamily f{o.label, {}};
      for (Index k = 0; k < basis.cols(); ++k) {
        Matrix kr(ds, ds);
        for (Index j = 0; j < ds; ++j) kr.col(j) = columns[static_cast<std::size_t>(j)] * basis.col(k).conjugate();
        f.kraus.emplace_back(std::move(kr));
      }
      fam.push_back(std::move(f));
    }
    return Instrument(std::move(fam));
  }

 private:
  Observable target_;
  Observable pointer_;
  PureState ready_;
  Operator unitary_;
  std::vector<PremeasurementRecord> records_;
};

/// Builds U_M from arbitrary records by extending the isometry
/// input (x) ready -> output (x) pointer to a unitary. With an energy
/// constraint the extension is done inside each eigenspace of H_S + H_D,
/// which fails unless the isometry is itself energy compatible.
inline MeasurementModel build_premeasurement(const Observable& target, const Observable& pointer,
                                             const PureState& demon_initial,
                                             std::vector<PremeasurementRecord> records,
                                             const std::optional<EnergyConstraint>& energy = {}) {
  const Index ds = target.dim(), dd = pointer.dim(), n = ds * dd;
  if (demon_initial.dim() != dd) throw ArgumentError("demon state dimension mismatch");
  if (records.empty()) throw ArgumentError("premeasurement needs at least one record");
  const auto m = static_cast<Index>(records.size());
  Matrix a(n, m), b(n, m);
  for (Index k = 0; k < m; ++k) {
    const auto& r = records[static_cast<std::size_t>(k)];
    if (r.input.dim() != ds || r.output.dim() != ds || r.pointer.dim() != dd)
      throw ArgumentError("record dimensions do not match S and D");
    a.col(k) = kron(r.input.amplitudes(), demon_initial.amplitudes());
    b.col(k) = kron(r.output.amplitudes(), r.pointer.amplitudes());
  }
  const Matrix id = Matrix::Identity(m, m);
  if ((a.adjoint() * a - id).norm() > 1e-9)
    throw ConstructionError("premeasurement inputs are not orthonormal");
  {
    Eigen::SelfAdjointEigenSolver<Matrix> es(b.adjoint() * b, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < 1e-9)
      throw ConstructionError("premeasurement images are not linearly independent");
  }
  if ((b.adjoint() * b - id).norm() > 1e-9)
    throw ConstructionError("premeasurement images are not orthonormal, no isometry exists");

  Matrix u;
  if (!energy) {
    u = complete_basis(b, n) * complete_basis(a, n).adjoint();
  } else {
    if (energy->system.dim() != ds || energy->demon.dim() != dd)
      throw ArgumentError("energy constraint dimensions do not match S and D");
    const Operator h = Operator(kron(energy->system.matrix(), Matrix::Identity(dd, dd)) +
                                kron(Matrix::Identity(ds, ds), energy->demon.matrix()));
    u = Matrix::Zero(n, n);
    for (const Matrix& q : detail::eigenspaces(h)) {
      const Matrix qa = q.adjoint() * a, qb = q.adjoint() * b;
      if ((qa.adjoint() * qa - qb.adjoint() * qb).norm() > 1e-9)
        throw ConstructionError("premeasurement map is not energy compatible with H_S + H_D");
      u += q * detail::isometric_completion(qa, qb) * q.adjoint();
    }
  }
  return MeasurementModel(target, pointer, demon_initial, Operator(std::move(u)), std::move(records));
}

using LabeledVectors = std::vector<std::pair<std::string, Vector>>;

/// Standard premeasurement of a non-degenerate target:
/// |phi_x> (x) |psi> -> |post_x> (x) |psi_x>. Pointer vectors default to the
/// first range_basis vector of each pointer projector.
inline MeasurementModel build_standard_premeasurement(
    const Observable& target, const LabeledVectors& post_states, const Observable& pointer,
    const PureState& demon_initial, const std::optional<EnergyConstraint>& energy = {},
    const LabeledVectors& pointer_states = {}) {
  if (!target.is_nondegenerate())
    throw ArgumentError("standard premeasurement needs a non-degenerate target");
  if (post_states.size() != target.size())
    throw ArgumentError("one post-measurement state per outcome is required");
  std::vector<PremeasurementRecord> records;
  for (const auto& o : target.outcomes()) {
    const Vector* post = nullptr;
    for (const auto& [label, v] : post_states)
      if (label == o.label) post = &v;
    if (!post) throw ArgumentError("missing post-measurement state for '" + o.label + "'");
    if (post->size() != target.dim()) throw ArgumentError("post-measurement state dimension mismatch");
    if (std::abs(post->norm() - 1.0) > kAlgTol)
      throw ArgumentError("post-measurement state for '" + o.label + "' is not normalized");
    Vector pointer_vec = range_basis(pointer.at(o.label).projector).col(0);
    for (const auto& [label, v] : pointer_states)
      if (label == o.label) pointer_vec = v;
    records.push_back({o.label, PureState(Vector(range_basis(o.projector).col(0))), PureState(*post),
                       PureState::normalized(pointer_vec)});
  }
  return build_premeasurement(target, pointer, demon_initial, std::move(records), energy);
}

// ---------------------------------------------------------------------------
// Premeasurement and objectification

struct PremeasurementResult {
  DensityMatrix premeasured;  // on S (x) D
  Gemenge objectified;        // branch states on S (x) D
};

inline PremeasurementResult premeasure_and_objectify(const MeasurementModel& model,
                                                     const DensityMatrix& rho_s) {
  if (rho_s.dim() != model.system_dim()) throw ArgumentError("system state dimension mismatch");
  const Index dd = model.demon_dim();
  const Matrix joint = kron(rho_s.matrix(), model.demon_initial().amplitudes() *
                                                model.demon_initial().amplitudes().adjoint());
  const Matrix& u = model.premeasurement().matrix();
  const Matrix pre = u * joint * u.adjoint();
  std::vector<Branch> branches;
  for (const auto& o : model.pointer().outcomes()) {
    const Matrix p = kron(Matrix::Identity(model.system_dim(), model.system_dim()), o.projector.matrix());
    branches.push_back(detail::make_branch(o.label, p * pre * p));
  }
  (void)dd;
  return {DensityMatrix::from_trusted(pre), Gemenge(std::move(branches))};
}

/// Unselective Lueders dephasing of the demon: sum_x (1 (x) P_D^x) rho (1 (x) P_D^x).
inline Matrix objectify(const MeasurementModel& model, const Matrix& rho_sd) {
  Matrix out = Matrix::Zero(rho_sd.rows(), rho_sd.cols());
  const Index ds = model.system_dim();
  for (const auto& o : model.pointer().outcomes()) {
    const Matrix p = kron(Matrix::Identity(ds, ds), o.projector.matrix());
    out += p * rho_sd * p;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Certification

struct MeasurementEnergyReport {
  bool pass;
  double premeasurement_commutator;  // ||[U_M, H_S (x) 1 + 1 (x) H_D]||
  double pointer_commutator;         // ||[Z_D, H_D]||
};

inline MeasurementEnergyReport check_energy_conserving_measurement(const MeasurementModel& model,
                                                                   const Operator& h_s,
                                                                   const Operator& h_d) {
  const Index ds = model.system_dim(), dd = model.demon_dim();
  if (h_s.dim() != ds || h_d.dim() != dd) throw ArgumentError("Hamiltonian dimension mismatch");
  if (!h_s.is_hermitian() || !h_d.is_hermitian()) throw ArgumentError("Hamiltonians must be Hermitian");
  const Operator total(kron(h_s.matrix(), Matrix::Identity(dd, dd)) +
                       kron(Matrix::Identity(ds, ds), h_d.matrix()));
  const double cu = commutator_norm(model.premeasurement(), total);
  const double cz = commutator_norm(model.pointer().as_operator(), h_d);
  return {cu <= kAlgTol && cz <= kAlgTol, cu, cz};
}

struct RepeatabilityReport {
  bool pass;
  /// Per outcome: smallest conditional repeat probability <post|P^x|post>.
  std::vector<std::pair<std::string, double>> fidelities;
};

/// Non-degenerate targets: repeat probability 1 within 1e-9. Degenerate
/// targets: every post-measurement vector within 1e-9 of its outcome subspace.
inline RepeatabilityReport check_repeatable(const MeasurementModel& model) {
  const bool nondegenerate = model.target().is_nondegenerate();
  RepeatabilityReport rep{true, {}};
  for (const auto& o : model.target().outcomes()) {
    double worst = 1.0;
    bool any = false;
    for (const auto& r : model.records()) {
      if (r.label != o.label) continue;
      any = true;
      const Vector& v = r.output.amplitudes();
      const Vector pv = o.projector * v;
      const double fid = v.dot(pv).real();
      worst = std::min(worst, fid);
      const bool ok = nondegenerate ? 1.0 - fid <= 1e-9 : (v - pv).norm() <= 1e-9;
      rep.pass = rep.pass && ok;
    }
    if (any) rep.fidelities.emplace_back(o.label, worst);
  }
  return rep;
}

/// Kraus-level repeatability for instruments: each Kraus operator of outcome
/// x maps into range(P^x).
inline bool instrument_repeatable(const Instrument& instr, const Observable& target) {
  for (const auto& f : instr.families()) {
    const Matrix& p = target.at(f.label).projector.matrix();
    for (const auto& k : f.kraus)
      if (!norm_within(k.matrix() - p * k.matrix(), 1e-9)) return false;
  }
  return true;
}

struct WayReport {
  bool energy_ok;
  bool repeatable;
  bool pointer_commuting;
  bool observable_commutes;
  double premeasurement_commutator;
  double pointer_commutator;
  double observable_commutator;  // ||[M_S, H_S]||
};

/// If U_M conserves H_S + H_D and the measurement is repeatable or the pointer
/// commutes with H_D, then M_S must commute with H_S. A violation means the
/// numerics are broken and raises InternalInconsistency.
inline WayReport way_witness(const MeasurementModel& model, const Operator& h_s, const Operator& h_d) {
  const auto energy = check_energy_conserving_measurement(model, h_s, h_d);
  const auto rep = check_repeatable(model);
  const double cm = commutator_norm(model.target().as_operator(), h_s);
  WayReport w{energy.premeasurement_commutator <= kAlgTol,
              rep.pass,
              energy.pointer_commutator <= kAlgTol,
              cm <= kAlgTol,
              energy.premeasurement_commutator,
              energy.pointer_commutator,
              cm};
  if (w.energy_ok && (w.repeatable || w.pointer_commuting) && !w.observable_commutes)
    throw InternalInconsistency("WAY implication violated: ||[M_S, H_S]|| = " + std::to_string(cm));
  return w;
}

// ---------------------------------------------------------------------------
// Degenerate observables

enum class DegenerateKind { strong_value_correlation, coarse_grained };

/// Per outcome, a unitary acting within range(P^x); K_x = V_x P^x.
using StrongCorrelationData = std::vector<std::pair<std::string, Operator>>;
/// Per outcome, pairs (|phi_x^alpha>, |post_x^alpha>); Kraus |post><phi|.
using CoarseGrainedData = std::vector<std::pair<std::string, std::vector<std::pair<Vector, Vector>>>>;

inline Instrument build_degenerate_instrument(
    DegenerateKind kind, const Observable& target,
    const std::variant<StrongCorrelationData, CoarseGrainedData>& data,
    bool require_repeatable = true) {
  const Index n = target.dim();
  std::vector<KrausFamily> fam;
  if (kind == DegenerateKind::strong_value_correlation) {
    const auto* d = std::get_if<StrongCorrelationData>(&data);
    if (!d) throw ArgumentError("strong value-correlation instrument needs per-outcome unitaries");
    for (const auto& o : target.outcomes()) {
      const Operator* v = nullptr;
      for (const auto& [label, op] : *d)
        if (label == o.label) v = &op;
      if (!v) throw ArgumentError("missing unitary for outcome '" + o.label + "'");
      const Matrix k = v->matrix() * o.projector.matrix();
      if (require_repeatable && !norm_within(k - o.projector.matrix() * k, 1e-9))
        throw ConstructionError("V_x for '" + o.label + "' leaves its outcome subspace");
      fam.push_back({o.label, {Operator(k)}});
    }
  } else {
    const auto* d = std::get_if<CoarseGrainedData>(&data);
    if (!d) throw ArgumentError("coarse-grained instrument needs per-outcome vector pairs");
    for (const auto& o : target.outcomes()) {
      const std::vector<std::pair<Vector, Vector>>* pairs = nullptr;
      for (const auto& [label, ps] : *d)
        if (label == o.label) pairs = &ps;
      if (!pairs) throw ArgumentError("missing vectors for outcome '" + o.label + "'");
      KrausFamily f{o.label, {}};
      for (const auto& [in, out] : *pairs) {
        if (in.size() != n || out.size() != n) throw ArgumentError("instrument vector dimension mismatch");
        const Vector phi = PureState::normalized(in).amplitudes();
        const Vector post = PureState::normalized(out).amplitudes();
        if ((o.projector * phi - phi).norm() > 1e-9)
          throw ConstructionError("input vector for '" + o.label + "' is outside its eigenspace");
        if (require_repeatable && (o.projector * post - post).norm() > 1e-9)
          throw ConstructionError("post vector for '" + o.label + "' is outside its outcome subspace");
        f.kraus.push_back(Operator::outer(post, phi));
      }
      fam.push_back(std::move(f));
    }
  }
  return Instrument(std::move(fam));
}

inline Gemenge apply_instrument(const Instrument& instr, const DensityMatrix& rho) {
  if (rho.dim() != instr.dim()) throw ArgumentError("instrument/state dimension mismatch");
  std::vector<Branch> branches;
  for (const auto& f : instr.families()) {
    Matrix acc = Matrix::Zero(rho.dim(), rho.dim());
    for (const auto& k : f.kraus) acc += k.matrix() * rho.matrix() * k.matrix().adjoint();
    branches.push_back(detail::make_branch(f.label, acc));
  }
  return Gemenge(std::move(branches));
}

}  // namespace szilard

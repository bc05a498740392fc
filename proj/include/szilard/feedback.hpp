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

// Demon-conditioned feedback V = sum_x U_x (x) P_D^x, its certification,
// the conditional maps on weight and system, and ladder-dressed unitaries
// for an oscillator weight.

#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "szilard/qop.hpp"

namespace szilard {

using LabeledOperators = std::vector<std::pair<std::string, Operator>>;

namespace detail {

inline const Operator& find_labeled(const LabeledOperators& ops, const std::string& label,
                                    const char* what) {
  for (const auto& [l, op] : ops)
    if (l == label) return op;
  throw ArgumentError(std::string("unknown ") + what + " label '" + label + "'");
}

// Reduced state of factor k for sum_c w_c |v_c><v_c|.
inline Matrix reduce_vectors(const Matrix& vectors, const RealVector& weights,
                             const std::vector<Index>& dims, std::size_t k) {
  Index left = 1, right = 1;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i < k) left *= dims[i];
    if (i > k) right *= dims[i];
  }
  const Index dk = dims[k];
  Matrix rho = Matrix::Zero(dk, dk);
  for (Index c = 0; c < vectors.cols(); ++c) {
    if (weights(c) == 0.0) continue;
    for (Index l = 0; l < left; ++l) {
      Eigen::Map<const Matrix> m(vectors.col(c).data() + l * dk * right, right, dk);
      rho.noalias() += weights(c) * (m.transpose() * m.conjugate());
    }
  }
  return rho;
}

// Eigen-ensemble of a state with eigenvalues above the cutoff.
struct Ensemble {
  RealVector weights;
  Matrix vectors;
};

inline Ensemble ensemble_of(const DensityMatrix& rho) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(rho.matrix());
  std::vector<Index> keep;
  for (Index i = 0; i < es.eigenvalues().size(); ++i)
    if (es.eigenvalues()(i) > kEigCutoff) keep.push_back(i);
  Ensemble e{RealVector(static_cast<Index>(keep.size())), Matrix(rho.dim(), static_cast<Index>(keep.size()))};
  for (std::size_t c = 0; c < keep.size(); ++c) {
    e.weights(static_cast<Index>(c)) = es.eigenvalues()(keep[c]);
    e.vectors.col(static_cast<Index>(c)) = es.eigenvectors().col(keep[c]);
  }
  e.weights /= e.weights.sum();
  return e;
}

inline Ensemble product_ensemble(const std::vector<Ensemble>& parts) {
  Ensemble out{RealVector::Ones(1), Matrix::Ones(1, 1)};
  for (const auto& p : parts) {
    Ensemble next{RealVector(out.weights.size() * p.weights.size()),
                  Matrix(out.vectors.rows() * p.vectors.rows(), out.weights.size() * p.weights.size())};
    Index c = 0;
    for (Index i = 0; i < out.weights.size(); ++i)
      for (Index j = 0; j < p.weights.size(); ++j, ++c) {
        next.weights(c) = out.weights(i) * p.weights(j);
        next.vectors.col(c) = kron(Vector(out.vectors.col(i)), Vector(p.vectors.col(j)));
      }
    out = std::move(next);
  }
  return out;
}

// ||sum_k s_k a_k a_k^dagger||_F for columns a_k and real coefficients s_k,
// computed from the triangular factor so small differences do not cancel.
inline double signed_gram_norm(const Matrix& cols, const RealVector& s) {
  if (cols.cols() == 0) return 0.0;
  if (cols.cols() >= cols.rows()) return (cols * s.cast<cplx>().asDiagonal() * cols.adjoint()).norm();
  Eigen::HouseholderQR<Matrix> qr(cols);
  const Matrix r = qr.matrixQR().topRows(cols.cols()).triangularView<Eigen::Upper>();
  return (r * s.cast<cplx>().asDiagonal() * r.adjoint()).norm();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Feedback scheme

/// Outcome-indexed unitaries U_x on W (x) S (or W (x) S (x) R) together with
/// the demon projectors P_D^x that select them.
class FeedbackScheme {
 public:
  FeedbackScheme(LabeledOperators branch_unitaries, LabeledOperators demon_projectors,
                 Index reservoir_dim = 1)
      : unitaries_(std::move(branch_unitaries)),
        projectors_(std::move(demon_projectors)),
        reservoir_dim_(reservoir_dim) {
    if (unitaries_.empty()) throw ArgumentError("feedback needs at least one branch");
    if (reservoir_dim_ < 1) throw ArgumentError("reservoir dimension must be positive");
    const Index n = unitaries_.front().second.dim();
    if (n % reservoir_dim_ != 0) throw ArgumentError("branch unitaries do not contain the reservoir factor");
    for (const auto& [label, u] : unitaries_) {
      if (u.dim() != n) throw ArgumentError("branch unitaries differ in dimension");
      if (!u.is_unitary()) throw ConstructionError("branch unitary '" + label + "' is not unitary");
    }
    if (projectors_.size() != unitaries_.size())
      throw ConstructionError("one demon projector per branch unitary is required");
    const Index dd = projectors_.front().second.dim();
    Matrix sum = Matrix::Zero(dd, dd);
    for (std::size_t i = 0; i < projectors_.size(); ++i) {
      const auto& [label, p] = projectors_[i];
      detail::find_labeled(unitaries_, label, "branch");
      if (p.dim() != dd || !p.is_projector())
        throw ConstructionError("demon projector '" + label + "' is not a projector");
      for (std::size_t j = 0; j < i; ++j)
        if (!norm_within(projectors_[j].second.matrix() * p.matrix(), kAlgTol))
          throw ConstructionError("demon projectors are not orthogonal");
      sum += p.matrix();
    }
    if (!norm_within(sum - Matrix::Identity(dd, dd), kAlgTol))
      throw ConstructionError("demon projectors do not form a complete family");
  }

  const LabeledOperators& branch_unitaries() const { return unitaries_; }
  const LabeledOperators& demon_projectors() const { return projectors_; }
  const Operator& unitary(const std::string& x) const { return detail::find_labeled(unitaries_, x, "branch"); }
  const Operator& projector(const std::string& x) const {
    return detail::find_labeled(projectors_, x, "projector");
  }
  Index inner_dim() const { return unitaries_.front().second.dim(); }
  Index reservoir_dim() const { return reservoir_dim_; }
  Index demon_dim() const { return projectors_.front().second.dim(); }
  bool has_reservoir() const { return reservoir_dim_ > 1; }

  /// V on W (x) S (x) D (x) R in the fixed factor order.
  Operator composed() const {
    const Index n = inner_dim(), dd = demon_dim();
    Matrix v = Matrix::Zero(n * dd, n * dd);
    for (const auto& [label, u] : unitaries_) v += kron(u.matrix(), projector(label).matrix());
    if (!has_reservoir()) return Operator(std::move(v));
    const std::vector<Index> dims{n / reservoir_dim_, reservoir_dim_, dd};
    return Operator(permute_factors(v, dims, std::vector<std::size_t>{0, 2, 1}));
  }

  /// V applied to a vector on W (x) S (x) D without forming V (no reservoir).
  Vector apply(const Vector& v) const {
    if (has_reservoir()) return composed() * v;
    const Index n = inner_dim(), dd = demon_dim();
    if (v.size() != n * dd) throw ArgumentError("feedback apply: dimension mismatch");
    // row-major reshape: v(i * dd + d) -> M(i, d); (U (x) P) v -> U M P^T
    Eigen::Map<const Matrix> mt(v.data(), dd, n);  // M^T
    Matrix out_t = Matrix::Zero(dd, n);
    for (const auto& [label, u] : unitaries_)
      out_t.noalias() += projector(label).matrix() * mt * u.matrix().transpose();
    return Eigen::Map<const Vector>(out_t.data(), n * dd);
  }

 private:
  LabeledOperators unitaries_;
  LabeledOperators projectors_;
  Index reservoir_dim_;
};

/// ||V - sum_x (1 (x) P_D^x) V (1 (x) P_D^x)|| on inner (x) D.
inline double feedback_form_defect(const Operator& v, const LabeledOperators& projectors, Index inner_dim) {
  Matrix blocks = Matrix::Zero(v.dim(), v.dim());
  for (const auto& [label, p] : projectors) {
    const Matrix big = kron(Matrix::Identity(inner_dim, inner_dim), p.matrix());
    blocks += big * v.matrix() * big;
  }
  return operator_norm(v.matrix() - blocks);
}

inline bool feedback_form_test(const Operator& v, const LabeledOperators& projectors, Index inner_dim,
                               double tol = kAlgTol) {
  return feedback_form_defect(v, projectors, inner_dim) <= tol;
}

/// Probe test: with U_x read off from the first pointer vector of P_D^x,
/// V(|e_j> (x) |psi_x^k>) = (U_x |e_j>) (x) |psi_x^k> for every inner basis
/// vector e_j and every basis vector psi_x^k of range(P_D^x).
inline bool feedback_probe_test(const Operator& v, const LabeledOperators& projectors, Index inner_dim,
                                double tol = kAlgTol) {
  const Index dd = projectors.front().second.dim();
  if (v.dim() != inner_dim * dd) throw ArgumentError("probe test: dimension mismatch");
  for (const auto& [label, p] : projectors) {
    const Matrix basis = range_basis(p);
    const Vector psi0 = basis.col(0);
    Matrix ux(inner_dim, inner_dim);
    for (Index j = 0; j < inner_dim; ++j) {
      const Vector out = v * kron(Vector(Vector::Unit(inner_dim, j)), psi0);
      for (Index i = 0; i < inner_dim; ++i) ux(i, j) = psi0.dot(out.segment(i * dd, dd));
    }
    for (Index k = 0; k < basis.cols(); ++k)
      for (Index j = 0; j < inner_dim; ++j) {
        const Vector e = Vector::Unit(inner_dim, j);
        const Vector lhs = v * kron(e, Vector(basis.col(k)));
        const Vector rhs = kron(Vector(ux * e), Vector(basis.col(k)));
        if ((lhs - rhs).norm() > tol) return false;
      }
  }
  return true;
}

/// Composes V and confirms both block-form characterizations.
inline FeedbackScheme compose_feedback_unitary(LabeledOperators branch_unitaries,
                                               LabeledOperators demon_projectors) {
  FeedbackScheme scheme(std::move(branch_unitaries), std::move(demon_projectors));
  const Operator v = scheme.composed();
  if (!v.is_unitary()) throw InternalInconsistency("composed feedback is not unitary");
  if (!feedback_form_test(v, scheme.demon_projectors(), scheme.inner_dim()) ||
      !feedback_probe_test(v, scheme.demon_projectors(), scheme.inner_dim()))
    throw InternalInconsistency("composed feedback fails the block-form tests");
  return scheme;
}

// ---------------------------------------------------------------------------
// Energy certification

struct FeedbackEnergyReport {
  bool pass;
  double total_commutator;  // ||[V, H_W + H_S + H_D (+ H_R)]||
  std::vector<std::pair<std::string, double>> branch_commutators;  // ||[U_x, H_W + H_S (+ H_R)]||
  /// Maximal groups of equal branch unitaries with ||sum_{x in group} [P_D^x, H_D]||.
  std::vector<std::pair<std::vector<std::string>, double>> group_commutators;
};

inline Operator inner_hamiltonian(const Operator& h_w, const Operator& h_s,
                                  const std::optional<Operator>& h_r = std::nullopt) {
  Matrix h = kron(h_w.matrix(), Matrix::Identity(h_s.dim(), h_s.dim())) +
             kron(Matrix::Identity(h_w.dim(), h_w.dim()), h_s.matrix());
  if (h_r) {
    const Index n = h.rows();
    h = kron(h, Matrix::Identity(h_r->dim(), h_r->dim())) + kron(Matrix::Identity(n, n), h_r->matrix());
  }
  return Operator(std::move(h));
}

inline FeedbackEnergyReport check_feedback_energy(const FeedbackScheme& scheme, const Operator& h_w,
                                                  const Operator& h_s, const Operator& h_d,
                                                  const std::optional<Operator>& h_r = std::nullopt) {
  for (const Operator* h : {&h_w, &h_s, &h_d})
    if (!h->is_hermitian()) throw ArgumentError("Hamiltonians must be Hermitian");
  const Operator inner = inner_hamiltonian(h_w, h_s, h_r);
  if (inner.dim() != scheme.inner_dim() || h_d.dim() != scheme.demon_dim())
    throw ArgumentError("Hamiltonian dimensions do not match the feedback scheme");
  FeedbackEnergyReport rep{};
  for (const auto& [label, u] : scheme.branch_unitaries())
    rep.branch_commutators.emplace_back(label, commutator_norm(u, inner));

  const auto& us = scheme.branch_unitaries();
  std::vector<bool> used(us.size(), false);
  for (std::size_t i = 0; i < us.size(); ++i) {
    if (used[i]) continue;
    std::vector<std::string> group{us[i].first};
    Matrix sum = commutator(scheme.projector(us[i].first), h_d).matrix();
    used[i] = true;
    for (std::size_t j = i + 1; j < us.size(); ++j)
      if (!used[j] && norm_within(us[i].second.matrix() - us[j].second.matrix(), kAlgTol)) {
        used[j] = true;
        group.push_back(us[j].first);
        sum += commutator(scheme.projector(us[j].first), h_d).matrix();
      }
    rep.group_commutators.emplace_back(std::move(group), operator_norm(sum));
  }

  // Total Hamiltonian in W, S, D, R order.
  const Index dd = h_d.dim();
  Matrix total;
  if (!h_r) {
    total = kron(inner.matrix(), Matrix::Identity(dd, dd)) +
            kron(Matrix::Identity(inner.dim(), inner.dim()), h_d.matrix());
  } else {
    const Operator ws = inner_hamiltonian(h_w, h_s);
    const Index dr = h_r->dim();
    total = kron(kron(ws.matrix(), Matrix::Identity(dd, dd)), Matrix::Identity(dr, dr)) +
            kron(kron(Matrix::Identity(ws.dim(), ws.dim()), h_d.matrix()), Matrix::Identity(dr, dr)) +
            kron(Matrix::Identity(ws.dim() * dd, ws.dim() * dd), h_r->matrix());
  }
  rep.total_commutator = commutator_norm(scheme.composed(), Operator(std::move(total)));
  rep.pass = rep.total_commutator <= kAlgTol;
  return rep;
}

// ---------------------------------------------------------------------------
// Conditional maps

struct ReservoirSpec {
  DensityMatrix state;  // tau_R
  Operator hamiltonian;
};

struct FeedbackOutput {
  DensityMatrix system;
  DensityMatrix weight;
  std::optional<DensityMatrix> reservoir;
};

/// Marginals of U_x (rho_W (x) rho_x [(x) tau_R]) U_x^dagger.
inline FeedbackOutput conditional_feedback_maps(const FeedbackScheme& scheme, const std::string& x,
                                                const DensityMatrix& rho_w, const DensityMatrix& rho_x,
                                                const std::optional<ReservoirSpec>& reservoir = std::nullopt) {
  const Operator& u = scheme.unitary(x);
  const Index dr = reservoir ? reservoir->state.dim() : 1;
  if (dr != scheme.reservoir_dim()) throw ArgumentError("reservoir does not match the feedback scheme");
  if (rho_w.dim() * rho_x.dim() * dr != u.dim()) throw ArgumentError("feedback input dimension mismatch");
  std::vector<detail::Ensemble> parts{detail::ensemble_of(rho_w), detail::ensemble_of(rho_x)};
  if (reservoir) parts.push_back(detail::ensemble_of(reservoir->state));
  detail::Ensemble e = detail::product_ensemble(parts);
  const Matrix out = u.matrix() * e.vectors;
  std::vector<Index> dims{rho_w.dim(), rho_x.dim()};
  if (reservoir) dims.push_back(dr);
  FeedbackOutput res{DensityMatrix::from_trusted(detail::reduce_vectors(out, e.weights, dims, 1)),
                     DensityMatrix::from_trusted(detail::reduce_vectors(out, e.weights, dims, 0)),
                     std::nullopt};
  if (reservoir) res.reservoir = DensityMatrix::from_trusted(detail::reduce_vectors(out, e.weights, dims, 2));
  return res;
}

/// Order check: Frobenius distance between
/// sum_x P_D^x V (rho_W (x) rho_M) V^dagger P_D^x and
/// V (rho_W (x) sum_x P_D^x rho_M P_D^x) V^dagger.
inline double objectification_order_gap(const FeedbackScheme& scheme, const DensityMatrix& rho_w,
                                         const DensityMatrix& rho_sd) {
  if (scheme.has_reservoir()) throw ArgumentError("order check is defined without a reservoir");
  const Index dd = scheme.demon_dim();
  if (rho_w.dim() * rho_sd.dim() != scheme.inner_dim() * dd)
    throw ArgumentError("order check: dimension mismatch");
  const Index ds = rho_sd.dim() / dd;
  Matrix objectified = Matrix::Zero(rho_sd.dim(), rho_sd.dim());
  std::vector<Matrix> big_p;
  for (const auto& [label, p] : scheme.demon_projectors()) {
    big_p.push_back(kron(Matrix::Identity(ds, ds), p.matrix()));
    objectified += big_p.back() * rho_sd.matrix() * big_p.back();
  }
  const auto ew = detail::ensemble_of(rho_w);
  const auto lhs = detail::product_ensemble({ew, detail::ensemble_of(rho_sd)});
  const auto rhs = detail::product_ensemble({ew, detail::ensemble_of(DensityMatrix::from_trusted(objectified))});
  const Index n = scheme.inner_dim() * dd;
  const Index nl = lhs.weights.size() * static_cast<Index>(big_p.size());
  const Index nr = rhs.weights.size();
  Matrix cols(n, nl + nr);
  RealVector s(nl + nr);
  Index c = 0;
  for (Index k = 0; k < lhs.weights.size(); ++k) {
    const Vector out = scheme.apply(lhs.vectors.col(k));
    Eigen::Map<const Matrix> mt(out.data(), dd, scheme.inner_dim());
    for (const auto& [label, p] : scheme.demon_projectors()) {
      Matrix proj = p.matrix() * mt;
      cols.col(c) = Eigen::Map<const Vector>(proj.data(), n);
      s(c++) = lhs.weights(k);
    }
  }
  for (Index k = 0; k < nr; ++k) {
    cols.col(c) = scheme.apply(rhs.vectors.col(k));
    s(c++) = -rhs.weights(k);
  }
  return detail::signed_gram_norm(cols, s);
}

// ---------------------------------------------------------------------------
// Oscillator weight and ladder-dressed unitaries

/// Truncated ladder H_W = omega sum_n n |n><n| (n < cutoff), initial state an
/// equal superposition of levels 2 .. width+1.
class OscillatorWeight {
 public:
  OscillatorWeight(double omega, Index width, Index cutoff) : omega_(omega), width_(width), cutoff_(cutoff) {
    if (!(omega > 0.0)) throw ArgumentError("weight quantum must be positive");
    if (width < 1) throw ArgumentError("superposition width N must be >= 1");
    if (cutoff < width + 4) throw ArgumentError("weight cutoff D_W must be at least N + 4");
  }

  double omega() const { return omega_; }
  Index width() const { return width_; }
  Index cutoff() const { return cutoff_; }

  RealVector energies() const { return omega_ * RealVector::LinSpaced(cutoff_, 0.0, double(cutoff_ - 1)); }
  Operator hamiltonian() const {
    if (static_cast<std::size_t>(cutoff_) > kDefaultMaxDim) throw SizeError("weight too large for a dense Hamiltonian");
    return Operator::diagonal(energies());
  }
  PureState initial() const {
    Vector v = Vector::Zero(cutoff_);
    v.segment(2, width_).setConstant(1.0 / std::sqrt(double(width_)));
    return PureState(std::move(v));
  }
  double mean_energy() const { return omega_ * (double(width_) + 3.0) / 2.0; }

 private:
  double omega_;
  Index width_;
  Index cutoff_;
};

inline OscillatorWeight build_oscillator_weight(double omega, Index n, Index cutoff) {
  return OscillatorWeight(omega, n, cutoff);
}

/// U = sum_n sum_{a,b} |n + m_b - m_a><n| (x) |a><a|G|b><b| on a ladder
/// weight, where m_a = (e_a - e_min)/omega are the integer system levels.
/// Each total-energy block acts as G when every system level fits on the
/// ladder and the lowest weight level in the block is >= floor; all other
/// blocks act as the identity.
class DressedUnitary {
 public:
  DressedUnitary(const Operator& h_s, const Operator& g, Index weight_dim, double omega, Index floor = 1)
      : weight_dim_(weight_dim), floor_(floor) {
    if (!g.is_unitary()) throw ArgumentError("dressing map G must be unitary");
    if (g.dim() != h_s.dim()) throw ArgumentError("G and H_S differ in dimension");
    if (!(omega > 0.0)) throw ArgumentError("ladder quantum must be positive");
    const auto sp = eigh(h_s);
    basis_ = sp.vectors;
    const double e0 = sp.values.minCoeff();
    for (Index a = 0; a < sp.values.size(); ++a) {
      const double m = (sp.values(a) - e0) / omega;
      if (std::abs(m - std::round(m)) > 1e-9)
        throw ConstructionError("H_S spectrum is not on the weight ladder");
      levels_.push_back(static_cast<Index>(std::llround(m)));
    }
    max_level_ = *std::max_element(levels_.begin(), levels_.end());
    if (weight_dim_ <= max_level_ + floor_) throw ConstructionError("weight ladder too short for H_S");
    g_ = basis_.adjoint() * g.matrix() * basis_;
  }

  Index dim() const { return weight_dim_ * system_dim(); }
  Index system_dim() const { return basis_.rows(); }

  Vector apply(const Vector& v) const {
    const Index d = system_dim();
    if (v.size() != dim()) throw ArgumentError("dressed unitary: dimension mismatch");
    Eigen::Map<const Matrix> vm(v.data(), d, weight_dim_);  // column n = system part at level n
    Matrix w = basis_.adjoint() * vm;
    Matrix out = w;
    Vector block(d);
    for (Index total = floor_ + max_level_; total < weight_dim_; ++total) {
      for (Index a = 0; a < d; ++a) block(a) = w(a, total - levels_[a]);
      const Vector mapped = g_ * block;
      for (Index a = 0; a < d; ++a) out(a, total - levels_[a]) = mapped(a);
    }
    const Matrix back = basis_ * out;
    return Eigen::Map<const Vector>(back.data(), dim());
  }

  Operator matrix() const {
    if (static_cast<std::size_t>(dim()) > kDefaultMaxDim) throw SizeError("dressed unitary exceeds the dimension limit");
    Matrix u(dim(), dim());
    for (Index j = 0; j < dim(); ++j) u.col(j) = apply(Vector::Unit(dim(), j));
    return Operator(std::move(u));
  }

 private:
  Index weight_dim_;
  Index floor_;
  Matrix basis_;
  Matrix g_;
  std::vector<Index> levels_;
  Index max_level_ = 0;
};

/// Orthogonal qubit partner (-conj(b), conj(a)) with its first nonzero
/// amplitude made real positive.
inline Vector qubit_complement(const Vector& v) {
  if (v.size() != 2) throw ArgumentError("qubit_complement needs a qubit vector");
  Vector w(2);
  w << -std::conj(v(1)), std::conj(v(0));
  const Index k = std::abs(w(0)) > 1e-12 ? 0 : 1;
  w *= std::abs(w(k)) / w(k);
  return w;
}

/// G_x = |ground><post_x| + |excited><post_x^perp| for a qubit.
inline Operator ground_transfer(const Vector& ground, const Vector& excited, const Vector& post) {
  return Operator(Operator::outer(ground, post).matrix() + Operator::outer(excited, qubit_complement(post)).matrix());
}

/// Shift unitaries for a qubit with post-measurement states keyed by label.
inline std::vector<std::pair<std::string, DressedUnitary>> build_shift_unitaries(
    const Operator& h_s, const std::vector<std::pair<std::string, Vector>>& post_states,
    const OscillatorWeight& weight) {
  if (h_s.dim() != 2) throw ArgumentError("shift unitaries need a qubit system");
  if (weight.width() + 1 >= weight.cutoff() - 1) throw ConstructionError("weight headroom violated");
  const auto sp = eigh(h_s);
  const Vector ground = sp.vectors.col(0), excited = sp.vectors.col(1);
  std::vector<std::pair<std::string, DressedUnitary>> out;
  for (const auto& [label, post] : post_states) {
    if (std::abs(post.norm() - 1.0) > kAlgTol) throw ArgumentError("post state '" + label + "' is not normalized");
    out.emplace_back(label, DressedUnitary(h_s, ground_transfer(ground, excited, post), weight.cutoff(),
                                           weight.omega()));
  }
  return out;
}

struct PureFeedbackOutput {
  DensityMatrix system;
  double weight_energy;   // <H_W> after
  double weight_entropy;  // S of the weight marginal after (equals the system's)
  std::optional<DensityMatrix> weight;  // only when the weight is small enough
};

/// U (|Psi> (x) |post>) for pure inputs without forming dense operators.
inline PureFeedbackOutput conditional_feedback_pure(const DressedUnitary& u, const OscillatorWeight& weight,
                                                    const PureState& psi_w, const PureState& post) {
  const Index d = post.dim();
  if (psi_w.dim() != weight.cutoff() || u.dim() != weight.cutoff() * d)
    throw ArgumentError("pure feedback: dimension mismatch");
  const Vector out = u.apply(kron(psi_w.amplitudes(), post.amplitudes()));
  Eigen::Map<const Matrix> m(out.data(), d, weight.cutoff());  // m(s, n)
  const DensityMatrix rho_s = DensityMatrix::from_trusted(m * m.adjoint());
  const RealVector pops = m.colwise().squaredNorm().transpose();
  PureFeedbackOutput res{rho_s, pops.dot(weight.energies()), von_neumann_entropy(rho_s), std::nullopt};
  if (static_cast<std::size_t>(weight.cutoff()) <= kDefaultMaxDim)
    res.weight = DensityMatrix::from_trusted(m.transpose() * m.conjugate());
  return res;
}

}  // namespace szilard

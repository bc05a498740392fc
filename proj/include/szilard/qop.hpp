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

// Operator-algebra substrate: dense complex operators, states, tensor
// bookkeeping over (W, S, D, R) factors, partial traces and the spectral
// functions (entropy, relative entropy, Gibbs states) the rest of the
// library is built on.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace szilard {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Algebraic tolerance for Hermiticity, unitarity, commutation and traces.
inline constexpr double kAlgTol = 1e-10;
/// Eigenvalues at or below this are treated as zero in entropies and supports.
inline constexpr double kEigCutoff = 1e-12;
inline constexpr std::size_t kDefaultMaxDim = 4096;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class ArgumentError : public Error {
 public:
  using Error::Error;
};
class SizeError : public Error {
 public:
  using Error::Error;
};
class ConstructionError : public Error {
 public:
  using Error::Error;
};
class CertificationError : public Error {
 public:
  using Error::Error;
};
class ErasureError : public Error {
 public:
  using Error::Error;
};
/// Raised when a proven implication is found violated. Always a bug.
class InternalInconsistency : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Norms

/// Largest singular value.
inline double operator_norm(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  const double fro = a.norm();
  if (fro == 0.0) return 0.0;
  if (a.rows() == 1 || a.cols() == 1) return fro;
  if (std::min(a.rows(), a.cols()) > 384) {
    // Power iteration on a^dagger a; dense Gram products are too slow here.
    Vector v(a.cols());
    for (Index i = 0; i < v.size(); ++i) v(i) = cplx(std::cos(0.7 * i + 0.3), std::sin(1.3 * i + 0.1));
    v.normalize();
    double sigma = 0.0;
    for (int it = 0; it < 1000; ++it) {
      Vector w = a.adjoint() * (a * v);
      const double next = std::sqrt(w.norm());
      if (next == 0.0) return 0.0;
      v = w / w.norm();
      if (std::abs(next - sigma) <= 1e-14 * next) return next;
      sigma = next;
    }
    return sigma;
  }
  const Matrix gram = a.rows() <= a.cols() ? Matrix(a * a.adjoint())
                                           : Matrix(a.adjoint() * a);
  Eigen::SelfAdjointEigenSolver<Matrix> es(gram, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

/// ||a|| <= tol in operator norm. Frobenius is an upper bound and is tried
/// first, so the eigensolver only runs on borderline inputs.
inline bool norm_within(const Matrix& a, double tol) {
  if (a.norm() <= tol) return true;
  return operator_norm(a) <= tol;
}

inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline Vector kron(const Vector& a, const Vector& b) {
  Vector out(a.size() * b.size());
  for (Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

// ---------------------------------------------------------------------------
// Operator

class Operator {
 public:
  explicit Operator(Matrix m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols() || m_.rows() == 0)
      throw ArgumentError("operator must be a non-empty square matrix");
    if (!m_.allFinite()) throw ArgumentError("operator has non-finite entries");
  }

  static Operator identity(Index n) { return Operator(Matrix::Identity(n, n)); }
  static Operator zero(Index n) { return Operator(Matrix::Zero(n, n)); }
  static Operator diagonal(const RealVector& d) {
    return Operator(Matrix(d.cast<cplx>().asDiagonal()));
  }
  static Operator diagonal(std::initializer_list<double> d) {
    RealVector v(static_cast<Index>(d.size()));
    Index i = 0;
    for (double x : d) v(i++) = x;
    return diagonal(v);
  }
  /// |a><b|
  static Operator outer(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) throw ArgumentError("outer: size mismatch");
    return Operator(a * b.adjoint());
  }

  Index dim() const { return m_.rows(); }
  const Matrix& matrix() const { return m_; }
  cplx operator()(Index i, Index j) const { return m_(i, j); }

  Operator adjoint() const { return Operator(m_.adjoint()); }
  cplx trace() const { return m_.trace(); }

  bool is_hermitian(double tol = kAlgTol) const {
    return norm_within(m_ - m_.adjoint(), tol);
  }
  bool is_unitary(double tol = kAlgTol) const {
    return norm_within(m_.adjoint() * m_ - Matrix::Identity(dim(), dim()), tol);
  }
  bool is_projector(double tol = kAlgTol) const {
    return is_hermitian(tol) && norm_within(m_ * m_ - m_, tol);
  }

  friend Operator operator+(const Operator& a, const Operator& b) {
    check_same(a, b);
    return Operator(a.m_ + b.m_);
  }
  friend Operator operator-(const Operator& a, const Operator& b) {
    check_same(a, b);
    return Operator(a.m_ - b.m_);
  }
  friend Operator operator*(const Operator& a, const Operator& b) {
    check_same(a, b);
    return Operator(a.m_ * b.m_);
  }
  friend Operator operator*(cplx s, const Operator& a) { return Operator(s * a.m_); }
  friend Operator operator*(double s, const Operator& a) { return Operator(s * a.m_); }
  friend Vector operator*(const Operator& a, const Vector& v) {
    if (v.size() != a.dim()) throw ArgumentError("operator/vector size mismatch");
    return a.m_ * v;
  }

 private:
  static void check_same(const Operator& a, const Operator& b) {
    if (a.dim() != b.dim()) throw ArgumentError("operator dimension mismatch");
  }

  Matrix m_;
};

// ---------------------------------------------------------------------------
// States

class DensityMatrix;

class PureState {
 public:
  explicit PureState(Vector v) : v_(std::move(v)) {
    if (v_.size() == 0) throw ArgumentError("pure state must be non-empty");
    if (!v_.allFinite()) throw ArgumentError("pure state has non-finite amplitudes");
    if (std::abs(v_.norm() - 1.0) > kAlgTol)
      throw ArgumentError("pure state is not normalized");
  }

  /// Rescales a nonzero vector to unit norm.
  static PureState normalized(const Vector& v) {
    const double n = v.norm();
    if (!(n > kEigCutoff)) throw ArgumentError("cannot normalize a null vector");
    return PureState(v / n);
  }
  static PureState basis(Index dim, Index k) {
    if (k < 0 || k >= dim) throw ArgumentError("basis index out of range");
    Vector v = Vector::Zero(dim);
    v(k) = 1.0;
    return PureState(std::move(v));
  }

  Index dim() const { return v_.size(); }
  const Vector& amplitudes() const { return v_; }
  cplx inner(const PureState& other) const { return v_.dot(other.v_); }
  DensityMatrix projector() const;

 private:
  Vector v_;
};

class DensityMatrix {
 public:
  explicit DensityMatrix(Matrix m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols() || m_.rows() == 0)
      throw ArgumentError("density matrix must be a non-empty square matrix");
    if (!m_.allFinite()) throw ArgumentError("density matrix has non-finite entries");
    if (!norm_within(m_ - m_.adjoint(), kAlgTol))
      throw ArgumentError("density matrix is not Hermitian");
    if (std::abs(m_.trace() - cplx(1.0)) > kAlgTol)
      throw ArgumentError("density matrix trace differs from 1");
    const Matrix h = 0.5 * (m_ + m_.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -kAlgTol)
      throw ArgumentError("density matrix has a negative eigenvalue");
  }

  /// For states produced by trace-preserving maps of valid states. Skips the
  /// eigenvalue test and removes round-off anti-Hermitian parts.
  static DensityMatrix from_trusted(const Matrix& m) {
    if (m.rows() != m.cols() || m.rows() == 0 || !m.allFinite())
      throw ArgumentError("malformed density matrix");
    Matrix h = 0.5 * (m + m.adjoint());
    if (std::abs(h.trace().real() - 1.0) > 1e-8)
      throw ArgumentError("derived state lost normalization");
    return DensityMatrix(std::move(h), Trusted{});
  }

  static DensityMatrix maximally_mixed(Index dim) {
    return DensityMatrix(Matrix::Identity(dim, dim) / static_cast<double>(dim), Trusted{});
  }
  static DensityMatrix from_pure(const PureState& psi) {
    return DensityMatrix(psi.amplitudes() * psi.amplitudes().adjoint(), Trusted{});
  }
  /// Diagonal state with the given populations (must be a distribution).
  static DensityMatrix diagonal(const RealVector& p) {
    return DensityMatrix(Matrix(p.cast<cplx>().asDiagonal()));
  }

  Index dim() const { return m_.rows(); }
  const Matrix& matrix() const { return m_; }
  Operator as_operator() const { return Operator(m_); }
  double expectation(const Operator& h) const {
    if (h.dim() != dim()) throw ArgumentError("expectation: dimension mismatch");
    return (h.matrix() * m_).trace().real();
  }
  double purity() const { return (m_ * m_).trace().real(); }

 private:
  struct Trusted {};
  DensityMatrix(Matrix m, Trusted) : m_(std::move(m)) {}

  Matrix m_;
};

inline DensityMatrix PureState::projector() const { return DensityMatrix::from_pure(*this); }

/// Convex combination sum_k w_k rho_k. Weights must be nonnegative and sum to 1.
inline DensityMatrix mix(std::span<const double> weights, std::span<const DensityMatrix> states) {
  if (weights.size() != states.size() || states.empty())
    throw ArgumentError("mix: weights and states must be non-empty and equal length");
  Matrix acc = Matrix::Zero(states[0].dim(), states[0].dim());
  double total = 0.0;
  for (std::size_t k = 0; k < states.size(); ++k) {
    if (states[k].dim() != states[0].dim()) throw ArgumentError("mix: dimension mismatch");
    if (weights[k] < -kAlgTol) throw ArgumentError("mix: negative weight");
    acc += weights[k] * states[k].matrix();
    total += weights[k];
  }
  if (std::abs(total - 1.0) > kAlgTol) throw ArgumentError("mix: weights do not sum to 1");
  return DensityMatrix::from_trusted(acc);
}

// ---------------------------------------------------------------------------
// Tensor products and subsystem layout

inline Operator tensor_product(const Operator& a, const Operator& b,
                               std::size_t max_dim = kDefaultMaxDim) {
  const auto total = static_cast<std::size_t>(a.dim()) * static_cast<std::size_t>(b.dim());
  if (total > max_dim)
    throw SizeError("tensor product dimension " + std::to_string(total) +
                    " exceeds the configured maximum " + std::to_string(max_dim));
  return Operator(kron(a.matrix(), b.matrix()));
}

inline DensityMatrix tensor_product(const DensityMatrix& a, const DensityMatrix& b,
                                    std::size_t max_dim = kDefaultMaxDim) {
  const auto total = static_cast<std::size_t>(a.dim()) * static_cast<std::size_t>(b.dim());
  if (total > max_dim) throw SizeError("tensor product dimension exceeds the configured maximum");
  return DensityMatrix::from_trusted(kron(a.matrix(), b.matrix()));
}

inline PureState tensor_product(const PureState& a, const PureState& b) {
  return PureState(kron(a.amplitudes(), b.amplitudes()));
}

enum class Subsystem { W = 0, S = 1, D = 2, R = 3 };

inline const char* to_string(Subsystem s) {
  switch (s) {
    case Subsystem::W: return "W";
    case Subsystem::S: return "S";
    case Subsystem::D: return "D";
    case Subsystem::R: return "R";
  }
  return "?";
}

struct Factor {
  Subsystem label;
  Index dim;
  Operator hamiltonian;
};

/// Ordered factors of a composite space. Labels must appear in the fixed
/// order W, S, D, R (any subset), each at most once.
class SubsystemLayout {
 public:
  explicit SubsystemLayout(std::vector<Factor> factors, std::size_t max_dim = kDefaultMaxDim)
      : factors_(std::move(factors)) {
    if (factors_.empty()) throw ArgumentError("layout needs at least one factor");
    std::size_t total = 1;
    for (std::size_t k = 0; k < factors_.size(); ++k) {
      const auto& f = factors_[k];
      if (k > 0 && static_cast<int>(factors_[k - 1].label) >= static_cast<int>(f.label))
        throw ArgumentError("layout factors must follow the W, S, D, R order without repeats");
      if (f.dim <= 0) throw ArgumentError("factor dimension must be positive");
      if (f.hamiltonian.dim() != f.dim)
        throw ArgumentError(std::string("Hamiltonian dimension mismatch on factor ") +
                            to_string(f.label));
      if (!f.hamiltonian.is_hermitian())
        throw ArgumentError(std::string("Hamiltonian of factor ") + to_string(f.label) +
                            " is not Hermitian");
      total *= static_cast<std::size_t>(f.dim);
    }
    if (total > max_dim) throw SizeError("layout total dimension exceeds the configured maximum");
    total_ = static_cast<Index>(total);
  }

  const std::vector<Factor>& factors() const { return factors_; }
  Index total_dim() const { return total_; }

  std::vector<Index> dims() const {
    std::vector<Index> d;
    for (const auto& f : factors_) d.push_back(f.dim);
    return d;
  }

  bool contains(Subsystem s) const { return find(s) != factors_.size(); }

  std::size_t position(Subsystem s) const {
    const auto p = find(s);
    if (p == factors_.size())
      throw ArgumentError(std::string("factor ") + to_string(s) + " not in layout");
    return p;
  }

  const Factor& factor(Subsystem s) const { return factors_[position(s)]; }

  /// Pads `op` (acting on the contiguous factors [first, first+count)) with identities.
  Operator embed(const Operator& op, Subsystem first, std::size_t count = 1) const {
    const auto p = position(first);
    if (p + count > factors_.size()) throw ArgumentError("embed: factor range out of layout");
    Index left = 1, mid = 1, right = 1;
    for (std::size_t k = 0; k < factors_.size(); ++k) {
      if (k < p) left *= factors_[k].dim;
      else if (k < p + count) mid *= factors_[k].dim;
      else right *= factors_[k].dim;
    }
    if (op.dim() != mid) throw ArgumentError("embed: operator dimension does not match factors");
    Matrix out = op.matrix();
    if (left > 1) out = kron(Matrix::Identity(left, left), out);
    if (right > 1) out = kron(out, Matrix::Identity(right, right));
    return Operator(std::move(out));
  }

  /// Sum of all factor Hamiltonians embedded in the full space.
  Operator total_hamiltonian() const {
    Matrix h = Matrix::Zero(total_, total_);
    for (const auto& f : factors_) h += embed(f.hamiltonian, f.label).matrix();
    return Operator(std::move(h));
  }

 private:
  std::size_t find(Subsystem s) const {
    for (std::size_t k = 0; k < factors_.size(); ++k)
      if (factors_[k].label == s) return k;
    return factors_.size();
  }

  std::vector<Factor> factors_;
  Index total_ = 1;
};

namespace detail {

// Offsets of the composite index restricted to the chosen factor positions:
// full_index = offsets(keep)[i_keep] + offsets(rest)[i_rest].
inline std::vector<Index> factor_offsets(std::span<const Index> dims,
                                         const std::vector<std::size_t>& positions) {
  std::vector<Index> strides(dims.size(), 1);
  for (std::size_t k = dims.size(); k-- > 1;) strides[k - 1] = strides[k] * dims[k];
  std::vector<Index> offsets{0};
  for (std::size_t p : positions) {
    std::vector<Index> next;
    next.reserve(offsets.size() * static_cast<std::size_t>(dims[p]));
    for (Index base : offsets)
      for (Index d = 0; d < dims[p]; ++d) next.push_back(base + d * strides[p]);
    offsets = std::move(next);
  }
  return offsets;
}

}  // namespace detail

/// Partial trace of a (not necessarily normalized) matrix over every factor
/// whose position is not listed in `keep` (positions ascending).
inline Matrix partial_trace(const Matrix& rho, std::span<const Index> dims,
                            std::span<const std::size_t> keep) {
  Index total = 1;
  for (Index d : dims) total *= d;
  if (rho.rows() != total || rho.cols() != total)
    throw ArgumentError("partial_trace: matrix does not match the factor dimensions");
  if (keep.empty()) throw ArgumentError("partial_trace: keep set is empty");
  std::vector<std::size_t> kept(keep.begin(), keep.end());
  for (std::size_t k = 0; k < kept.size(); ++k) {
    if (kept[k] >= dims.size()) throw ArgumentError("partial_trace: keep position out of range");
    if (k > 0 && kept[k] <= kept[k - 1])
      throw ArgumentError("partial_trace: keep positions must be strictly ascending");
  }
  std::vector<std::size_t> traced;
  for (std::size_t k = 0; k < dims.size(); ++k)
    if (std::find(kept.begin(), kept.end(), k) == kept.end()) traced.push_back(k);
  const auto ko = detail::factor_offsets(dims, kept);
  const auto to = detail::factor_offsets(dims, traced);
  const auto nk = static_cast<Index>(ko.size());
  Matrix out = Matrix::Zero(nk, nk);
  for (Index t : to)
    for (Index j = 0; j < nk; ++j)
      for (Index i = 0; i < nk; ++i) out(i, j) += rho(ko[i] + t, ko[j] + t);
  return out;
}

inline DensityMatrix partial_trace(const DensityMatrix& rho, const SubsystemLayout& layout,
                                   std::span<const Subsystem> keep) {
  if (rho.dim() != layout.total_dim())
    throw ArgumentError("partial_trace: state dimension does not match layout");
  if (keep.empty()) throw ArgumentError("partial_trace: keep set is empty");
  std::vector<std::size_t> pos;
  for (Subsystem s : keep) {
    if (!layout.contains(s))
      throw ArgumentError(std::string("partial_trace: factor ") + to_string(s) + " not in layout");
    pos.push_back(layout.position(s));
  }
  std::sort(pos.begin(), pos.end());
  if (std::adjacent_find(pos.begin(), pos.end()) != pos.end())
    throw ArgumentError("partial_trace: repeated factor in keep set");
  const auto dims = layout.dims();
  return DensityMatrix::from_trusted(partial_trace(rho.matrix(), dims, pos));
}

inline DensityMatrix partial_trace(const DensityMatrix& rho, const SubsystemLayout& layout,
                                   std::initializer_list<Subsystem> keep) {
  return partial_trace(rho, layout, std::span<const Subsystem>(keep.begin(), keep.size()));
}

/// Reorders tensor factors: factor k of the result is factor perm[k] of `m`.
inline Matrix permute_factors(const Matrix& m, std::span<const Index> dims,
                              std::span<const std::size_t> perm) {
  if (perm.size() != dims.size()) throw ArgumentError("permute_factors: bad permutation");
  std::vector<Index> new_dims;
  for (std::size_t p : perm) new_dims.push_back(dims[p]);
  std::vector<Index> old_strides(dims.size(), 1);
  for (std::size_t k = dims.size(); k-- > 1;) old_strides[k - 1] = old_strides[k] * dims[k];
  Index total = 1;
  for (Index d : dims) total *= d;
  std::vector<Index> source(static_cast<std::size_t>(total));
  std::vector<Index> digit(dims.size(), 0);
  for (Index n = 0; n < total; ++n) {
    Index old = 0;
    for (std::size_t k = 0; k < perm.size(); ++k) old += digit[k] * old_strides[perm[k]];
    source[static_cast<std::size_t>(n)] = old;
    for (std::size_t k = perm.size(); k-- > 0;) {
      if (++digit[k] < new_dims[k]) break;
      digit[k] = 0;
    }
  }
  Matrix out(total, total);
  for (Index j = 0; j < total; ++j)
    for (Index i = 0; i < total; ++i)
      out(i, j) = m(source[static_cast<std::size_t>(i)], source[static_cast<std::size_t>(j)]);
  return out;
}

// ---------------------------------------------------------------------------
// Spectral functions

struct Spectrum {
  RealVector values;  // ascending
  Matrix vectors;     // columns
};

inline Spectrum eigh(const Operator& h) {
  if (!h.is_hermitian()) throw ArgumentError("spectral function of a non-Hermitian operator");
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (h.matrix() + h.matrix().adjoint()));
  if (es.info() != Eigen::Success) throw Error("eigendecomposition failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

inline RealVector eigenvalues(const DensityMatrix& rho) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(rho.matrix(), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

/// -sum p ln p over entries above the eigenvalue cutoff.
inline double shannon_entropy(const RealVector& p) {
  double s = 0.0;
  for (Index i = 0; i < p.size(); ++i)
    if (p(i) > kEigCutoff) s -= p(i) * std::log(p(i));
  return s;
}

inline double von_neumann_entropy(const DensityMatrix& rho) {
  return std::max(0.0, shannon_entropy(eigenvalues(rho)));
}

/// S(rho || sigma) in nats; +infinity when supp(rho) is not inside supp(sigma).
inline double relative_entropy(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (rho.dim() != sigma.dim()) throw ArgumentError("relative_entropy: dimension mismatch");
  Eigen::SelfAdjointEigenSolver<Matrix> es(sigma.matrix());
  const RealVector& sv = es.eigenvalues();
  const Matrix& u = es.eigenvectors();
  double cross = 0.0;  // tr[rho ln sigma]
  for (Index j = 0; j < sv.size(); ++j) {
    const double w = (u.col(j).adjoint() * rho.matrix() * u.col(j))(0, 0).real();
    if (sv(j) <= kEigCutoff) {
      if (w > kEigCutoff) return std::numeric_limits<double>::infinity();
      continue;
    }
    cross += w * std::log(sv(j));
  }
  const double value = -von_neumann_entropy(rho) - cross;
  return std::max(0.0, value);
}

/// exp(-beta H)/Z. beta = 0 gives the maximally mixed state.
inline DensityMatrix thermal_state(const Operator& h, double beta) {
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw ArgumentError("beta must be finite and >= 0");
  const auto sp = eigh(h);
  const double e0 = sp.values.minCoeff();
  RealVector w = (-beta * (sp.values.array() - e0)).exp().matrix();
  w /= w.sum();
  Matrix rho = sp.vectors * w.cast<cplx>().asDiagonal() * sp.vectors.adjoint();
  return DensityMatrix::from_trusted(rho);
}

namespace detail {

inline bool is_diagonal(const Matrix& m) {
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = 0; i < m.rows(); ++i)
      if (i != j && m(i, j) != cplx(0.0)) return false;
  return true;
}

// [a, diag(h)]_{ij} = a_ij (h_j - h_i); avoids dense products for large weights.
inline Matrix commutator_with_diagonal(const Matrix& a, const Vector& h) {
  Matrix out(a.rows(), a.cols());
  for (Index j = 0; j < a.cols(); ++j)
    for (Index i = 0; i < a.rows(); ++i) out(i, j) = a(i, j) * (h(j) - h(i));
  return out;
}

}  // namespace detail

inline Operator commutator(const Operator& a, const Operator& b) {
  if (a.dim() != b.dim()) throw ArgumentError("commutator: dimension mismatch");
  if (detail::is_diagonal(b.matrix()))
    return Operator(detail::commutator_with_diagonal(a.matrix(), b.matrix().diagonal()));
  if (detail::is_diagonal(a.matrix()))
    return Operator(-detail::commutator_with_diagonal(b.matrix(), a.matrix().diagonal()));
  return Operator(a.matrix() * b.matrix() - b.matrix() * a.matrix());
}

inline double commutator_norm(const Operator& a, const Operator& b) {
  return operator_norm(commutator(a, b).matrix());
}

inline bool commutes(const Operator& a, const Operator& b, double tol = kAlgTol) {
  return norm_within(commutator(a, b).matrix(), tol);
}

/// Conjugation u rho u^dagger of a valid state by a unitary.
inline DensityMatrix conjugate(const Operator& u, const DensityMatrix& rho) {
  if (u.dim() != rho.dim()) throw ArgumentError("conjugate: dimension mismatch");
  return DensityMatrix::from_trusted(u.matrix() * rho.matrix() * u.matrix().adjoint());
}

/// Orthonormal basis (columns) of the range of a projector, obtained by
/// Gram-Schmidt over the projector's columns in index order.
inline Matrix range_basis(const Operator& projector) {
  const Matrix& p = projector.matrix();
  std::vector<Vector> basis;
  for (Index j = 0; j < p.cols(); ++j) {
    Vector v = p.col(j);
    for (const auto& b : basis) v -= b.dot(v) * b;
    for (const auto& b : basis) v -= b.dot(v) * b;
    const double n = v.norm();
    if (n > 1e-8) basis.push_back(v / n);
  }
  Matrix out(p.rows(), static_cast<Index>(basis.size()));
  for (std::size_t c = 0; c < basis.size(); ++c) out.col(static_cast<Index>(c)) = basis[c];
  return out;
}

/// Extends orthonormal columns to a full orthonormal basis of C^n; the new
/// columns come from Gram-Schmidt over the standard basis in index order.
inline Matrix complete_basis(const Matrix& cols, Index n) {
  std::vector<Vector> basis;
  for (Index c = 0; c < cols.cols(); ++c) basis.push_back(cols.col(c));
  for (Index k = 0; k < n && static_cast<Index>(basis.size()) < n; ++k) {
    Vector v = Vector::Zero(n);
    v(k) = 1.0;
    for (const auto& b : basis) v -= b.dot(v) * b;
    for (const auto& b : basis) v -= b.dot(v) * b;
    const double norm = v.norm();
    if (norm > 1e-6) basis.push_back(v / norm);
  }
  Matrix out(n, n);
  for (Index c = 0; c < n; ++c) out.col(c) = basis[static_cast<std::size_t>(c)];
  return out;
}

}  // namespace szilard

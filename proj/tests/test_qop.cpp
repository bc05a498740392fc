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

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "szilard/qop.hpp"
#include "szilard/random.hpp"

namespace szilard {
namespace {

Matrix sigma_x() {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

Matrix sigma_z() {
  Matrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

// Naive Kronecker product, entry by entry.
Matrix kron_oracle(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      for (Index k = 0; k < b.rows(); ++k)
        for (Index l = 0; l < b.cols(); ++l) out(i * b.rows() + k, j * b.cols() + l) = a(i, j) * b(k, l);
  return out;
}

double max_singular(const Matrix& a) {
  Eigen::JacobiSVD<Matrix> svd(a);
  return svd.singularValues()(0);
}

TEST(Operator, PredicatesAgreeWithDirectRecomputation) {
  Rng rng = make_rng(11);
  for (int t = 0; t < 20; ++t) {
    const Matrix g = ginibre(4, 4, rng);
    const Operator h(0.5 * (g + g.adjoint()));
    EXPECT_TRUE(h.is_hermitian());
    EXPECT_EQ(Operator(g).is_hermitian(), max_singular(g - g.adjoint()) <= kAlgTol);
    const Operator u = haar_unitary(4, rng);
    EXPECT_TRUE(u.is_unitary());
    EXPECT_FALSE(Operator(2.0 * u.matrix()).is_unitary());
    const Vector v = random_pure(4, rng).amplitudes();
    EXPECT_TRUE(Operator::outer(v, v).is_projector());
    EXPECT_FALSE(Operator(0.5 * Operator::outer(v, v).matrix()).is_projector());
  }
}

TEST(Operator, RejectsNonFiniteEntries) {
  Matrix m = Matrix::Identity(2, 2);
  m(0, 1) = cplx(std::nan(""), 0.0);
  EXPECT_THROW(Operator{m}, ArgumentError);
  m(0, 1) = cplx(INFINITY, 0.0);
  EXPECT_THROW(Operator{m}, ArgumentError);
}

TEST(DensityMatrix, ValidatesTypeInvariants) {
  EXPECT_NO_THROW(DensityMatrix(Matrix::Identity(3, 3) / 3.0));
  EXPECT_THROW(DensityMatrix(Matrix::Identity(3, 3)), ArgumentError);
  Matrix neg(2, 2);
  neg << 1.5, 0, 0, -0.5;
  EXPECT_THROW(DensityMatrix{neg}, ArgumentError);
  Matrix nonherm(2, 2);
  nonherm << 0.5, 0.3, 0, 0.5;
  EXPECT_THROW(DensityMatrix{nonherm}, ArgumentError);
}

TEST(TensorProduct, IdentityCase) {
  const auto out = tensor_product(Operator::identity(2), Operator::identity(3));
  EXPECT_TRUE(norm_within(out.matrix() - Matrix::Identity(6, 6), 0.0));
}

TEST(TensorProduct, TraceIsMultiplicative) {
  Rng rng = make_rng(3);
  for (int t = 0; t < 20; ++t) {
    const Operator a(ginibre(3, 3, rng)), b(ginibre(4, 4, rng));
    EXPECT_LT(std::abs(tensor_product(a, b).trace() - a.trace() * b.trace()), 1e-10);
  }
}

TEST(TensorProduct, PauliZWithGroundProjector) {
  Matrix p0 = Matrix::Zero(2, 2);
  p0(0, 0) = 1;
  const auto out = tensor_product(Operator(sigma_z()), Operator(p0));
  RealVector expect(4);
  expect << 1, 0, -1, 0;
  EXPECT_TRUE(norm_within(out.matrix() - Matrix(expect.cast<cplx>().asDiagonal()), 0.0));
}

TEST(TensorProduct, MatchesNaiveOracle) {
  Rng rng = make_rng(5);
  const Matrix a = ginibre(3, 3, rng), b = ginibre(2, 2, rng);
  EXPECT_TRUE(norm_within(kron(a, b) - kron_oracle(a, b), 1e-14));
}

TEST(TensorProduct, EnforcesMaximumDimension) {
  EXPECT_THROW(tensor_product(Operator::identity(64), Operator::identity(65)), SizeError);
  EXPECT_NO_THROW(tensor_product(Operator::identity(64), Operator::identity(64)));
}

TEST(Layout, RejectsBadFactorOrderAndDims) {
  const Operator h2 = Operator::zero(2);
  EXPECT_NO_THROW(SubsystemLayout({{Subsystem::W, 2, h2}, {Subsystem::S, 2, h2}}));
  EXPECT_THROW(SubsystemLayout({{Subsystem::S, 2, h2}, {Subsystem::W, 2, h2}}), ArgumentError);
  EXPECT_THROW(SubsystemLayout({{Subsystem::W, 3, h2}}), ArgumentError);
  Matrix nh = Matrix::Zero(2, 2);
  nh(0, 1) = 1.0;
  EXPECT_THROW(SubsystemLayout({{Subsystem::W, 2, Operator(nh)}}), ArgumentError);
}

TEST(PartialTrace, ProductStateFactorizes) {
  Rng rng = make_rng(7);
  const auto a = random_density(3, rng), b = random_density(2, rng);
  const SubsystemLayout layout({{Subsystem::S, 3, Operator::zero(3)}, {Subsystem::D, 2, Operator::zero(2)}});
  const auto ab = tensor_product(a, b);
  EXPECT_TRUE(norm_within(partial_trace(ab, layout, {Subsystem::S}).matrix() - a.matrix(), 1e-12));
  EXPECT_TRUE(norm_within(partial_trace(ab, layout, {Subsystem::D}).matrix() - b.matrix(), 1e-12));
}

TEST(PartialTrace, BellStateGivesMaximallyMixed) {
  Vector bell = Vector::Zero(4);
  bell(0) = bell(3) = 1.0 / std::sqrt(2.0);
  const auto rho = DensityMatrix::from_pure(PureState(bell));
  const std::vector<Index> dims{2, 2};
  const std::vector<std::size_t> keep{0};
  EXPECT_TRUE(norm_within(partial_trace(rho.matrix(), dims, keep) - Matrix::Identity(2, 2) / 2.0, 1e-14));
}

TEST(PartialTrace, ThreeFactorMiddleKeepMatchesLoopOracle) {
  Rng rng = make_rng(8);
  const auto rho = random_density(2 * 3 * 2, rng);
  const std::vector<Index> dims{2, 3, 2};
  const std::vector<std::size_t> keep{1};
  Matrix oracle = Matrix::Zero(3, 3);
  for (Index i = 0; i < 3; ++i)
    for (Index j = 0; j < 3; ++j)
      for (Index a = 0; a < 2; ++a)
        for (Index c = 0; c < 2; ++c) oracle(i, j) += rho.matrix()(a * 6 + i * 2 + c, a * 6 + j * 2 + c);
  EXPECT_TRUE(norm_within(partial_trace(rho.matrix(), dims, keep) - oracle, 1e-14));
}

TEST(PartialTrace, RejectsBadKeepSets) {
  const std::vector<Index> dims{2, 2};
  const Matrix m = Matrix::Identity(4, 4) / 4.0;
  EXPECT_THROW(partial_trace(m, dims, std::vector<std::size_t>{}), ArgumentError);
  EXPECT_THROW(partial_trace(m, dims, std::vector<std::size_t>{2}), ArgumentError);
  EXPECT_THROW(partial_trace(m, dims, std::vector<std::size_t>{1, 0}), ArgumentError);
}

TEST(PermuteFactors, SwapMatchesKronOrder) {
  Rng rng = make_rng(9);
  const Matrix a = ginibre(2, 2, rng), b = ginibre(3, 3, rng);
  const std::vector<Index> dims{2, 3};
  const std::vector<std::size_t> perm{1, 0};
  EXPECT_TRUE(norm_within(permute_factors(kron(a, b), dims, perm) - kron(b, a), 1e-13));
}

TEST(Entropy, PureStateIsZero) {
  Rng rng = make_rng(1);
  EXPECT_NEAR(von_neumann_entropy(DensityMatrix::from_pure(random_pure(5, rng))), 0.0, 1e-12);
}

TEST(Entropy, MaximallyMixedIsLogDim) {
  for (Index d : {2, 3, 7}) EXPECT_NEAR(von_neumann_entropy(DensityMatrix::maximally_mixed(d)), std::log(double(d)), 1e-12);
}

TEST(Entropy, QuarterThreeQuartersMatchesScalarOracle) {
  RealVector p(2);
  p << 0.25, 0.75;
  const double oracle = -(0.25 * std::log(0.25) + 0.75 * std::log(0.75));
  EXPECT_NEAR(von_neumann_entropy(DensityMatrix::diagonal(p)), oracle, 1e-12);
}

TEST(RelativeEntropy, SelfIsZero) {
  Rng rng = make_rng(2);
  const auto rho = random_density(3, rng);
  EXPECT_NEAR(relative_entropy(rho, rho), 0.0, 1e-10);
}

TEST(RelativeEntropy, DisjointSupportIsInfinite) {
  EXPECT_TRUE(std::isinf(relative_entropy(DensityMatrix::diagonal(RealVector::Unit(2, 0)),
                                          DensityMatrix::diagonal(RealVector::Unit(2, 1)))));
}

TEST(RelativeEntropy, DiagonalCaseMatchesKullbackLeibler) {
  RealVector p(3), q(3);
  p << 0.2, 0.3, 0.5;
  q << 0.4, 0.4, 0.2;
  double oracle = 0.0;
  for (int i = 0; i < 3; ++i) oracle += p(i) * std::log(p(i) / q(i));
  EXPECT_NEAR(relative_entropy(DensityMatrix::diagonal(p), DensityMatrix::diagonal(q)), oracle, 1e-12);
}

TEST(ThermalState, ZeroBetaIsMaximallyMixed) {
  const auto tau = thermal_state(Operator::diagonal({0.0, 1.0, 3.0}), 0.0);
  EXPECT_TRUE(norm_within(tau.matrix() - Matrix::Identity(3, 3) / 3.0, 1e-14));
}

TEST(ThermalState, LargeBetaApproachesGround) {
  const Operator h = Operator::diagonal({2.0, -1.0, 0.5});
  const auto tau = thermal_state(h, 1e6 / 2.0);
  Matrix ground = Matrix::Zero(3, 3);
  ground(1, 1) = 1.0;
  EXPECT_TRUE(norm_within(tau.matrix() - ground, 1e-6));
}

TEST(ThermalState, QubitExcitedPopulationMatchesScalarGibbs) {
  const double omega = 1.7;
  const auto tau = thermal_state(Operator::diagonal({omega / 2, -omega / 2}), 1.0 / omega);
  EXPECT_NEAR(tau.matrix()(0, 0).real(), 1.0 / (1.0 + std::exp(1.0)), 1e-12);
}

TEST(ThermalState, RejectsNegativeBeta) {
  EXPECT_THROW(thermal_state(Operator::diagonal({0.0, 1.0}), -1.0), ArgumentError);
}

TEST(Commutator, SelfCommutes) {
  Rng rng = make_rng(4);
  const Matrix g = ginibre(4, 4, rng);
  const Operator h(g + g.adjoint());
  EXPECT_NEAR(commutator_norm(h, h), 0.0, 1e-12);
}

TEST(Commutator, PauliXZIsTwo) {
  EXPECT_NEAR(commutator_norm(Operator(sigma_x()), Operator(sigma_z())), 2.0, 1e-12);
}

TEST(Commutator, DiagonalFastPathMatchesDense) {
  Rng rng = make_rng(6);
  const Operator a(ginibre(5, 5, rng));
  const Operator d = Operator::diagonal({0.1, -0.4, 2.0, 0.0, 1.3});
  const Matrix dense = a.matrix() * d.matrix() - d.matrix() * a.matrix();
  EXPECT_TRUE(norm_within(commutator(a, d).matrix() - dense, 1e-13));
  EXPECT_TRUE(norm_within(commutator(d, a).matrix() + dense, 1e-13));
}

TEST(OperatorNorm, MatchesSingularValuesSmallAndLarge) {
  Rng rng = make_rng(10);
  const Matrix small = ginibre(6, 6, rng);
  EXPECT_NEAR(operator_norm(small), max_singular(small), 1e-12);
  // Above the dense threshold: rank-one plus identity, known norm.
  const Index n = 400;
  const Vector v = random_pure(n, rng).amplitudes();
  const Matrix big = Matrix::Identity(n, n) + 3.0 * v * v.adjoint();
  EXPECT_NEAR(operator_norm(big), 4.0, 1e-9);
}

}  // namespace
}  // namespace szilard

// Copyright The phmor Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef PHMOR_NUMERICS_HPP
#define PHMOR_NUMERICS_HPP

#include <functional>
#include "phmor/system.hpp"

namespace phmor
{

inline constexpr double kRankTol = 1e-12;

// Full SVD A = U diag(sigma) V^T with nonincreasing singular values. U is p x p, V is q x q.
struct SvdResult
{
  Matrix U;
  Vector sigma;
  Matrix V;

  // Number of singular values above rel_tol * sigma_max. Throws RankAmbiguous when a
  // singular value lies within a factor ambiguity_band of the cutoff.
  Index Rank(double rel_tol = kRankTol, double ambiguity_band = 10.0) const;
  // Ratio of the last retained to the first dropped singular value (inf if none dropped).
  double Gap(Index rank) const;
};

SvdResult SvdFull(const Matrix &A);

// A = C Rhat C^T for symmetric PSD A, eigenvalues ordered decreasingly; Chat spans the
// truncated eigenspace.
struct OrderedSpectralFactorization
{
  Matrix C;
  Matrix Rhat;
  Matrix Chat;
  Index rank = 0;
};

// Throws Indefinite if lambda_min < -tol * |lambda|_max, ContractViolation if A is not
// symmetric within tol.
OrderedSpectralFactorization OrderedPsdFactorization(const Matrix &A,
                                                     double rank_tol = kRankTol,
                                                     double tol = kDefaultTol);

// Solves A X + X A^T + W = 0 for Hurwitz A (complex Schur, column-wise back substitution).
// Throws NotStable when an eigenvalue has real part >= -1e-13 ||A||.
Matrix SolveLyapunov(const Matrix &A, const Matrix &W);

// Complex Schur form A = U T U^*, checked to be Hurwitz as above.
struct SchurForm
{
  CMatrix T, U;
};
SchurForm HurwitzSchur(const Matrix &A);

// SolveLyapunov with a precomputed Schur form of A.
Matrix SolveLyapunov(const SchurForm &schur, const Matrix &W);

// Lower-triangular K with K K^T = A. Throws Indefinite for a non-SPD input.
Matrix CholeskySpd(const Matrix &A, double tol = kDefaultTol);

// Orthonormal basis of range(A) and of ker(A), rank decided with rel_tol.
Matrix RangeBasis(const Matrix &A, double rel_tol = kRankTol);
Matrix NullBasis(const Matrix &A, double rel_tol = kRankTol);

// Expansion point of a Krylov space: a complex number or infinity.
struct Shift
{
  bool infinite = true;
  Complex value = 0.0;

  static Shift Infinity() { return {}; }
  static Shift At(Complex s) { return {false, s}; }
  bool IsReal() const { return infinite || value.imag() == 0.0; }
  std::string ToString() const;
};

struct KrylovBasis
{
  Matrix V;
  Shift shift;
  Index r() const { return V.cols(); }
};

using LinearOperator = std::function<Vector(const Vector &)>;

// Block Arnoldi: orthonormal basis of span{B, A B, A^2 B, ...} truncated to r columns, built
// column by column (modified Gram-Schmidt, one reorthogonalization pass). A candidate is
// deflated when orthogonalization leaves less than 1e-12 of its norm. The achieved dimension
// can be below r.
KrylovBasis Arnoldi(const LinearOperator &apply, const Matrix &start, Index r);

// Explicit ODE with marginal (near-zero) eigenvalues removed. Each removed mode must be
// uncontrollable or unobservable, so the transfer function is unchanged. Coordinates:
// x ~ embed z on the reachable part, z = project x.
struct DeflatedOde
{
  StateSpace ode;
  Matrix embed;
  Matrix project;
  Index removed = 0;
};

// Throws NotStable when a marginal mode is both controllable and observable or defective.
DeflatedOde DeflateMarginalModes(const StateSpace &sys, double tol = 1e-9);

}  // namespace phmor

#endif  // PHMOR_NUMERICS_HPP

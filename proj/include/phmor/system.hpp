// Copyright The phmor Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef PHMOR_SYSTEM_HPP
#define PHMOR_SYSTEM_HPP

#include <complex>
#include <string>
#include <vector>
#include <Eigen/Dense>

namespace phmor
{

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

inline constexpr double kDefaultTol = 1e-10;

//
// Linear constant-coefficient port-Hamiltonian descriptor system
//
//   E x' = (J - R) Q x + (B - P) u,
//   y    = (B + P)^T Q x + (S + N) u.
//
// P, S and N are always materialized (zero when absent).
//
struct PhdaeSystem
{
  Matrix E, J, R, Q;
  Matrix B, P;
  Matrix S, N;

  Index n() const { return E.rows(); }
  Index m() const { return B.cols(); }

  // Builds a system without feed-through (P = 0, S = N = 0).
  static PhdaeSystem Make(Matrix E, Matrix J, Matrix R, Matrix Q, Matrix B);

  // Throws DimensionMismatch unless all blocks agree with n() and m().
  void CheckDimensions() const;

  // (J - R) Q
  Matrix SystemMatrix() const { return (J - R) * Q; }
  Matrix InputMatrix() const { return B - P; }
  Matrix OutputMatrix() const { return (B + P).transpose() * Q; }
  Matrix FeedThrough() const { return S + N; }
};

struct ValidationReport
{
  struct Condition
  {
    std::string name;
    double residual;  // relative residual, or -lambda_min / ||.|| for definiteness checks
    bool pass;
  };
  double tol = kDefaultTol;
  std::vector<Condition> conditions;

  bool Pass() const;
  const Condition &Get(const std::string &name) const;
  std::string Summary() const;
};

// Structural conditions of a pHDAE: Q^T J Q skew, Q^T E symmetric PSD, passivity matrix
// W = [Q^T R Q, Q^T P; P^T Q, S] symmetric PSD, S symmetric, N skew. Residuals are relative
// to the Frobenius norm of the tested matrix.
ValidationReport ValidatePhdae(const PhdaeSystem &sys, double tol = kDefaultTol);

// H(x) = 1/2 x^T Q^T E x
double Hamiltonian(const PhdaeSystem &sys, const Vector &x);

// Congruence/equivalence transformation preserving the pH structure and the Hamiltonian:
// E -> U^T E V, J -> U^T J U, R -> U^T R U, B -> U^T B, P -> U^T P, Q -> U^{-1} Q V.
// New state is V^{-1} x.
PhdaeSystem Transform(const PhdaeSystem &sys, const Matrix &U, const Matrix &V);

// 2-norm condition number (via singular values).
double ConditionNumber(const Matrix &A);

//
// Three-block decoupled form. States x1 (dynamic, Q11 SPD), x2 (kernel of the energy
// matrix), x3 (algebraic). E = diag(I, I, 0) is implicit and
//
//   Q = [Q11 0 0; 0 0 0; Q31 Q32 Q33],   (J - R)_{13} = (J - R)_{23} = 0.
//
// J, R and B are stored assembled; Block() gives views on the partition.
//
struct BlockPhdae
{
  Index n1 = 0, n2 = 0, n3 = 0;
  Matrix J, R;  // n x n
  Matrix Q11, Q31, Q32, Q33;
  Matrix B;     // n x m

  Index n() const { return n1 + n2 + n3; }
  Index m() const { return B.cols(); }
  Index Offset(int block) const;
  Index Size(int block) const;

  // Block (i, j) of an assembled n x n matrix, i, j in {1, 2, 3}.
  Matrix Block(const Matrix &M, int i, int j) const;
  // Row block i of B.
  Matrix InputBlock(int i) const;
  // Assembled Q.
  Matrix AssembledQ() const;
};

// Throws ContractViolation when a block invariant fails (beyond the structural pH
// conditions, which assemble + ValidatePhdae check).
void CheckBlockInvariants(const BlockPhdae &b, double tol = kDefaultTol);

PhdaeSystem AssembleBlock(const BlockPhdae &b);

//
// Standard state space realization  E x' = A x + B u, y = C x + D u.  An empty E means
// the identity.
//
struct StateSpace
{
  Matrix A, B, C, D;
  Matrix E;

  Index n() const { return A.rows(); }
  Index m() const { return B.cols(); }
  bool HasIdentityE() const { return E.size() == 0; }
  // Converts to E = I by solving with E.
  StateSpace Explicit() const;
};

// Underlying ODE of a block system: algebraic states eliminated, kernel states dropped
// (they are unobservable).
StateSpace UnderlyingOde(const BlockPhdae &b);

// Index-1 elimination for systems whose E has the structure diag(E11, 0) with trailing
// exactly-zero rows and columns. Throws IndexTooHigh when the algebraic block is singular.
StateSpace EliminateAlgebraic(const PhdaeSystem &sys);

// Helpers.
inline Matrix SymPart(const Matrix &A) { return 0.5 * (A + A.transpose()); }
inline Matrix SkewPart(const Matrix &A) { return 0.5 * (A - A.transpose()); }
// Smallest eigenvalue of sym(A); +inf for an empty matrix.
double MinSymEigenvalue(const Matrix &A);

}  // namespace phmor

#endif  // PHMOR_SYSTEM_HPP

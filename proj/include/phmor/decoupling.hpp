// Copyright The phmor Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef PHMOR_DECOUPLING_HPP
#define PHMOR_DECOUPLING_HPP

#include "phmor/numerics.hpp"
#include "phmor/system.hpp"

namespace phmor
{

//
// Index-1 decoupling result. `system` is the transformed pHDAE
//
//   [E11 0; 0 0] x' = [L11 0; L21 L22] [Q11 0; Q21 Q22] x + (B - P) u
//
// with x_orig = V x. The hat coefficients define the implicit pHODE on x1.
//
struct Index1Decoupling
{
  Index nd = 0;  // dynamic dimension
  Index na = 0;  // algebraic dimension
  PhdaeSystem system;
  Matrix Bhat1, Phat1, Shat, Nhat;
  Matrix U, V;
  double l22_condition = 1.0;

  Matrix E11() const { return system.E.topLeftCorner(nd, nd); }
  Matrix L() const { return system.J - system.R; }

  // (E11, J11, R11, Q11, Bhat1, Phat1, Shat, Nhat)
  PhdaeSystem ImplicitOde() const;

  // Solves L22 Q22 x2 = -(L21 Q11 + L22 Q21) x1 - (B2 - P2) u.
  Vector RecoverAlgebraic(const Vector &x1, const Vector &u) const;
};

Index1Decoupling DecoupleIndex1(const PhdaeSystem &sys, double rank_tol = kRankTol);

struct KernelSplit
{
  Matrix SigmaQ;  // n_a x n_a, diagonal SPD
  Matrix Ubar;    // orthogonal, columns ordered (range, kernel)
  Index n_a = 0, n_b = 0;
};

// A block system together with the map to the coordinates it came from:
// x_orig = state_map * x_block.
struct Decoupled
{
  BlockPhdae block;
  Matrix state_map;
  KernelSplit split;
};

// Rotates the dynamic state so that Q11 E11^{-1} becomes diag(Sigma_Q, 0) and E11 = I.
// Requires P = 0, S = 0, N = 0 on the decoupled system (NotApplicable otherwise), since the
// block form carries no feed-through.
Decoupled SplitKernel(const Index1Decoupling &d, double rank_tol = kRankTol);

// DecoupleIndex1 followed by SplitKernel.
Decoupled DecoupleToBlock(const PhdaeSystem &sys, double rank_tol = kRankTol);

// Hidden constraints Ahat x = 0 satisfied by every solution (c x n).
struct HiddenConstraints
{
  Matrix Ahat;
  Index count() const { return Ahat.rows(); }
};

// Index reduction with known hidden constraints. With V_k an orthonormal basis of ker Ahat
// and W chosen so that V_k^T Q^T E W = 0 and Ahat W is invertible, the state is written as
// x = V_k a + W b. Since b = 0 on all solutions, the E-columns belonging to b are dropped.
// The result is again a pHDAE with the same J, R, B, P; the n-c states a are dynamic or
// index-one algebraic. Throws MalformedConstraints when no such W exists.
// If state_map is given it receives V with x_orig = V x_new.
PhdaeSystem ReduceIndex2(const PhdaeSystem &sys, const HiddenConstraints &h,
                         double rank_tol = kRankTol, Matrix *state_map = nullptr);

// Makes (J - R)_{13} and (J - R)_{23} exactly zero by setting J's coupling blocks equal to
// R's (J stays skew). Throws InconsistentState if the coupling is not already negligible.
void EnforceAlgebraicDecoupling(BlockPhdae &b, double tol = 1e-8);

// Algebraic states of a block system: x3 = -Q33^{-1}(Q31 x1 + Q32 x2 + L33^{-1}(L31 Q11 x1
// + B3 u)).
Vector RecoverAlgebraic(const BlockPhdae &b, const Vector &x1, const Vector &x2,
                        const Vector &u);

}  // namespace phmor

#endif  // PHMOR_DECOUPLING_HPP

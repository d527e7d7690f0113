// Copyright The phmor Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef PHMOR_REDUCTION_HPP
#define PHMOR_REDUCTION_HPP

#include <string>
#include <vector>
#include "phmor/numerics.hpp"
#include "phmor/system.hpp"

namespace phmor
{

//
// Splitting x1 = Vhat [x1r; x1s] of the dynamic state, ordered by Hankel singular values.
//
struct BalancingSplit
{
  Matrix Vhat, Vhat_inv;
  Vector hankel;
  Index r = 0;
  bool balancing_free = false;
  double condition = 1.0;
};

// Gramians of the underlying ODE of a block system, computed once and reused for every r.
// Marginal modes that do not reach the output are deflated before the Lyapunov solves.
class GramianBalancer
{
public:
  explicit GramianBalancer(const BlockPhdae &b);

  Index n1() const { return n1_; }
  const Vector &Hankel() const { return hankel_; }
  const Matrix &ControllabilityGramian() const { return P_; }
  const Matrix &ObservabilityGramian() const { return Q_; }

  // Square-root (balancing_free = false) or balancing-free square-root splitting.
  BalancingSplit Split(Index r, bool balancing_free) const;

private:
  Index n1_ = 0;
  Matrix P_, Q_;
  Matrix S_, Rf_;  // P = S S^T, Q = Rf Rf^T
  Matrix Z_, Y_;   // Rf^T S = Z diag(hankel) Y^T
  Vector hankel_;
};

BalancingSplit BalanceSplit(const BlockPhdae &b, Index r, bool balancing_free);

//
// Block system transformed by V = diag(Vhat, I, I) with the dissipation factored as
// R = C Rhat C^T. Block 1 is ordered (x1r, x1s).
//
struct OpenPortRepresentation
{
  BlockPhdae sys;
  Index r = 0;
  Matrix C, Rhat;
  Index ell = 0;

  Index ns() const { return sys.n1 - r; }
  // Index lists into the assembled state: retained (r, 2, 3) and truncated (s).
  std::vector<Index> Retained() const;
  std::vector<Index> Truncated() const;
};

OpenPortRepresentation OpenResistivePort(const BlockPhdae &b, const BalancingSplit &split);

enum class Method
{
  Ecrm,
  Fcrm,
  MomentMatching
};

const char *to_string(Method m);
Method ParseMethod(const std::string &name);

struct ReducedModel
{
  PhdaeSystem system;  // E = diag(I_r, I_n2, 0)
  Method method = Method::Ecrm;
  Index r = 0;
  Index n2 = 0, n3 = 0;
  Shift shift;
  std::string provenance;
};

ReducedModel Ecrm(const OpenPortRepresentation &rep);
// Throws NotApplicable when J11^ss is singular.
ReducedModel Fcrm(const OpenPortRepresentation &rep);
ReducedModel MomentMatch(const BlockPhdae &b, Index r, const Shift &s0);

// Balancing, port opening and ECRM or FCRM in one step. FCRM uses the balancing-free
// splitting by default, ECRM the square-root one.
ReducedModel ReduceByPowerConservation(const BlockPhdae &b, const GramianBalancer &bal,
                                       Method method, Index r);

struct Moments
{
  std::vector<CMatrix> m;
  Matrix polynomial;  // constant part, reported separately at s0 = infinity
};

// G(s) = sum_j m_j (s0 - s)^j for finite s0; Markov parameters C A^j B of the proper part at
// s0 = infinity. Throws PoleHit when s0 E - A is singular.
Moments ComputeMoments(const StateSpace &sys, const Shift &s0, Index k);
Moments ComputeMoments(const PhdaeSystem &sys, const Shift &s0, Index k);

}  // namespace phmor

#endif  // PHMOR_REDUCTION_HPP

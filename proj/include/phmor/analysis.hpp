// Copyright The phmor Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef PHMOR_ANALYSIS_HPP
#define PHMOR_ANALYSIS_HPP

#include <cmath>
#include <functional>
#include <string>
#include <vector>
#include "phmor/system.hpp"

namespace phmor
{

// G(s) = (B + P)^T Q (sE - (J - R) Q)^{-1} (B - P) + S + N by a dense solve. Throws PoleHit.
CMatrix TransferEval(const PhdaeSystem &sys, Complex s);
// G(s) = C (sE - A)^{-1} B + D.
CMatrix TransferEval(const StateSpace &sys, Complex s);

double SpectralNorm(const CMatrix &G);

struct FrequencyGrid
{
  std::vector<double> omega;

  // count points, logarithmically spaced in [lo, hi].
  static FrequencyGrid Log(double lo, double hi, Index count);
  static FrequencyGrid Default() { return Log(1e-6, 1e6, 400); }
  Index size() const { return Index(omega.size()); }
};

//
// Transfer function evaluator for an explicit realization, reduced once to upper Hessenberg
// form so that each frequency costs O(n^2 m).
//
class FrequencyResponse
{
public:
  explicit FrequencyResponse(const StateSpace &sys);
  // Algebraic elimination first (EliminateAlgebraic).
  static FrequencyResponse FromSystem(const PhdaeSystem &sys);

  Index n() const { return H_.rows(); }
  Index m() const { return B_.cols(); }
  Index p() const { return C_.rows(); }

  // Throws PoleHit if sI - A is numerically singular.
  CMatrix Eval(Complex s) const;

  // Values at s = i omega_k. Entries at poles are left empty (size 0).
  std::vector<CMatrix> Sweep(const std::vector<double> &omega) const;        // OpenMP
  std::vector<CMatrix> SweepSerial(const std::vector<double> &omega) const;  // reference

private:
  Matrix H_, B_, C_, D_;
};

struct ErrorCurve
{
  std::vector<double> omega, norm_G, norm_err, rel_err;
  std::vector<char> valid;  // 0 where the full resolvent was singular
};

ErrorCurve RelativeErrorCurve(const FrequencyResponse &full, const FrequencyResponse &reduced,
                              const FrequencyGrid &grid);

struct NormEstimate
{
  std::string kind;
  double value = 0.0;       // sup ||G - Gr||, lower bound
  double omega_at_max = 0.0;
  double reference = 0.0;   // sup ||G||
  double ratio = 0.0;       // value / reference
  double pointwise_rel_sup = 0.0;
  double refine_tol = 0.0;
  bool unbounded = false;
};

// Sampled H-infinity error: grid maximum (and omega = 0 when both are regular there) refined
// by golden-section search in log omega. Unbounded is set when the error grows between
// omega = 1e10 and 1e12.
NormEstimate HinfEstimate(const FrequencyResponse &full, const FrequencyResponse &reduced,
                          const FrequencyGrid &grid, double refine_tol = 1e-6);

// H2 norm of an explicit (or E-invertible) realization. Throws Unbounded for D != 0 and
// NotStable for unstable visible dynamics. Marginal hidden modes are deflated.
double H2Norm(const StateSpace &sys);

// Realization of G - Gr.
StateSpace ErrorSystem(const StateSpace &full, const StateSpace &reduced);

// H2 errors of many reduced models against one full model. The error Gramian splits into
// the full Gramian (computed once), the reduced one and a coupling block that solves a
// Sylvester equation against the cached Schur form, so each call costs O(n^2 r).
class H2ErrorEvaluator
{
public:
  // Throws like H2Norm.
  explicit H2ErrorEvaluator(const StateSpace &full);

  double FullNorm() const { return std::sqrt(full_sq_); }
  // ||G - Gr||_H2; Unbounded when the feed-through differs.
  double ErrorNorm(const StateSpace &reduced) const;

private:
  StateSpace full_;  // explicit, hidden marginal modes removed
  CMatrix T_, U_;    // A^T = U T U^*
  double full_sq_ = 0.0;
};

//
// Time-domain power balance of a block system, implicit midpoint rule on (x1, x2) and
// algebraic states recovered at the midpoint.
//
struct DissipationResult
{
  std::vector<double> t, energy;
  std::vector<double> supply;        // dt * u^T y at the midpoint, per step
  std::vector<double> dissipation;   // dt * [x; u]^T W [x; u] at the midpoint, per step
  std::vector<double> residual;      // dH - supply + dissipation (midpoint quadrature)
  std::vector<double> residual_trapezoid;  // same with trapezoidal quadrature
  bool nonincreasing = true;               // H_{k+1} <= H_k (up to round-off)
  bool inequality_holds = true;            // dH <= supply (up to round-off)

  double ResidualPerUnitTime() const;
  double TrapezoidResidualPerUnitTime() const;
};

using InputSignal = std::function<Vector(double)>;

// x0 is either the dynamic state (x1, x2) or the full block state; in the latter case x3 is
// replaced by its consistent value and InconsistentState is thrown if it differs by more
// than projection_tol (relative).
DissipationResult SimulateDissipation(const BlockPhdae &b, const InputSignal &u,
                                      const Vector &x0, double dt, double T,
                                      double projection_tol = 1e-6);

}  // namespace phmor

#endif  // PHMOR_ANALYSIS_HPP

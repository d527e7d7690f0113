// Copyright The phmor Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef PHMOR_BENCHMARKS_HPP
#define PHMOR_BENCHMARKS_HPP

#include <array>
#include <cstdint>
#include <Eigen/SparseCore>
#include "phmor/decoupling.hpp"

namespace phmor
{

using SparseMatrix = Eigen::SparseMatrix<double>;

//
// Incompressible flow on the unit square, MAC grid with M x M cells:
//
//   v' = (A + Lt) v - D^T p + F u,   0 = D v,   y = F^T v,
//
// with A the skew part of the convection operator and Lt the viscous Laplacian plus the
// symmetric part of the convection operator. Stokes is the case a = 0.
//
struct FlowConfig
{
  int M = 5;
  double nu = 1.0;
  std::array<double, 2> a = {0.0, 0.0};
  std::uint64_t seed = 0;
  Index m = 1;
  Matrix F;  // n_v x m; drawn from normal(0, 10^2) when empty

  Index VelocityCount() const { return 2 * Index(M) * (M - 1); }
  Index PressureCount() const { return Index(M) * M - 1; }
  Index StateCount() const { return VelocityCount() + PressureCount(); }
  void Check() const;
};

struct FlowOperators
{
  SparseMatrix laplacian;   // n_v x n_v, symmetric negative definite
  SparseMatrix convection;  // n_v x n_v, -(a . grad) discretized
  SparseMatrix divergence;  // D = -div_h, n_p x n_v
};

FlowOperators AssembleFlowOperators(const FlowConfig &cfg);

PhdaeSystem BuildOseen(const FlowConfig &cfg);
PhdaeSystem BuildStokes(const FlowConfig &cfg);

// Ahat = [D 0] for a flow system.
HiddenConstraints FlowHiddenConstraints(const PhdaeSystem &sys);

struct FlowDecoupling
{
  Index n_v = 0, n_p = 0;
  Decoupled dec;   // block order: (divergence-free velocity | range velocity, pressure)
  StateSpace ode;  // x' = A22 x + B2 u, y = B2^T x
};

// Structure-exploiting decoupling via an SVD of D^T. Applies to systems from BuildStokes
// and BuildOseen.
FlowDecoupling FlowDecouple(const PhdaeSystem &sys);

//
// Damped mass-spring chain with a rigid bar between the first and last mass.
//
struct MsdConfig
{
  Index g = 10;
  Vector mass;   // g
  Vector k, d;   // g - 1 couplings
  Vector kappa, delta;  // g ground springs and dampers

  static MsdConfig Defaults(Index g);
  void Check() const;
  Index StateCount() const { return 2 * g + 1; }
};

struct SparsePhdae
{
  SparseMatrix E, J, R, Q;
  Matrix B;

  Index n() const { return E.rows(); }
  PhdaeSystem ToDense() const;
};

// Stiffness and damping stencils (negative definite tridiagonal).
SparseMatrix MsdStiffness(const MsdConfig &cfg);
SparseMatrix MsdDamping(const MsdConfig &cfg);

// Orthogonal V = [V1 V2] with G V = [Z 0], as a sparse Householder reflector.
SparseMatrix MsdConstraintBasis(Index g);

// State (p, v, lambda), n = 2g + 1.
SparsePhdae BuildMsdSparse(const MsdConfig &cfg);
PhdaeSystem BuildMsd(const MsdConfig &cfg);

// Underlying ODE on (p, v2), dimension 2g - 1, assembled sparsely.
SparsePhdae MsdUnderlyingOdeSparse(const MsdConfig &cfg);

// Ahat = [0 G 0].
HiddenConstraints MsdHiddenConstraints(Index g);

struct MsdDecoupling
{
  Decoupled dec;
  StateSpace ode;
};

// Index reduction with the hidden constraint followed by index-one decoupling.
MsdDecoupling MsdDecouple(const PhdaeSystem &sys);

struct MsdMinimalExtension
{
  StateSpace extended;  // n = 2g + 2, descriptor form; not port-Hamiltonian
  PhdaeSystem phode;    // dimension 2(g - 1)
};

MsdMinimalExtension BuildMsdMinimalExtension(const MsdConfig &cfg);

}  // namespace phmor

#endif  // PHMOR_BENCHMARKS_HPP

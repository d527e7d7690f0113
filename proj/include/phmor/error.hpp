// Copyright The phmor Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef PHMOR_ERROR_HPP
#define PHMOR_ERROR_HPP

#include <stdexcept>
#include <string>

namespace phmor
{

enum class ErrorKind
{
  DimensionMismatch,
  NonFinite,
  NearSingular,
  Indefinite,
  IndexTooHigh,
  RankAmbiguous,
  NotStable,
  NotApplicable,
  Unbounded,
  PoleHit,
  ContractViolation,
  MalformedConstraints,
  PecletViolation,
  FactorizationFailure,
  InconsistentState,
  Config,
  Io
};

const char *to_string(ErrorKind kind);

// All library failures are reported through this exception; kind() classifies the cause.
class Error : public std::runtime_error
{
public:
  Error(ErrorKind kind, const std::string &message);
  ErrorKind kind() const { return kind_; }

private:
  ErrorKind kind_;
};

}  // namespace phmor

#endif  // PHMOR_ERROR_HPP

// Copyright The phmor Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "phmor/error.hpp"

namespace phmor
{

const char *to_string(ErrorKind kind)
{
  switch (kind)
  {
    case ErrorKind::DimensionMismatch:
      return "DimensionMismatch";
    case ErrorKind::NonFinite:
      return "NonFinite";
    case ErrorKind::NearSingular:
      return "NearSingular";
    case ErrorKind::Indefinite:
      return "Indefinite";
    case ErrorKind::IndexTooHigh:
      return "IndexTooHigh";
    case ErrorKind::RankAmbiguous:
      return "RankAmbiguous";
    case ErrorKind::NotStable:
      return "NotStable";
    case ErrorKind::NotApplicable:
      return "NotApplicable";
    case ErrorKind::Unbounded:
      return "Unbounded";
    case ErrorKind::PoleHit:
      return "PoleHit";
    case ErrorKind::ContractViolation:
      return "ContractViolation";
    case ErrorKind::MalformedConstraints:
      return "MalformedConstraints";
    case ErrorKind::PecletViolation:
      return "PecletViolation";
    case ErrorKind::FactorizationFailure:
      return "FactorizationFailure";
    case ErrorKind::InconsistentState:
      return "InconsistentState";
    case ErrorKind::Config:
      return "Config";
    case ErrorKind::Io:
      return "Io";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string &message)
  : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind)
{
}

}  // namespace phmor

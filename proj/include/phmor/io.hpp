// Copyright The phmor Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef PHMOR_IO_HPP
#define PHMOR_IO_HPP

#include <string>
#include "phmor/analysis.hpp"
#include "phmor/system.hpp"

namespace phmor
{

// System document: {"n", "m", "E", "J", "R", "Q", "B", "P", "S", "N"} with each matrix stored
// as a flat row-major array. P, S and N may be omitted on input (zero).
std::string SerializeSystem(const PhdaeSystem &sys);
PhdaeSystem ParseSystem(const std::string &text);

PhdaeSystem ReadSystem(const std::string &path);
void WriteSystem(const std::string &path, const PhdaeSystem &sys);

// omega,norm_G,norm_err,rel_err with %.17g; rows at poles are written as nan.
std::string FormatErrorCurve(const ErrorCurve &curve);

// %.17g, the format used for every number in CSV output.
std::string FormatDouble(double x);

std::string ReadText(const std::string &path);
// Writes to a temporary sibling and renames it over path.
void WriteTextAtomic(const std::string &path, const std::string &text);

}  // namespace phmor

#endif  // PHMOR_IO_HPP

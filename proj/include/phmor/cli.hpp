// Copyright The phmor Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef PHMOR_CLI_HPP
#define PHMOR_CLI_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>
#include "phmor/numerics.hpp"
#include "phmor/reduction.hpp"
#include "phmor/system.hpp"

namespace phmor
{

// Exit codes of the command-line tool.
enum ExitCode : int
{
  kExitOk = 0,
  kExitValidation = 1,
  kExitConfig = 2,
  kExitNumerical = 3
};

// Every field can be set from a config file (--config, TOML/INI keys named like the flags)
// and overridden on the command line.
struct RunConfig
{
  std::string benchmark = "stokes";  // stokes | oseen | msd | msd-me | file
  std::string file;
  int grid = 5;
  Index masses = 10;
  double viscosity = 1.0;
  std::vector<double> convection = {1.0, 1.0};  // oseen only
  std::vector<std::string> methods;             // ecrm, fcrm, mm, mm@<shift>
  std::string order;                            // "16", "2,4,8", "2..20"
  std::vector<std::string> shifts;              // "inf", "0", "1.5", "0+2i"
  std::string sweep = "2..20";                  // figure: orders of the H-infinity table
  double omega_min = 1e-6, omega_max = 1e6;
  Index samples = 400;
  std::uint64_t seed = 0;
  double tol = kDefaultTol;
  std::string out;  // default: $PHMOR_OUT, then the working directory
  double dt = 1e-3, horizon = 1.0;
  std::string input = "step";  // simulate: step | zero
};

// "16" -> {16}; "2,4,8" -> {2, 4, 8}; "a..b" -> a, a+2, ..., b; "a..b:s" with step s.
std::vector<Index> ParseOrders(const std::string &text);
// "inf", a real number, or "re+imi" / "re-imi".
Shift ParseShift(const std::string &text);

struct MethodSpec
{
  Method method = Method::Ecrm;
  Shift shift;  // moment matching only

  std::string Tag() const;  // ecrm, fcrm, mm_s0, mm_sinf, ...
};

// Expands the method list against the shift list (plain "mm" takes every shift).
std::vector<MethodSpec> ExpandMethods(const std::vector<std::string> &methods,
                                      const std::vector<std::string> &shifts);

// Entry point of the phmor tool.
int RunCli(int argc, char **argv);
int RunCli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

}  // namespace phmor

#endif  // PHMOR_CLI_HPP

// Copyright The phmor Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "phmor/cli.hpp"

int main(int argc, char **argv) { return phmor::RunCli(argc, argv); }

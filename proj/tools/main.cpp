// Copyright 2026 The kle Authors
// SPDX-License-Identifier: Apache-2.0

#include "cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return kle::cli::run(argc, argv, std::cout, std::cerr); }

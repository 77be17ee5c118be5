// Copyright 2026 The autoguide Authors
// SPDX-License-Identifier: Apache-2.0
#include <string>
#include <vector>

#include "autoguide/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return autoguide::cli::run(args);
}

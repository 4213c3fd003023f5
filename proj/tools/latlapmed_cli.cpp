// SPDX-License-Identifier: Apache-2.0
#include <latlapmed/cli.hpp>

int main(int argc, char** argv) { return latlapmed::cli::run(argc, argv); }

// SPDX-License-Identifier: Apache-2.0

#include <udmcode/cli.hpp>

int main(int argc, char** argv) { return udm::cli::run_cli(argc, argv); }

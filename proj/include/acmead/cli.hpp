// Copyright 2026 The acmead Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef ACMEAD_CLI_HPP_
#define ACMEAD_CLI_HPP_

#include <iosfwd>
#include <string>
#include <vector>

namespace acmead::cli {

/// Runs one subcommand. Returns 0 on success, otherwise the exit code of the
/// failure category (1 usage, 2 data, 3 model, 4 numeric) after writing a
/// single-line diagnostic to `err`. `in`/`out` back the `-` path.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
        std::ostream& err);

int run(int argc, char** argv);

}  // namespace acmead::cli

#endif  // ACMEAD_CLI_HPP_

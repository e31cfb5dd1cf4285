// Copyright 2026 The acmead Authors
// SPDX-License-Identifier: Apache-2.0

#include "acmead/cli.hpp"

int main(int argc, char** argv) { return acmead::cli::run(argc, argv); }

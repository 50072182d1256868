// Copyright 2026 The bridgematch Authors
// SPDX-License-Identifier: Apache-2.0

#include "bridgematch/cli.hpp"

int main(int argc, char** argv) { return bm::run(argc, argv); }

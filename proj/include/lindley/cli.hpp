#pragma once

#include <string>

#include "lindley/dists.hpp"

namespace lindley::cli {

// Full command-line entry point; returns the process exit code.
// Exit codes: 0 all requested checks passed, 1 a check failed,
// 2 usage/config error, 3 engine error.
int run(int argc, const char* const* argv);

// Parses a single distribution spec from a JSON object (text form).
// Exposed for config tooling and tests.
dists::DistSpec dist_from_json(const std::string& text);

// Canonical JSON echo of a spec (the form the config parser accepts).
std::string dist_to_json(const dists::DistSpec& spec);

}  // namespace lindley::cli

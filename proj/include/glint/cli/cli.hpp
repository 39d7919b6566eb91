// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>

namespace glint::cli {

inline constexpr const char* kOutputSchema = "glint-run/1";

/// Entry point of the `glint` tool. Writes one JSON object to `out` and
/// diagnostics to `err`. Returns 0 on success, 1 on a runtime failure and
/// 2 on a usage or configuration error.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace glint::cli

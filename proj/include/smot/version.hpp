// SPDX-License-Identifier: MIT
#pragma once

namespace smot {

inline constexpr const char* version_string = "0.1.0";

/// Version of the JSON run-config schema accepted by the CLI.
inline constexpr int config_schema_version = 1;

}  // namespace smot

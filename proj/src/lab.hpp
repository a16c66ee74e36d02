#pragma once

#include <cstdint>
#include <string>

namespace dflab::lab {

enum class RunStatus : int {
    ok = 0,
    check_failed = 1,  // a configured tolerance was not met
    usage = 2,         // config schema violation or malformed input
    internal = 3,
};

struct RunResult {
    RunStatus status = RunStatus::ok;
    std::string csv;     // primary artifact, one header row then data rows
    std::string report;  // JSON failure report, "{}" when everything passed
};

// Batch experiment runner.  Commands: verify-energy, exit-stats, levy,
// discrete, coupling, selftest.  The config document is validated against a
// per-command schema; unknown fields are rejected.  `seed_override` < 0
// leaves the config/default seed untouched.  `sweep` activates the optional
// sweep schedule of the config.
RunResult run_command(const std::string& command, const std::string& config_json,
                      long long seed_override = -1, bool sweep = false);

}  // namespace dflab::lab

// Batch experiment runner over the dflab C API.
//
//   dflab <command> [--config file.json] [--seed N] [--out file.csv] [--sweep]
//
// Commands: verify-energy, exit-stats, levy, discrete, coupling, selftest.
// The CSV artifact goes to --out (or the config's "out" field, or stdout);
// the JSON report is printed to stdout.  Exit codes: 0 all checks passed,
// 1 a configured tolerance failed, 2 usage or schema error, 3 internal error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "dflab/dflab.h"

namespace {

// minimal extraction of a top-level string field, enough for {"out": "..."}
std::string json_string_field(const std::string& text, const std::string& key) {
    const std::string needle = "\"" + key + "\"";
    std::size_t pos = text.find(needle);
    if (pos == std::string::npos) return {};
    pos = text.find(':', pos + needle.size());
    if (pos == std::string::npos) return {};
    pos = text.find('"', pos);
    if (pos == std::string::npos) return {};
    const std::size_t end = text.find('"', pos + 1);
    if (end == std::string::npos) return {};
    return text.substr(pos + 1, end - pos - 1);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dflab - scale functions, time change, spectral forms and exit statistics"};
    std::string command, config_path, out_path;
    long long seed = -1;
    bool sweep = false;
    app.add_option("command", command,
                   "verify-energy | exit-stats | levy | discrete | coupling | selftest")
        ->required();
    app.add_option("--config", config_path, "JSON experiment configuration");
    app.add_option("--seed", seed, "override the config seed");
    app.add_option("--out", out_path, "CSV output path (default: config 'out' or stdout)");
    app.add_flag("--sweep", sweep, "run the sweep schedule of the config");
    CLI11_PARSE(app, argc, argv);

    std::string config;
    if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) {
            std::cerr << "error: cannot open config file " << config_path << "\n";
            return 2;
        }
        std::ostringstream buf;
        buf << in.rdbuf();
        config = buf.str();
    }

    char* csv = nullptr;
    char* report = nullptr;
    int run_status = 3;
    const dflab_status st = dflab_run_command(command.c_str(), config.c_str(), seed,
                                              sweep ? 1 : 0, &csv, &report, &run_status);
    if (st != DFLAB_OK) {
        std::cerr << "error: " << dflab_last_error() << "\n";
        return 3;
    }

    if (out_path.empty()) out_path = json_string_field(config, "out");
    if (!out_path.empty()) {
        std::ofstream out(out_path, std::ios::binary);
        if (!out) {
            std::cerr << "error: cannot write " << out_path << "\n";
            dflab_string_free(csv);
            dflab_string_free(report);
            return 2;
        }
        out << csv;
    } else {
        std::fputs(csv, stdout);
    }
    if (report && report[0]) std::puts(report);

    dflab_string_free(csv);
    dflab_string_free(report);
    return run_status;
}

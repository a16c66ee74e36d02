// Drives the installed CLI binary: determinism of the CSV artifact, exit
// codes for schema violations and failed checks.
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

#ifndef DFLAB_CLI_PATH
#define DFLAB_CLI_PATH "dflab"
#endif

namespace {

int run(const std::string& args) {
    const std::string cmd = std::string(DFLAB_CLI_PATH) + " " + args;
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

}  // namespace

TEST_CASE("selftest twice with the same seed produces byte-identical output") {
    write("/tmp/dflab_selftest.json", R"({"n_paths": 1200, "threads": 2})");
    const int rc1 = run("selftest --config /tmp/dflab_selftest.json --seed 20240817 "
                        "--out /tmp/dflab_st1.csv > /tmp/dflab_st1.log");
    const int rc2 = run("selftest --config /tmp/dflab_selftest.json --seed 20240817 "
                        "--out /tmp/dflab_st2.csv > /tmp/dflab_st2.log");
    CHECK(rc1 == 0);
    CHECK(rc2 == 0);
    const std::string a = slurp("/tmp/dflab_st1.csv");
    const std::string b = slurp("/tmp/dflab_st2.csv");
    REQUIRE(!a.empty());
    CHECK(a == b);
    CHECK(slurp("/tmp/dflab_st1.log") == slurp("/tmp/dflab_st2.log"));
}

TEST_CASE("schema violations exit with the usage code") {
    write("/tmp/dflab_bad.json", R"({"family":"fat_cantor","not_a_field":1})");
    CHECK(run("verify-energy --config /tmp/dflab_bad.json --out /tmp/dflab_bad.csv "
              "> /dev/null 2>&1") == 2);
    CHECK(run("no-such-command > /dev/null 2>&1") == 2);
    CHECK(run("> /dev/null 2>&1") != 0);  // missing command is a CLI error
}

TEST_CASE("the affine counterexample reports a failed check") {
    write("/tmp/dflab_affine.json", R"({"family":"affine","c":0.5})");
    const int rc = run("verify-energy --config /tmp/dflab_affine.json "
                       "--out /tmp/dflab_affine.csv > /tmp/dflab_affine.log");
    CHECK(rc == 1);
    const std::string log = slurp("/tmp/dflab_affine.log");
    CHECK(log.find("energy_ratio_es_over_d\":2.0") != std::string::npos);
}

TEST_CASE("verify-energy emits the sweep table") {
    write("/tmp/dflab_ve.json", R"({"family":"fat_cantor","lambda":0.5,"depth":8})");
    const int rc = run("verify-energy --config /tmp/dflab_ve.json --out /tmp/dflab_ve.csv "
                       "> /dev/null");
    CHECK(rc == 0);
    const std::string csv = slurp("/tmp/dflab_ve.csv");
    CHECK(csv.rfind("family,depth,grid_n,e_s,d,residual\n", 0) == 0);
    CHECK(csv.find("fat_cantor,8,") != std::string::npos);
}

TEST_CASE("sweep schedules run when requested") {
    write("/tmp/dflab_sw.json",
          R"({"family":"fat_cantor","lambda":0.5,"depth":8,
              "sweep":[{"depth":4},{"depth":6},{"depth":8}]})");
    const int rc = run("verify-energy --config /tmp/dflab_sw.json --sweep "
                       "--out /tmp/dflab_sw.csv > /dev/null");
    CHECK(rc == 0);
    const std::string csv = slurp("/tmp/dflab_sw.csv");
    CHECK(csv.find("fat_cantor,4,") != std::string::npos);
    CHECK(csv.find("fat_cantor,6,") != std::string::npos);
    CHECK(csv.find("fat_cantor,8,") != std::string::npos);
}

TEST_CASE("exit-stats output is byte-identical for identical config and seed") {
    write("/tmp/dflab_exd.json",
          R"({"scale": {"family":"fat_cantor","parameters":{"lambda":0.5},"depth":6,"anchor":0},
              "a":0.0,"b":1.0,"x0":[0.4],"dt":1e-3,"n_paths":600,"chain_n":400,
              "time_tolerance":10.0})");
    const int r1 = run("exit-stats --config /tmp/dflab_exd.json --seed 3 "
                       "--out /tmp/dflab_exd1.csv > /dev/null");
    const int r2 = run("exit-stats --config /tmp/dflab_exd.json --seed 3 "
                       "--out /tmp/dflab_exd2.csv > /dev/null");
    CHECK(r1 == 0);
    CHECK(r2 == 0);
    const std::string a = slurp("/tmp/dflab_exd1.csv");
    REQUIRE(!a.empty());
    CHECK(a == slurp("/tmp/dflab_exd2.csv"));
}

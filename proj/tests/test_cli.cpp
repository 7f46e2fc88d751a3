#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

namespace fs = std::filesystem;

namespace {

struct Sandbox
{
    fs::path path;
    Sandbox()
    {
        path = fs::temp_directory_path() / ("calciner_cli_" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~Sandbox() { fs::remove_all(path); }
};

/// Runs the CLI with `args`, discarding its output, and returns the exit status.
int cli(const std::string& args, const fs::path& log)
{
    const std::string cmd = std::string("\"") + CALCINER_CLI + "\" " + args + " > \"" + log.string() + "\" 2>&1";
    const int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    REQUIRE(WIFEXITED(status));
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool has_bundle(const fs::path& dir)
{
    for (const char* f : {"timeseries.csv", "profiles.csv", "summary.csv", "diagnostics.log"}) {
        if (!fs::is_regular_file(dir / f)) {
            return false;
        }
    }
    return true;
}

std::size_t count_lines(const fs::path& p)
{
    std::ifstream in(p);
    std::size_t n = 0;
    for (std::string l; std::getline(in, l);) {
        ++n;
    }
    return n;
}

} // namespace

TEST_CASE("successful run writes all four files")
{
    const Sandbox box;
    const fs::path out = box.path / "base";
    CHECK(cli("run base_case --t-end 20 --out \"" + out.string() + "\"", box.path / "log") == 0);
    CHECK(has_bundle(out));
    CHECK(slurp(out / "summary.csv").rfind("key,value,unit\n", 0) == 0);
    CHECK(slurp(box.path / "log").find("base_case: conversion") != std::string::npos);
    // five segments at t = 0, 10, 20
    CHECK(count_lines(out / "timeseries.csv") == 1 + 3 * 5);
}

TEST_CASE("grid and value overrides reach the model")
{
    const Sandbox box;
    const fs::path out = box.path / "fine";
    CHECK(cli("run base_case --t-end 10 --nv 8 --set output.cadence=5 --quiet --out \"" + out.string() + "\"",
              box.path / "log") == 0);
    CHECK(count_lines(out / "profiles.csv") == 1 + 8 + 1);
    CHECK(count_lines(out / "timeseries.csv") == 1 + 3 * 8);
    CHECK(slurp(box.path / "log").empty());
}

TEST_CASE("a scenario file on disk")
{
    const Sandbox box;
    std::ofstream(box.path / "cool.json")
        << R"({"extends": "base_case", "name": "cool", "boundary": {"streams": {"kiln_gas": {"temperature": 1000}}}})";
    const fs::path out = box.path / "cool_out";
    CHECK(cli("run \"" + (box.path / "cool.json").string() + "\" --t-end 10 --quiet --out \"" + out.string() + "\"",
              box.path / "log") == 0);
    CHECK(slurp(out / "diagnostics.log").rfind("scenario cool\n", 0) == 0);
}

TEST_CASE("validation failures exit with 2")
{
    const Sandbox box;
    const fs::path log = box.path / "log";
    CHECK(cli("run no_such_scenario --out \"" + (box.path / "x").string() + "\"", log) == 2);
    CHECK(cli("run base_case --set geometry.n_v=0 --out \"" + (box.path / "x").string() + "\"", log) == 2);
    CHECK(slurp(log).find("scenario.geometry.n_v") != std::string::npos);
    CHECK(cli("run base_case --set geometry.diameter=3 --out \"" + (box.path / "x").string() + "\"", log) == 2);
    CHECK(slurp(log).find("unknown key") != std::string::npos);
    CHECK(cli("run base_case --mode transient", log) == 2);
    CHECK(cli("run base_case --t-end -4", log) == 2);
    CHECK(cli("run base_case --nv 0", log) == 2);
    CHECK(cli("frobnicate", log) == 2);
    CHECK(cli("run base_case base_case", log) == 2);
    CHECK(!fs::exists(box.path / "x"));

    std::ofstream(box.path / "blocker") << "not a directory";
    CHECK(cli("run base_case --t-end 1 --quiet --out \"" + (box.path / "blocker" / "sub").string() + "\"", log) == 2);
}

TEST_CASE("solver failures exit with 3")
{
    const Sandbox box;
    const fs::path out = box.path / "fail";
    CHECK(cli("run base_case --t-end 20 --set solver.dt_init=100 --set solver.dt_min=100 --set solver.dt_max=100 "
              "--set solver.newton_max_iter=1 --out \"" +
                  out.string() + "\"",
              box.path / "log") == 3);
    CHECK(slurp(box.path / "log").find("solver failure") != std::string::npos);
    CHECK(slurp(out / "diagnostics.log").find("Newton") != std::string::npos);

    CHECK(cli("run base_case --mode steady --t-end 5 --quiet --out \"" + (box.path / "short").string() + "\"",
              box.path / "log") == 3);
    CHECK(slurp(box.path / "log").find("steady state not reached") != std::string::npos);
}

TEST_CASE("sweeps write each run to its own directory")
{
    const Sandbox box;
    const fs::path root = box.path / "sweep";
    CHECK(cli("run base_case --sweep --t-end 10 --vary geometry.n_v=3,4 --vary calibration.r1=100,200 --jobs 2 --out \"" +
                  root.string() + "\"",
              box.path / "log") == 0);
    const std::string labels[] = {"base_case__geometry.n_v=3__calibration.r1=100",
                                  "base_case__geometry.n_v=3__calibration.r1=200",
                                  "base_case__geometry.n_v=4__calibration.r1=100",
                                  "base_case__geometry.n_v=4__calibration.r1=200"};
    std::size_t dirs = 0;
    for (const auto& e : fs::directory_iterator(root)) {
        dirs += e.is_directory();
    }
    CHECK(dirs == 4);
    for (const std::string& l : labels) {
        CAPTURE(l);
        CHECK(has_bundle(root / l));
    }
    CHECK(count_lines(root / labels[0] / "profiles.csv") == 1 + 3 + 1);
    CHECK(count_lines(root / labels[3] / "profiles.csv") == 1 + 4 + 1);
    CHECK(slurp(root / labels[0] / "diagnostics.log").find("r1=100") != std::string::npos);
    CHECK(slurp(root / labels[1] / "diagnostics.log").find("r1=200") != std::string::npos);
    CHECK(slurp(root / labels[0] / "summary.csv") != slurp(root / labels[1] / "summary.csv"));

    // a sweep member that fails does not stop the others; the worst code wins
    const fs::path mixed = box.path / "mixed";
    CHECK(cli("run base_case --sweep --t-end 10 --vary geometry.n_v=3,0 --out \"" + mixed.string() + "\"",
              box.path / "log") == 2);
    CHECK(has_bundle(mixed / "base_case__geometry.n_v=3"));

    CHECK(cli("run base_case base_case --sweep --out \"" + (box.path / "dup").string() + "\"", box.path / "log") == 2);
    CHECK(slurp(box.path / "log").find("share an output directory") != std::string::npos);
}

TEST_CASE("preset listing")
{
    const Sandbox box;
    CHECK(cli("presets", box.path / "log") == 0);
    CHECK(slurp(box.path / "log").find("base_case") != std::string::npos);
    CHECK(cli("--help", box.path / "log") == 0);
}

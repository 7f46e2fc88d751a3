#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "calciner/error.h"
#include "calciner/report.h"
#include "calciner/scenario.h"

using namespace calciner;
namespace fs = std::filesystem;

namespace {

ScenarioSpec short_run(double t_end, std::vector<std::string> extra = {})
{
    extra.push_back("run.t_end=" + std::to_string(t_end));
    return load_scenario("base_case", extra);
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> split(const std::string& line)
{
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        out.push_back(cell);
    }
    return out;
}

std::vector<std::string> lines(const std::string& text)
{
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string l;
    while (std::getline(ss, l)) {
        out.push_back(l);
    }
    return out;
}

std::map<std::string, double> summary_values(const std::string& text)
{
    std::map<std::string, double> m;
    const auto ls = lines(text);
    for (std::size_t i = 1; i < ls.size(); ++i) {
        const auto cells = split(ls[i]);
        REQUIRE(cells.size() == 3);
        m[cells[0]] = std::stod(cells[1]);
    }
    return m;
}

struct TempDir
{
    fs::path path;
    explicit TempDir(const std::string& tag)
    {
        path = fs::temp_directory_path() / ("calciner_report_" + tag + "_" + std::to_string(::getpid()));
        fs::remove_all(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

} // namespace

TEST_CASE("number formatting round-trips")
{
    for (double v : {0.0, 1.0, -2.5, 0.1, 1e-300, 6.02214076e23, 887.5, 1.0 / 3.0}) {
        const std::string s = format_number(v);
        double back = 0.0;
        std::from_chars(s.data(), s.data() + s.size(), back);
        CHECK(back == v);
    }
    CHECK(format_number(std::numeric_limits<double>::quiet_NaN()) == "nan");
    CHECK(format_number(std::numeric_limits<double>::infinity()) == "inf");
    CHECK(format_number(-std::numeric_limits<double>::infinity()) == "-inf");
}

TEST_CASE("report bundle layout and units")
{
    const TempDir dir("layout");
    const Simulation sim(short_run(30.0));
    const RunResult r = sim.run(RunMode::Dynamic);
    write_report_bundle(dir.path, sim, r);
    for (const char* f : {"timeseries.csv", "profiles.csv", "summary.csv", "diagnostics.log"}) {
        CHECK(fs::is_regular_file(dir.path / f));
    }

    const auto ts = lines(slurp(dir.path / "timeseries.csv"));
    const auto ts_head = split(ts.at(0));
    CHECK(ts.at(0).rfind("time[s],segment,y_mid[m],T_c[K],T_r[K],T_w[K],P[Pa],v_top[m/s]", 0) == 0);
    CHECK(ts_head.size() == 11 + kNumSpecies);
    for (const std::string& col : ts_head) {
        if (col != "segment") {
            CHECK_MESSAGE(col.find('[') != std::string::npos, col);
        }
    }
    const std::size_t snapshots = r.simulation.trajectory.times.size();
    CHECK(snapshots == 4); // t = 0, 10, 20, 30
    CHECK(ts.size() == 1 + snapshots * sim.model().segments());
    for (std::size_t i = 1; i < ts.size(); ++i) {
        CHECK(split(ts[i]).size() == ts_head.size());
    }

    const auto pr = lines(slurp(dir.path / "profiles.csv"));
    const auto pr_head = split(pr.at(0));
    CHECK(pr_head.front() == "y[m]");
    CHECK(pr_head.back() == "gas[kg/s]");
    CHECK(pr_head.size() == 3 + kNumSpecies + 2);
    CHECK(pr.size() == 1 + sim.model().segments() + 1);
    CHECK(split(pr.at(1)).at(0) == "0");
    CHECK(split(pr.back()).at(0) == "33");

    const auto sm = lines(slurp(dir.path / "summary.csv"));
    CHECK(sm.at(0) == "key,value,unit");
    for (std::size_t i = 1; i < sm.size(); ++i) {
        CHECK(split(sm[i]).size() == 3);
    }
    const std::string log = slurp(dir.path / "diagnostics.log");
    CHECK(log.find("scenario base_case") != std::string::npos);
    CHECK(log.find("element balance") != std::string::npos);
}

TEST_CASE("profile mass flows match the inlet streams at the bottom")
{
    const Simulation sim(short_run(10.0));
    const RunResult r = sim.run(RunMode::Dynamic);
    std::stringstream ss;
    write_profiles(ss, sim.model(), r.simulation.final_state);
    const auto pr = lines(ss.str());
    const auto head = split(pr.at(0));
    const auto inlet = split(pr.at(1));
    double expected_solids = 0.0;
    double expected_gas = 0.0;
    for (const Stream& s : sim.spec().boundary.inlets) {
        for (std::size_t i = 0; i < kNumSpecies; ++i) {
            (i < kNumSolids ? expected_solids : expected_gas) += s.mass_flow[i];
        }
    }
    CHECK(std::stod(inlet[head.size() - 2]) == doctest::Approx(expected_solids).epsilon(1e-12));
    CHECK(std::stod(inlet[head.size() - 1]) == doctest::Approx(expected_gas).epsilon(1e-12));
    CHECK(std::stod(inlet[3]) == doctest::Approx(67.7).epsilon(1e-12)); // CaCO3
}

TEST_CASE("summary figures follow from the outlet stream")
{
    const Simulation sim(short_run(120.0));
    const RunResult r = sim.run(RunMode::Dynamic);
    const Summary& s = r.summary;
    const ModelDiagnostics d = sim.model().diagnostics(r.simulation.final_state);
    const FaceDiagnostics& top = d.faces.back();

    const double f_in = 67.7 / sim.spec().table->species()[idx(SpeciesId::CaCO3)].molar_mass;
    CHECK(s.conversion == doctest::Approx(100.0 * (1.0 - top.molar[idx(SpeciesId::CaCO3)] / f_in)).epsilon(1e-12));
    CHECK(s.conversion >= 0.0);
    CHECK(s.conversion <= 100.0);

    double wet = 0.0;
    double dry = 0.0;
    for (std::size_t i = kFirstGas; i < kNumSpecies; ++i) {
        wet += s.wet_fractions[i];
        dry += s.dry_fractions[i];
        CHECK(s.wet_fractions[i] >= 0.0);
    }
    CHECK(std::abs(wet - 100.0) <= 1e-7);
    CHECK(std::abs(dry - 100.0) <= 1e-7);
    CHECK(s.dry_fractions[idx(SpeciesId::H2O)] == 0.0);
    for (std::size_t i = 0; i < kNumSolids; ++i) {
        CHECK(s.wet_fractions[i] == 0.0);
    }
    CHECK(s.outlet_temperature == r.simulation.final_state[(sim.model().segments() - 1) * layout::kBlock + layout::kTc]);
    CHECK(s.final_time == 120.0);

    std::stringstream ss;
    write_summary(ss, s);
    const auto values = summary_values(ss.str());
    CHECK(values.at("conversion_CaCO3") == s.conversion);
    CHECK(values.at("outlet_temperature") == doctest::Approx(s.outlet_temperature - 273.15));
    CHECK(values.at("x_wet_CO2") == s.wet_fractions[idx(SpeciesId::CO2)]);
    CHECK(values.count("x_dry_H2O") == 0);
}

TEST_CASE("identical runs give byte-identical CSV files for any worker count")
{
    const TempDir a("a");
    const TempDir b("b");
    const TempDir c("c");
    std::vector<fs::path> dirs = {a.path, b.path, c.path};
    const int workers[] = {1, 1, 3};
    for (std::size_t i = 0; i < 3; ++i) {
        const Simulation sim(short_run(200.0, {"solver.workers=" + std::to_string(workers[i])}));
        write_report_bundle(dirs[i], sim, sim.run(RunMode::Dynamic));
    }
    for (const char* f : {"timeseries.csv", "profiles.csv", "summary.csv"}) {
        const std::string first = slurp(a.path / f);
        CHECK(!first.empty());
        CHECK_MESSAGE(first == slurp(b.path / f), f);
        CHECK_MESSAGE(first == slurp(c.path / f), f);
    }
}

TEST_CASE("without fuel the calciner does not calcine")
{
    const Simulation base(short_run(1200.0));
    const Simulation cold(short_run(1200.0, {"boundary.streams.fuel.mass_flow.C=0"}));
    const double x_base = base.run(RunMode::Dynamic).summary.conversion;
    const double x_cold = cold.run(RunMode::Dynamic).summary.conversion;
    MESSAGE("conversion with fuel " << x_base << " %, without fuel " << x_cold << " %");
    CHECK(x_cold < 0.5 * x_base);
}

TEST_CASE("report directory errors are validation errors")
{
    const TempDir dir("blocked");
    fs::create_directories(dir.path);
    std::ofstream(dir.path / "file") << "x";
    const Simulation sim(short_run(1.0));
    const RunResult r = sim.run(RunMode::Dynamic);
    CHECK_THROWS_AS(write_report_bundle(dir.path / "file" / "sub", sim, r), ValidationError);
}

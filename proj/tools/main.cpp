#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "calciner/error.h"
#include "calciner/report.h"
#include "calciner/scenario.h"

namespace fs = std::filesystem;
using namespace calciner;

namespace {

constexpr int kOk = 0;
constexpr int kValidationFailure = 2;
constexpr int kSolverFailure = 3;

struct Job
{
    std::string source;
    std::vector<std::string> overrides;
    fs::path out;
    std::string label;
};

struct RunOptions
{
    std::string mode;
    double t_end = -1.0;
    long nv = 0;
    int workers = 0;
    bool quiet = false;
};

std::vector<std::string> effective_overrides(const Job& job, const RunOptions& opt)
{
    std::vector<std::string> o = job.overrides;
    if (opt.nv > 0) {
        o.push_back("geometry.n_v=" + std::to_string(opt.nv));
    }
    if (opt.workers > 0) {
        o.push_back("solver.workers=" + std::to_string(opt.workers));
    }
    return o;
}

void write_failure_log(const fs::path& dir, const std::string& label, const std::string& kind, const std::string& what)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    std::ofstream log(dir / "diagnostics.log", std::ios::binary);
    if (log) {
        log << "scenario " << label << '\n' << kind << ": " << what << '\n';
    }
}

int run_job(const Job& job, const RunOptions& opt, std::ostream& err, std::mutex& err_mutex)
{
    auto report = [&](const std::string& text) {
        std::lock_guard lock(err_mutex);
        err << job.label << ": " << text << '\n';
    };
    std::optional<Simulation> sim;
    RunMode mode = RunMode::Dynamic;
    try {
        ScenarioSpec spec = load_scenario(job.source, effective_overrides(job, opt));
        mode = opt.mode.empty() ? spec.run.mode : parse_run_mode(opt.mode);
        if (opt.t_end > 0.0) {
            (mode == RunMode::Dynamic ? spec.run.t_end : spec.run.steady_t_max) = opt.t_end;
        }
        sim.emplace(std::move(spec));
    } catch (const ValidationError& e) {
        report(std::string("invalid scenario: ") + e.what());
        return kValidationFailure;
    } catch (const nlohmann::json::exception& e) {
        report(std::string("invalid scenario: ") + e.what());
        return kValidationFailure;
    } catch (const Error& e) {
        report(std::string("invalid scenario: ") + e.what());
        return kValidationFailure;
    }

    RunResult result;
    try {
        result = sim->run(mode, opt.quiet ? nullptr : &std::cout);
    } catch (const Error& e) {
        report(std::string("solver failure: ") + e.what());
        write_failure_log(job.out, sim->spec().name, "solver failure", e.what());
        return kSolverFailure;
    }
    try {
        write_report_bundle(job.out, *sim, result);
    } catch (const Error& e) {
        report(e.what());
        return kValidationFailure;
    }
    if (!opt.quiet) {
        std::lock_guard lock(err_mutex);
        const Summary& s = result.summary;
        std::cout << job.label << ": conversion " << format_number(std::round(s.conversion * 100.0) / 100.0)
                  << " %, outlet " << format_number(std::round((s.outlet_temperature - 273.15) * 10.0) / 10.0)
                  << " C, " << (s.steady ? "steady at " + format_number(s.t_settle) + " s" : "not steady")
                  << ", results in " << job.out.string() << '\n';
    }
    if (mode == RunMode::Steady && !result.simulation.steady) {
        report("steady state not reached within " + format_number(result.t_end) + " s");
        return kSolverFailure;
    }
    return kOk;
}

std::string sanitize(std::string text)
{
    for (char& c : text) {
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '_' || c == '=')) {
            c = '_';
        }
    }
    return text;
}

/// Expand "key=v1,v2,..." axes into the cartesian product of assignments.
std::vector<std::vector<std::string>> expand_axes(const std::vector<std::string>& axes)
{
    std::vector<std::vector<std::string>> combos{{}};
    for (const std::string& axis : axes) {
        const auto eq = axis.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw ValidationError("--vary " + axis + ": expected key=value[,value...]");
        }
        const std::string key = axis.substr(0, eq);
        std::vector<std::string> values;
        std::stringstream ss(axis.substr(eq + 1));
        for (std::string v; std::getline(ss, v, ',');) {
            values.push_back(v);
        }
        if (values.empty()) {
            throw ValidationError("--vary " + axis + ": no values");
        }
        std::vector<std::vector<std::string>> next;
        for (const auto& c : combos) {
            for (const std::string& v : values) {
                auto e = c;
                e.push_back(key + "=" + v);
                next.push_back(std::move(e));
            }
        }
        combos = std::move(next);
    }
    return combos;
}

std::string scenario_label(const std::string& source)
{
    const fs::path p(source);
    return p.has_extension() || p.has_parent_path() ? p.stem().string() : source;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"One-dimensional dynamic cement calciner simulator"};
    app.require_subcommand(1);

    std::vector<std::string> sources;
    std::vector<std::string> overrides;
    std::vector<std::string> axes;
    std::string out_dir;
    RunOptions opt;
    bool sweep = false;
    unsigned jobs = 0;

    CLI::App* run = app.add_subcommand("run", "Run a scenario file or bundled preset");
    run->add_option("scenario", sources, "Scenario JSON file or preset name (several with --sweep)")->required();
    run->add_option("--mode", opt.mode, "dynamic or steady (default: the scenario's run.mode)")
        ->check(CLI::IsMember({"dynamic", "steady"}));
    run->add_option("--t-end", opt.t_end, "Simulated horizon in seconds")->check(CLI::PositiveNumber);
    run->add_option("--nv", opt.nv, "Number of finite volumes")->check(CLI::PositiveNumber);
    run->add_option("--out", out_dir, "Output directory (default: the scenario's output.directory)");
    run->add_option("--set", overrides, "Override a scenario value, e.g. --set calibration.r1=300")
        ->allow_extra_args(false);
    run->add_option("--workers", opt.workers, "Threads for Jacobian evaluation")->check(CLI::PositiveNumber);
    run->add_flag("--quiet", opt.quiet, "Only report errors");
    run->add_flag("--sweep", sweep, "Run several independent scenarios, each in its own output subdirectory");
    run->add_option("--vary", axes, "With --sweep: key=v1,v2,... adds one run per value (cartesian product)")
        ->allow_extra_args(false);
    run->add_option("--jobs", jobs, "With --sweep: scenarios run concurrently (default: hardware threads)");

    CLI::App* presets = app.add_subcommand("presets", "List bundled scenario presets");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kValidationFailure;
    }

    if (presets->parsed()) {
        for (const std::string& name : bundled_presets()) {
            std::cout << name << '\n';
        }
        return kOk;
    }

    std::vector<Job> work;
    try {
        if (!sweep && (sources.size() != 1 || !axes.empty())) {
            throw ValidationError("several scenarios or --vary require --sweep");
        }
        const auto combos = expand_axes(axes);
        for (const std::string& source : sources) {
            std::string root = out_dir;
            if (root.empty()) {
                root = load_scenario(source, overrides).output.directory;
            }
            for (const auto& combo : combos) {
                Job job;
                job.source = source;
                job.overrides = overrides;
                job.overrides.insert(job.overrides.end(), combo.begin(), combo.end());
                job.label = scenario_label(source);
                for (const std::string& a : combo) {
                    job.label += "__" + sanitize(a);
                }
                job.out = sweep ? fs::path(root) / job.label : fs::path(root);
                work.push_back(std::move(job));
            }
        }
        if (sweep) {
            std::vector<fs::path> dirs;
            for (const Job& j : work) {
                dirs.push_back(fs::weakly_canonical(j.out));
            }
            std::sort(dirs.begin(), dirs.end());
            if (std::adjacent_find(dirs.begin(), dirs.end()) != dirs.end()) {
                throw ValidationError("sweep members would share an output directory; give scenarios distinct names");
            }
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kValidationFailure;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kValidationFailure;
    }

    std::mutex err_mutex;
    if (work.size() == 1) {
        return run_job(work.front(), opt, std::cerr, err_mutex);
    }

    if (!opt.quiet) {
        opt.quiet = true;
        std::cout << "sweep of " << work.size() << " runs\n";
    }
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const unsigned n_threads = std::min<unsigned>(jobs > 0 ? jobs : hw, static_cast<unsigned>(work.size()));
    std::vector<int> codes(work.size(), kOk);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < work.size(); i = next++) {
            codes[i] = run_job(work[i], opt, std::cerr, err_mutex);
            std::lock_guard lock(err_mutex);
            std::cout << work[i].label << ": exit " << codes[i] << '\n';
        }
    };
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < n_threads; ++i) {
        pool.emplace_back(worker);
    }
    for (std::thread& t : pool) {
        t.join();
    }
    return *std::max_element(codes.begin(), codes.end());
}

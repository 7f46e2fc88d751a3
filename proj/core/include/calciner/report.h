#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "calciner/dae.h"
#include "calciner/model.h"
#include "calciner/scenario.h"

namespace calciner {

/// Shortest round-trip decimal representation; identical input gives
/// identical text on every platform with a conforming std::to_chars.
std::string format_number(double value);

/// Outlet-stream figures of merit at one state.
struct Summary
{
    double conversion = 0.0;          // CaCO3 -> CaO, percent
    double outlet_temperature = 0.0;  // K
    double outlet_velocity = 0.0;     // m/s
    SpeciesVector outlet_molar{};     // mol/s through the top face
    SpeciesVector wet_fractions{};    // gas species only, percent
    SpeciesVector dry_fractions{};    // without H2O, percent
    double carbon_fraction = 0.0;     // solid C molar flow / gas molar flow, percent
    double heat_loss = 0.0;           // W to the environment
    double t_settle = -1.0;           // s
    bool steady = false;
    double final_time = 0.0;
};

Summary summarize(const CalcinerModel& model, std::span<const double> z, const SimulationResult* sim = nullptr);

struct RunResult
{
    RunMode mode = RunMode::Dynamic;
    double t_end = 0.0;
    SimulationResult simulation;
    Summary summary;
};

/// Owns the model built from a scenario and runs it.
class Simulation
{
public:
    explicit Simulation(ScenarioSpec spec);

    const ScenarioSpec& spec() const { return spec_; }
    const CalcinerModel& model() const { return model_; }

    std::vector<double> initial_state() const;
    /// Dynamic: integrate to run.t_end. Steady: integrate until the steady
    /// criterion holds or run.steady_t_max is reached.
    RunResult run(RunMode mode, std::ostream* progress = nullptr) const;

private:
    ScenarioSpec spec_;
    CalcinerModel model_;
};

void write_timeseries(std::ostream& out, const CalcinerModel& model, const Trajectory& trajectory);
void write_profiles(std::ostream& out, const CalcinerModel& model, std::span<const double> z);
void write_summary(std::ostream& out, const Summary& summary);
void write_diagnostics(std::ostream& out, const Simulation& sim, const RunResult& result);

/// Writes timeseries.csv, profiles.csv, summary.csv and diagnostics.log.
void write_report_bundle(const std::filesystem::path& directory, const Simulation& sim, const RunResult& result);

} // namespace calciner

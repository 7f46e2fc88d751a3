#pragma once

#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "calciner/dae.h"
#include "calciner/geometry.h"
#include "calciner/kinetics.h"
#include "calciner/model.h"
#include "calciner/species.h"

namespace calciner {

enum class RunMode { Dynamic, Steady };

RunMode parse_run_mode(std::string_view text);
std::string_view run_mode_name(RunMode mode);

struct RunSpec
{
    RunMode mode = RunMode::Dynamic;
    double t_end = 3600.0;        // s, dynamic runs
    double steady_t_max = 7200.0; // s, give up on steady mode after this
};

struct OutputSpec
{
    double cadence = 10.0; // s between time-series snapshots
    std::string directory = "out";
};

/// A fully validated scenario.
struct ScenarioSpec
{
    std::string name;
    /// Merged scenario document after presets and overrides.
    nlohmann::json document;
    std::shared_ptr<const SpeciesTable> table;
    GeometrySpec geometry;
    BoundarySpec boundary;
    CalibrationFactors calibration = default_calibration();
    ModelOptions options;
    InitialCondition initial;
    SolverConfig solver;
    RunSpec run;
    OutputSpec output;
};

/// Names of the presets shipped with the library.
std::vector<std::string> bundled_presets();
/// Raw JSON text of a bundled preset. Throws ValidationError if unknown.
std::string_view bundled_preset(std::string_view name);

/// Parse "dotted.key=value" and set it in doc. The value is read as JSON
/// when it parses, otherwise as a string.
void apply_override(nlohmann::json& doc, std::string_view assignment);

/// Resolve "extends" chains and overrides into one document. `source` is a
/// file path or the name of a bundled preset.
nlohmann::json load_scenario_document(const std::string& source, std::span<const std::string> overrides = {});

/// Validate a merged document. Relative property paths resolve against base_dir.
ScenarioSpec scenario_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});

ScenarioSpec load_scenario(const std::string& source, std::span<const std::string> overrides = {});

} // namespace calciner

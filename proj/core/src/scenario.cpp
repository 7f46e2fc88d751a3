#include "calciner/scenario.h"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "calciner/error.h"
#include "embedded.h"

namespace calciner {

using nlohmann::json;

namespace {

// Read-only view of one JSON object that remembers which keys were used,
// so leftovers can be reported as unknown.
class Section
{
public:
    Section(const json& obj, std::string path) : obj_(&obj), path_(std::move(path))
    {
        if (!obj.is_object()) {
            throw ValidationError(path_ + ": expected an object");
        }
    }

    ~Section() = default;
    Section(const Section&) = delete;
    Section& operator=(const Section&) = delete;

    const std::string& path() const { return path_; }

    bool has(const std::string& key) const { return obj_->contains(key); }

    const json& raw(const std::string& key)
    {
        auto it = obj_->find(key);
        if (it == obj_->end()) {
            throw ValidationError(where(key) + ": missing key");
        }
        used_.insert(key);
        return *it;
    }

    double number(const std::string& key)
    {
        const json& v = raw(key);
        if (!v.is_number()) {
            throw ValidationError(where(key) + ": expected a number");
        }
        const double d = v.get<double>();
        if (!std::isfinite(d)) {
            throw ValidationError(where(key) + ": expected a finite number");
        }
        return d;
    }

    double number(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

    double positive(const std::string& key, double fallback)
    {
        const double d = number(key, fallback);
        if (!(d > 0.0)) {
            throw ValidationError(where(key) + ": must be positive");
        }
        return d;
    }

    int integer(const std::string& key, int fallback)
    {
        if (!has(key)) {
            return fallback;
        }
        const json& v = raw(key);
        if (!v.is_number_integer()) {
            throw ValidationError(where(key) + ": expected an integer");
        }
        return v.get<int>();
    }

    bool boolean(const std::string& key, bool fallback)
    {
        if (!has(key)) {
            return fallback;
        }
        const json& v = raw(key);
        if (!v.is_boolean()) {
            throw ValidationError(where(key) + ": expected true or false");
        }
        return v.get<bool>();
    }

    std::string string(const std::string& key, const std::string& fallback)
    {
        if (!has(key)) {
            return fallback;
        }
        const json& v = raw(key);
        if (!v.is_string()) {
            throw ValidationError(where(key) + ": expected a string");
        }
        return v.get<std::string>();
    }

    std::string where(const std::string& key) const { return path_ + "." + key; }

    /// Throws on keys that were never read.
    void finish() const
    {
        for (auto it = obj_->begin(); it != obj_->end(); ++it) {
            if (!used_.count(it.key())) {
                throw ValidationError(where(it.key()) + ": unknown key");
            }
        }
    }

private:
    const json* obj_;
    std::string path_;
    std::set<std::string> used_;
};

SpeciesVector species_map(const json& obj, const std::string& path, bool non_negative)
{
    if (!obj.is_object()) {
        throw ValidationError(path + ": expected an object keyed by species");
    }
    SpeciesVector v{};
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        auto s = parse_species(it.key());
        if (!s) {
            throw ValidationError(path + "." + it.key() + ": unknown species");
        }
        if (!it->is_number()) {
            throw ValidationError(path + "." + it.key() + ": expected a number");
        }
        const double d = it->get<double>();
        if (!std::isfinite(d) || (non_negative && d < 0.0)) {
            throw ValidationError(path + "." + it.key() + ": must be a non-negative number");
        }
        v[idx(*s)] = d;
    }
    return v;
}

json parse_text(std::string_view text, const std::string& origin)
{
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(origin + ": " + e.what());
    }
}

json read_json_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ValidationError(path.string() + ": cannot open file");
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_text(ss.str(), path.string());
}

WsggModel parse_wsgg(const json& obj, const std::string& path)
{
    Section s(obj, path);
    const std::string unit = s.string("pressure_unit", "atm");
    if (unit != "atm") {
        throw ValidationError(s.where("pressure_unit") + ": only atm is supported");
    }
    s.string("weights", "");
    WsggModel m;
    const json& sets = s.raw("sets");
    if (!sets.is_array() || sets.empty()) {
        throw ValidationError(s.where("sets") + ": expected a non-empty array");
    }
    for (std::size_t i = 0; i < sets.size(); ++i) {
        Section set(sets[i], s.where("sets") + "[" + std::to_string(i) + "]");
        WsggModel::CoefficientSet cs;
        cs.ratio = set.number("ratio");
        if (!m.sets.empty() && !(cs.ratio > m.sets.back().ratio)) {
            throw ValidationError(set.where("ratio") + ": ratios must increase");
        }
        const json& gases = set.raw("gases");
        if (!gases.is_array()) {
            throw ValidationError(set.where("gases") + ": expected an array");
        }
        for (std::size_t g = 0; g < gases.size(); ++g) {
            Section gs(gases[g], set.where("gases") + "[" + std::to_string(g) + "]");
            WsggModel::GreyGas gas;
            gas.kappa = gs.number("kappa");
            const json& b = gs.raw("b");
            if (!b.is_array() || b.size() != 4) {
                throw ValidationError(gs.where("b") + ": expected four coefficients");
            }
            for (std::size_t j = 0; j < 4; ++j) {
                gas.b[j] = b[j].get<double>();
            }
            if (!(gas.kappa >= 0.0)) {
                throw ValidationError(gs.where("kappa") + ": must be non-negative");
            }
            gs.finish();
            cs.gases.push_back(gas);
        }
        set.finish();
        m.sets.push_back(std::move(cs));
    }
    s.finish();
    return m;
}

} // namespace

RunMode parse_run_mode(std::string_view text)
{
    if (text == "dynamic") {
        return RunMode::Dynamic;
    }
    if (text == "steady") {
        return RunMode::Steady;
    }
    throw ValidationError("run mode must be 'dynamic' or 'steady', got '" + std::string(text) + "'");
}

std::string_view run_mode_name(RunMode mode)
{
    return mode == RunMode::Dynamic ? "dynamic" : "steady";
}

std::vector<std::string> bundled_presets()
{
    std::vector<std::string> out;
    for (const std::string& f : detail::embedded_file_names()) {
        if (f != "properties.json" && f.size() > 5 && f.ends_with(".json")) {
            out.push_back(f.substr(0, f.size() - 5));
        }
    }
    return out;
}

std::string_view bundled_preset(std::string_view name)
{
    if (name == "properties") {
        throw ValidationError("unknown preset 'properties'");
    }
    const std::string_view text = detail::embedded_file(std::string(name) + ".json");
    if (text.empty()) {
        throw ValidationError("unknown preset '" + std::string(name) + "'");
    }
    return text;
}

void apply_override(json& doc, std::string_view assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos || eq == 0) {
        throw ValidationError("override '" + std::string(assignment) + "': expected key=value");
    }
    const std::string key(assignment.substr(0, eq));
    const std::string text(assignment.substr(eq + 1));
    json value;
    try {
        value = json::parse(text);
    } catch (const json::parse_error&) {
        value = text;
    }
    json* node = &doc;
    std::size_t start = 0;
    while (true) {
        const auto dot = key.find('.', start);
        const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (part.empty()) {
            throw ValidationError("override '" + key + "': empty path component");
        }
        if (!node->is_object()) {
            throw ValidationError("override '" + key + "': '" + part + "' is not inside an object");
        }
        if (dot == std::string::npos) {
            (*node)[part] = value;
            return;
        }
        node = &(*node)[part];
        if (node->is_null()) {
            *node = json::object();
        }
        start = dot + 1;
    }
}

namespace {

json resolve_document(const std::string& source, int depth, std::filesystem::path& base_dir)
{
    if (depth > 8) {
        throw ValidationError(source + ": 'extends' chain is too deep");
    }
    json doc;
    const std::filesystem::path path(source);
    std::error_code ec;
    if (std::filesystem::is_regular_file(path, ec)) {
        doc = read_json_file(path);
        base_dir = path.parent_path();
    } else if (!detail::embedded_file(source + ".json").empty() && source != "properties") {
        doc = parse_text(bundled_preset(source), "preset " + source);
    } else {
        throw ValidationError(source + ": no such scenario file or bundled preset");
    }
    if (!doc.is_object()) {
        throw ValidationError(source + ": scenario must be a JSON object");
    }
    if (auto it = doc.find("extends"); it != doc.end()) {
        if (!it->is_string()) {
            throw ValidationError(source + ": 'extends' must name a preset or file");
        }
        std::string parent = it->get<std::string>();
        const std::filesystem::path candidate = base_dir / parent;
        if (std::filesystem::is_regular_file(candidate, ec)) {
            parent = candidate.string();
        }
        std::filesystem::path inherited_dir;
        json merged = resolve_document(parent, depth + 1, inherited_dir);
        doc.erase("extends");
        merged.merge_patch(doc);
        return merged;
    }
    return doc;
}

} // namespace

json load_scenario_document(const std::string& source, std::span<const std::string> overrides)
{
    std::filesystem::path base_dir;
    json doc = resolve_document(source, 0, base_dir);
    for (const std::string& o : overrides) {
        apply_override(doc, o);
    }
    if (!base_dir.empty()) {
        doc["__base_dir"] = base_dir.string();
    }
    return doc;
}

ScenarioSpec scenario_from_json(const json& input, const std::filesystem::path& base_dir_arg)
{
    json doc = input;
    std::filesystem::path base_dir = base_dir_arg;
    if (auto it = doc.find("__base_dir"); it != doc.end()) {
        if (base_dir.empty()) {
            base_dir = it->get<std::string>();
        }
        doc.erase(it);
    }

    ScenarioSpec spec;
    spec.document = doc;
    Section root(doc, "scenario");
    spec.name = root.string("name", "scenario");
    root.string("description", "");
    if (root.has("units")) {
        root.raw("units");
    }

    // Property data, optionally patched.
    json properties;
    const std::string source = root.string("properties", "bundled");
    if (source == "bundled") {
        properties = parse_text(SpeciesTable::bundled_document(), "bundled properties");
    } else {
        std::filesystem::path p(source);
        if (p.is_relative() && !base_dir.empty()) {
            p = base_dir / p;
        }
        properties = read_json_file(p);
    }
    if (root.has("property_overrides")) {
        properties.merge_patch(root.raw("property_overrides"));
    }
    spec.table = std::make_shared<const SpeciesTable>(SpeciesTable::from_json(properties));

    {
        Section g(root.raw("geometry"), "scenario.geometry");
        GeometrySpec& gs = spec.geometry;
        gs.h_tot = g.number("h_tot");
        gs.h_cl = g.number("h_cl");
        gs.h_cu = g.number("h_cu");
        gs.r_c = g.number("r_c");
        gs.r_l = g.number("r_l");
        gs.r_u = g.number("r_u");
        gs.r_r = g.number("r_r");
        gs.r_w = g.number("r_w");
        const json& nv = g.raw("n_v");
        if (!nv.is_number_integer() || nv.get<long>() < 1) {
            throw ValidationError("scenario.geometry.n_v: expected a positive integer");
        }
        gs.n_v = nv.get<std::size_t>();
        g.finish();
        gs.validate();
    }

    {
        Section b(root.raw("boundary"), "scenario.boundary");
        spec.boundary.outlet_pressure = b.positive("outlet_pressure", 101325.0);
        spec.boundary.ambient_temperature = b.positive("ambient_temperature", 298.15);
        const json& streams = b.raw("streams");
        if (!streams.is_object()) {
            throw ValidationError("scenario.boundary.streams: expected an object keyed by stream name");
        }
        for (auto it = streams.begin(); it != streams.end(); ++it) {
            Section s(*it, "scenario.boundary.streams." + it.key());
            Stream st;
            st.name = it.key();
            st.temperature = s.positive("temperature", 0.0);
            st.mass_flow = species_map(s.raw("mass_flow"), s.where("mass_flow"), true);
            s.finish();
            spec.boundary.inlets.push_back(std::move(st));
        }
        b.finish();
        spec.boundary.validate();
    }

    if (root.has("initial")) {
        Section s(root.raw("initial"), "scenario.initial");
        InitialCondition& ic = spec.initial;
        ic.T_c = s.positive("temperature", ic.T_c);
        ic.T_r = s.positive("refractory_temperature", ic.T_c);
        ic.T_w = s.positive("shell_temperature", ic.T_r);
        ic.pressure = s.number("pressure", 0.0);
        if (s.has("gas")) {
            ic.gas_fractions = species_map(s.raw("gas"), s.where("gas"), true);
        } else {
            ic.gas_fractions[idx(SpeciesId::N2)] = 0.79;
            ic.gas_fractions[idx(SpeciesId::O2)] = 0.21;
        }
        if (s.has("solids")) {
            ic.solids = species_map(s.raw("solids"), s.where("solids"), true);
        }
        s.finish();
    } else {
        spec.initial.gas_fractions[idx(SpeciesId::N2)] = 0.79;
        spec.initial.gas_fractions[idx(SpeciesId::O2)] = 0.21;
    }
    for (std::size_t i = 0; i < kNumSolids; ++i) {
        if (spec.initial.gas_fractions[i] != 0.0) {
            throw ValidationError("scenario.initial.gas: " + std::string(species_name(species_at(i))) +
                                  " is not a gas");
        }
    }
    for (std::size_t i = kFirstGas; i < kNumSpecies; ++i) {
        if (spec.initial.solids[i] != 0.0) {
            throw ValidationError("scenario.initial.solids: " + std::string(species_name(species_at(i))) +
                                  " is not a solid");
        }
    }

    if (root.has("calibration")) {
        Section c(root.raw("calibration"), "scenario.calibration");
        for (std::size_t j = 0; j < kNumReactions; ++j) {
            const std::string key = "r" + std::to_string(j + 1);
            spec.calibration[j] = c.number(key, spec.calibration[j]);
            if (!(spec.calibration[j] >= 0.0)) {
                throw ValidationError(c.where(key) + ": must be non-negative");
            }
        }
        c.finish();
    }

    ModelOptions& opt = spec.options;
    if (root.has("heat_transfer")) {
        Section h(root.raw("heat_transfer"), "scenario.heat_transfer");
        opt.heat.internal = h.boolean("internal", true);
        opt.heat.exterior = h.boolean("exterior", true);
        opt.heat.exterior_coefficient = h.number("exterior_coefficient", opt.heat.exterior_coefficient);
        opt.heat.environment_emissivity = h.number("environment_emissivity", opt.heat.environment_emissivity);
        opt.heat.solid_emissivity = h.number("solid_emissivity", opt.heat.solid_emissivity);
        opt.heat.beam_length_factor = h.number("beam_length_factor", opt.heat.beam_length_factor);
        if (h.has("wsgg")) {
            opt.heat.wsgg = parse_wsgg(h.raw("wsgg"), h.where("wsgg"));
        }
        h.finish();
        auto unit_interval = [&](double v, const char* key) {
            if (!(v > 0.0 && v <= 1.0)) {
                throw ValidationError(h.where(key) + ": emissivity must lie in (0, 1]");
            }
        };
        unit_interval(opt.heat.environment_emissivity, "environment_emissivity");
        unit_interval(opt.heat.solid_emissivity, "solid_emissivity");
        if (!(opt.heat.exterior_coefficient >= 0.0) || !(opt.heat.beam_length_factor > 0.0)) {
            throw ValidationError("scenario.heat_transfer: coefficients must be non-negative");
        }
    }
    if (root.has("transport")) {
        Section t(root.raw("transport"), "scenario.transport");
        opt.velocity_regularization = t.positive("velocity_regularization", opt.velocity_regularization);
        if (t.has("diffusivity")) {
            opt.diffusivity = species_map(t.raw("diffusivity"), t.where("diffusivity"), true);
        }
        t.finish();
    }
    if (root.has("model")) {
        Section m(root.raw("model"), "scenario.model");
        opt.closed = m.boolean("closed", false);
        opt.reactions = m.boolean("reactions", true);
        opt.negative_tolerance = m.positive("negative_tolerance", opt.negative_tolerance);
        m.finish();
    }

    if (root.has("solver")) {
        Section s(root.raw("solver"), "scenario.solver");
        SolverConfig& c = spec.solver;
        c.dt_init = s.number("dt_init", c.dt_init);
        c.dt_min = s.number("dt_min", c.dt_min);
        c.dt_max = s.number("dt_max", c.dt_max);
        c.newton_tol = s.number("newton_tol", c.newton_tol);
        c.newton_max_iter = s.integer("newton_max_iter", c.newton_max_iter);
        c.update_rtol = s.number("update_rtol", c.update_rtol);
        c.algebraic_tol = s.number("algebraic_tol", c.algebraic_tol);
        c.steady_state_tol = s.number("steady_state_tol", c.steady_state_tol);
        const std::string norm = s.string("steady_norm", "max");
        if (norm == "max") {
            c.steady_norm = SteadyNorm::Max;
        } else if (norm == "rms") {
            c.steady_norm = SteadyNorm::Rms;
        } else {
            throw ValidationError(s.where("steady_norm") + ": expected 'max' or 'rms'");
        }
        c.jacobian_reuse = s.integer("jacobian_reuse", c.jacobian_reuse);
        c.growth = s.number("growth", c.growth);
        c.growth_after = s.integer("growth_after", c.growth_after);
        c.workers = s.integer("workers", c.workers);
        s.finish();
    }
    spec.solver.validate();

    if (root.has("run")) {
        Section r(root.raw("run"), "scenario.run");
        spec.run.mode = parse_run_mode(r.string("mode", "dynamic"));
        spec.run.t_end = r.positive("t_end", spec.run.t_end);
        spec.run.steady_t_max = r.positive("steady_t_max", spec.run.steady_t_max);
        r.finish();
    }
    if (root.has("output")) {
        Section o(root.raw("output"), "scenario.output");
        spec.output.cadence = o.positive("cadence", spec.output.cadence);
        spec.output.directory = o.string("directory", spec.output.directory);
        o.finish();
    }
    root.finish();
    return spec;
}

ScenarioSpec load_scenario(const std::string& source, std::span<const std::string> overrides)
{
    return scenario_from_json(load_scenario_document(source, overrides));
}

} // namespace calciner

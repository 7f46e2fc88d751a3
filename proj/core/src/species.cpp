#include "calciner/species.h"

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "calciner/error.h"
#include "embedded.h"

namespace calciner {

namespace {

constexpr std::array<std::string_view, kNumSpecies> kSpeciesNames = {
    "CaCO3", "CaO", "SiO2", "Al2O3", "Fe2O3", "C2S", "C3S", "C3A", "C4AF", "C",
    "CO2", "N2", "O2", "Ar", "CO", "H2", "H2O"};

constexpr std::array<std::string_view, kNumElements> kElementNames = {
    "Ca", "Si", "Al", "Fe", "C", "O", "H", "N", "Ar"};

//                                    Ca Si Al Fe  C   O  H  N  Ar
constexpr std::array<std::array<int, kNumElements>, kNumSpecies> kElements = {{
    {1, 0, 0, 0, 1, 3, 0, 0, 0},  // CaCO3
    {1, 0, 0, 0, 0, 1, 0, 0, 0},  // CaO
    {0, 1, 0, 0, 0, 2, 0, 0, 0},  // SiO2
    {0, 0, 2, 0, 0, 3, 0, 0, 0},  // Al2O3
    {0, 0, 0, 2, 0, 3, 0, 0, 0},  // Fe2O3
    {2, 1, 0, 0, 0, 4, 0, 0, 0},  // C2S  (CaO)2 SiO2
    {3, 1, 0, 0, 0, 5, 0, 0, 0},  // C3S  (CaO)3 SiO2
    {3, 0, 2, 0, 0, 6, 0, 0, 0},  // C3A  (CaO)3 Al2O3
    {4, 0, 2, 2, 0, 10, 0, 0, 0}, // C4AF (CaO)4 Al2O3 Fe2O3
    {0, 0, 0, 0, 1, 0, 0, 0, 0},  // C
    {0, 0, 0, 0, 1, 2, 0, 0, 0},  // CO2
    {0, 0, 0, 0, 0, 0, 0, 2, 0},  // N2
    {0, 0, 0, 0, 0, 2, 0, 0, 0},  // O2
    {0, 0, 0, 0, 0, 0, 0, 0, 1},  // Ar
    {0, 0, 0, 0, 1, 1, 0, 0, 0},  // CO
    {0, 0, 0, 0, 0, 0, 2, 0, 0},  // H2
    {0, 0, 0, 0, 0, 1, 2, 0, 0},  // H2O
}};

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what)
{
    throw ValidationError(where + ": " + what);
}

const json& require(const json& obj, const char* key, const std::string& where)
{
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) {
        fail(where, std::string("missing field '") + key + "'");
    }
    return *it;
}

double require_number(const json& obj, const char* key, const std::string& where)
{
    const json& v = require(obj, key, where);
    if (!v.is_number()) {
        fail(where, std::string("field '") + key + "' must be a number");
    }
    return v.get<double>();
}

double optional_number(const json& obj, const char* key, double fallback)
{
    auto it = obj.find(key);
    return (it == obj.end() || !it->is_number()) ? fallback : it->get<double>();
}

HeatCapacity parse_cp(const json& obj, const std::string& where)
{
    const json& cp = require(obj, "cp", where);
    const std::string w = where + ".cp";
    HeatCapacity hc;
    std::string form = cp.value("form", std::string("polynomial"));
    if (form == "five_term") {
        hc.form = HeatCapacity::Form::FiveTerm;
        hc.d = require_number(cp, "d", w);
        hc.e = require_number(cp, "e", w);
    } else if (form != "polynomial") {
        fail(w, "unknown form '" + form + "'");
    }
    // Table units: C1 in 1e-3 J/(mol K^2), C2 in 1e-5 J/(mol K^3).
    hc.c0 = require_number(cp, "C0", w);
    hc.c1 = require_number(cp, "C1", w) * 1e-3;
    hc.c2 = require_number(cp, "C2", w) * 1e-5;
    if (auto r = cp.find("range"); r != cp.end()) {
        if (!r->is_array() || r->size() != 2) {
            fail(w, "range must be [T_min, T_max]");
        }
        hc.t_min = (*r)[0].get<double>();
        hc.t_max = (*r)[1].get<double>();
        if (!(hc.t_min > 0.0 && hc.t_max > hc.t_min)) {
            fail(w, "invalid range");
        }
    }
    return hc;
}

TwoPoint parse_pairs(const json& obj, const char* key, const std::string& where, double scale)
{
    const json& v = require(obj, key, where);
    if (!v.is_array() || v.size() != 2 || !v[0].is_array() || !v[1].is_array() ||
        v[0].size() != 2 || v[1].size() != 2) {
        fail(where, std::string("field '") + key + "' must be two [T, value] pairs");
    }
    TwoPoint p{v[0][0].get<double>(), v[0][1].get<double>() * scale,
               v[1][0].get<double>(), v[1][1].get<double>() * scale};
    if (!(p.t1 > 0.0 && p.t2 > 0.0 && p.t1 != p.t2 && p.v1 > 0.0 && p.v2 > 0.0)) {
        fail(where, std::string("field '") + key + "' needs distinct positive temperatures and positive values");
    }
    return p;
}

SpeciesId require_species(const std::string& name, const std::string& where)
{
    auto s = parse_species(name);
    if (!s) {
        fail(where, "unknown species '" + name + "'");
    }
    return *s;
}

Material parse_material(const json& obj, const std::string& where)
{
    Material m;
    m.name = obj.value("name", where);
    m.molar_mass = require_number(obj, "molar_mass", where) * 1e-3;
    m.density = require_number(obj, "density", where) * 1e3;
    m.conductivity = require_number(obj, "conductivity", where);
    m.formation_enthalpy = optional_number(obj, "formation_enthalpy", 0.0) * 1e3;
    m.emissivity = require_number(obj, "emissivity", where);
    m.cp = parse_cp(obj, where);
    if (!(m.molar_mass > 0.0 && m.density > 0.0 && m.conductivity > 0.0)) {
        fail(where, "molar_mass, density and conductivity must be positive");
    }
    if (!(m.emissivity > 0.0 && m.emissivity <= 1.0)) {
        fail(where, "emissivity must lie in (0, 1]");
    }
    return m;
}

RateUnit parse_unit(const std::string& u, const std::string& where)
{
    if (u == "kg/(m3 s)") return RateUnit::KgPerM3PerS;
    if (u == "mol/(m3 s)") return RateUnit::MolPerM3PerS;
    if (u == "1/s") return RateUnit::PerS;
    fail(where, "unknown rate_unit '" + u + "'");
}

// cp must stay positive across the declared range (or a generic 250..2000 K
// window when none is declared).
void check_cp_positive(const HeatCapacity& cp, const std::string& where)
{
    double lo = cp.t_max > 0.0 ? cp.t_min : 250.0;
    double hi = cp.t_max > 0.0 ? cp.t_max : 2000.0;
    for (int i = 0; i <= 200; ++i) {
        double T = lo + (hi - lo) * i / 200.0;
        if (!(cp(T) > 0.0)) {
            fail(where, "heat capacity is not positive at T = " + std::to_string(T) + " K");
        }
    }
}

} // namespace

std::string_view species_name(SpeciesId s) { return kSpeciesNames[idx(s)]; }

std::optional<SpeciesId> parse_species(std::string_view name)
{
    for (std::size_t i = 0; i < kNumSpecies; ++i) {
        if (kSpeciesNames[i] == name) {
            return species_at(i);
        }
    }
    if (name == "C_solid" || name == "C_sus") {
        return SpeciesId::C;
    }
    return std::nullopt;
}

std::string_view element_name(Element e) { return kElementNames[static_cast<std::size_t>(e)]; }

const std::array<int, kNumElements>& element_counts(SpeciesId s) { return kElements[idx(s)]; }

std::array<double, kNumElements> element_totals(std::span<const double, kNumSpecies> moles)
{
    std::array<double, kNumElements> out{};
    for (std::size_t i = 0; i < kNumSpecies; ++i) {
        for (std::size_t e = 0; e < kNumElements; ++e) {
            out[e] += kElements[i][e] * moles[i];
        }
    }
    return out;
}

double HeatCapacity::operator()(double T) const
{
    double v = c0 + T * (c1 + T * c2);
    if (form == Form::FiveTerm) {
        v += d / (T * T) + e / std::sqrt(T);
    }
    return v;
}

double HeatCapacity::integral(double Ta, double Tb) const
{
    auto prim = [this](double T) {
        double v = T * (c0 + T * (c1 / 2.0 + T * c2 / 3.0));
        if (form == Form::FiveTerm) {
            v += -d / T + 2.0 * e * std::sqrt(T);
        }
        return v;
    };
    return prim(Tb) - prim(Ta);
}

SpeciesTable::SpeciesTable() : warnings_(std::make_shared<Warnings>()) {}

SpeciesTable SpeciesTable::from_string(std::string_view text)
{
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("property document: ") + e.what());
    }
    return from_json(doc);
}

SpeciesTable SpeciesTable::load(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("cannot open property document " + path.string());
    }
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return from_string(ss.str());
    } catch (const ValidationError& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

std::string_view SpeciesTable::bundled_document()
{
    return detail::embedded_file("properties.json");
}

SpeciesTable SpeciesTable::bundled() { return from_string(bundled_document()); }

SpeciesTable SpeciesTable::from_json(const json& doc)
{
    SpeciesTable table;
    if (auto ref = doc.find("reference_state"); ref != doc.end()) {
        table.t0_ = optional_number(*ref, "T0", table.t0_);
        table.p0_ = optional_number(*ref, "P0", table.p0_);
    }

    const json& species = require(doc, "species", "property document");
    std::array<bool, kNumSpecies> seen{};
    for (const json& rec : species) {
        const std::string name = require(rec, "id", "species record").get<std::string>();
        const std::string where = "species " + name;
        SpeciesId id = require_species(name, "species record");
        if (seen[idx(id)]) {
            fail(where, "duplicate record");
        }
        seen[idx(id)] = true;

        Species sp;
        sp.id = id;
        const std::string phase = require(rec, "phase", where).get<std::string>();
        sp.phase = phase == "gas" ? Phase::Gas : Phase::Solid;
        if ((sp.phase == Phase::Gas) != is_gas(id) || (phase != "gas" && phase != "solid")) {
            fail(where, "phase '" + phase + "' does not match the species");
        }
        sp.molar_mass = require_number(rec, "molar_mass", where) * 1e-3;
        if (!(sp.molar_mass > 0.0)) {
            fail(where, "molar_mass must be positive");
        }
        sp.formation_enthalpy = require_number(rec, "formation_enthalpy", where) * 1e3;
        sp.cp = parse_cp(rec, where);
        check_cp_positive(sp.cp, where);
        sp.diffusion_volume = optional_number(rec, "diffusion_volume", 0.0);
        if (sp.phase == Phase::Solid) {
            sp.density = require_number(rec, "density", where) * 1e3;
            sp.solid_conductivity = require_number(rec, "conductivity", where);
            sp.emissivity = require_number(rec, "emissivity", where);
            if (!(sp.density > 0.0 && sp.solid_conductivity > 0.0)) {
                fail(where, "density and conductivity must be positive");
            }
        } else {
            sp.gas_conductivity = parse_pairs(rec, "conductivity", where, 1e-3);
            sp.viscosity = parse_pairs(rec, "viscosity", where, 1e-6);
            sp.diffusion_volume = require_number(rec, "diffusion_volume", where);
        }
        table.species_[idx(id)] = sp;
    }
    for (std::size_t i = 0; i < kNumSpecies; ++i) {
        if (!seen[i]) {
            fail("species " + std::string(kSpeciesNames[i]), "missing record");
        }
    }

    // Compound molar masses must equal their oxide sums within 0.5 %.
    auto check_sum = [&](SpeciesId compound, std::initializer_list<std::pair<SpeciesId, int>> parts) {
        double sum = 0.0;
        for (auto [s, n] : parts) {
            sum += n * table[s].molar_mass;
        }
        double m = table[compound].molar_mass;
        if (std::abs(m - sum) > 5e-3 * sum) {
            fail("species " + std::string(species_name(compound)),
                 "molar_mass inconsistent with its oxide composition");
        }
    };
    check_sum(SpeciesId::C2S, {{SpeciesId::CaO, 2}, {SpeciesId::SiO2, 1}});
    check_sum(SpeciesId::C3S, {{SpeciesId::CaO, 3}, {SpeciesId::SiO2, 1}});
    check_sum(SpeciesId::C3A, {{SpeciesId::CaO, 3}, {SpeciesId::Al2O3, 1}});
    check_sum(SpeciesId::C4AF, {{SpeciesId::CaO, 4}, {SpeciesId::Al2O3, 1}, {SpeciesId::Fe2O3, 1}});

    const json& materials = require(doc, "materials", "property document");
    table.refractory_ = parse_material(require(materials, "refractory", "materials"), "materials.refractory");
    table.shell_ = parse_material(require(materials, "shell", "materials"), "materials.shell");

    const json& reactions = require(doc, "reactions", "property document");
    std::array<bool, kNumReactions> have{};
    for (const json& rec : reactions) {
        int index = static_cast<int>(require_number(rec, "index", "reaction record"));
        const std::string where = "reaction " + std::to_string(index);
        if (index < 1 || index > static_cast<int>(kNumReactions)) {
            fail(where, "index out of range 1..11");
        }
        if (have[index - 1]) {
            fail(where, "duplicate record");
        }
        have[index - 1] = true;

        ReactionSpec rx;
        rx.index = index;
        rx.equation = rec.value("equation", std::string());
        for (auto& [name, coeff] : require(rec, "stoichiometry", where).items()) {
            rx.stoich[idx(require_species(name, where))] = coeff.get<double>();
        }
        rx.unit = parse_unit(require(rec, "rate_unit", where).get<std::string>(), where);
        rx.k0 = require_number(rec, "k0", where);
        rx.temperature_exponent = optional_number(rec, "n", 0.0);
        rx.activation_energy = require_number(rec, "activation_energy", where) * 1e3;
        rx.reference = require_species(require(rec, "reference", where).get<std::string>(), where);
        if (!(rx.stoich[idx(rx.reference)] < 0.0)) {
            fail(where, "reference species must be a reactant");
        }
        if (auto it = rec.find("concentration_orders"); it != rec.end()) {
            for (auto& [name, order] : it->items()) {
                rx.concentration_orders.emplace_back(require_species(name, where), order.get<double>());
            }
        }
        if (auto it = rec.find("pressure_orders"); it != rec.end()) {
            for (auto& [name, order] : it->items()) {
                SpeciesId s = require_species(name, where);
                if (!is_gas(s)) {
                    fail(where, "pressure order on non-gas species " + name);
                }
                rx.pressure_orders.emplace_back(s, order.get<double>());
            }
        }
        if (auto it = rec.find("pressure_unit"); it != rec.end()) {
            const std::string u = it->get<std::string>();
            if (u == "Pa") {
                rx.pressure_unit = 1.0;
            } else if (u == "kPa") {
                rx.pressure_unit = 1e3;
            } else if (u == "bar") {
                rx.pressure_unit = 1e5;
            } else if (u == "atm") {
                rx.pressure_unit = 101325.0;
            } else {
                fail(where, "unknown pressure_unit '" + u + "' (Pa, kPa, bar, atm)");
            }
        }

        // Element balance must hold exactly; mass balance within tabulated rounding.
        for (std::size_t e = 0; e < kNumElements; ++e) {
            double sum = 0.0;
            for (std::size_t i = 0; i < kNumSpecies; ++i) {
                sum += rx.stoich[i] * kElements[i][e];
            }
            if (sum != 0.0) {
                fail(where, "element " + std::string(kElementNames[e]) + " is not conserved");
            }
        }
        double mass = 0.0;
        double scale = 0.0;
        for (std::size_t i = 0; i < kNumSpecies; ++i) {
            mass += rx.stoich[i] * table.species_[i].molar_mass;
            scale += std::abs(rx.stoich[i]) * table.species_[i].molar_mass;
        }
        if (std::abs(mass) > 5e-3 * 0.5 * scale) {
            fail(where, "mass is not conserved");
        }
        table.reactions_[index - 1] = std::move(rx);
    }
    for (std::size_t j = 0; j < kNumReactions; ++j) {
        if (!have[j]) {
            fail("reaction " + std::to_string(j + 1), "missing record");
        }
    }
    return table;
}

double SpeciesTable::cp_molar(SpeciesId s, double T) const
{
    if (!(T > 0.0)) {
        throw DomainError("cp_molar: temperature must be positive");
    }
    const HeatCapacity& cp = species_[idx(s)].cp;
    if (!cp.in_range(T)) {
        warnings_->flags[idx(s)].store(true, std::memory_order_relaxed);
    }
    return cp(T);
}

std::vector<SpeciesId> SpeciesTable::range_warnings() const
{
    std::vector<SpeciesId> out;
    for (std::size_t i = 0; i < kNumSpecies; ++i) {
        if (warnings_->flags[i].load(std::memory_order_relaxed)) {
            out.push_back(species_at(i));
        }
    }
    return out;
}

void SpeciesTable::clear_range_warnings() const
{
    for (auto& f : warnings_->flags) {
        f.store(false, std::memory_order_relaxed);
    }
}

std::array<SpeciesVector, kNumReactions> SpeciesTable::stoichiometry() const
{
    std::array<SpeciesVector, kNumReactions> nu{};
    for (std::size_t j = 0; j < kNumReactions; ++j) {
        nu[j] = reactions_[j].stoich;
    }
    return nu;
}

} // namespace calciner

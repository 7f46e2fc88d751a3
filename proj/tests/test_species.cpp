#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <string>

#include <nlohmann/json.hpp>

#include "calciner/error.h"
#include "calciner/species.h"

using namespace calciner;
using nlohmann::json;

namespace {

const SpeciesTable& table()
{
    static const SpeciesTable t = SpeciesTable::bundled();
    return t;
}

json bundled_json() { return json::parse(SpeciesTable::bundled_document()); }

// Hand-written formula table, independent of the library's element data.
const std::map<SpeciesId, std::map<char, int>>& formulas()
{
    static const std::map<SpeciesId, std::map<char, int>> f = {
        {SpeciesId::CaCO3, {{'a', 1}, {'C', 1}, {'O', 3}}},
        {SpeciesId::CaO, {{'a', 1}, {'O', 1}}},
        {SpeciesId::SiO2, {{'S', 1}, {'O', 2}}},
        {SpeciesId::Al2O3, {{'A', 2}, {'O', 3}}},
        {SpeciesId::Fe2O3, {{'F', 2}, {'O', 3}}},
        {SpeciesId::C2S, {{'a', 2}, {'S', 1}, {'O', 4}}},
        {SpeciesId::C3S, {{'a', 3}, {'S', 1}, {'O', 5}}},
        {SpeciesId::C3A, {{'a', 3}, {'A', 2}, {'O', 6}}},
        {SpeciesId::C4AF, {{'a', 4}, {'A', 2}, {'F', 2}, {'O', 10}}},
        {SpeciesId::C, {{'C', 1}}},
        {SpeciesId::CO2, {{'C', 1}, {'O', 2}}},
        {SpeciesId::N2, {{'N', 2}}},
        {SpeciesId::O2, {{'O', 2}}},
        {SpeciesId::Ar, {{'r', 1}}},
        {SpeciesId::CO, {{'C', 1}, {'O', 1}}},
        {SpeciesId::H2, {{'H', 2}}},
        {SpeciesId::H2O, {{'H', 2}, {'O', 1}}},
    };
    return f;
}

} // namespace

TEST_CASE("bundled table holds the seventeen species in fixed order")
{
    const auto& t = table();
    CHECK(t.species().size() == 17);
    for (std::size_t i = 0; i < kNumSpecies; ++i) {
        CHECK(t.species()[i].id == species_at(i));
        CHECK((t.species()[i].phase == Phase::Gas) == (i >= kFirstGas));
        CHECK(parse_species(species_name(species_at(i))) == species_at(i));
    }
    CHECK_FALSE(parse_species("CaSO4").has_value());
}

TEST_CASE("units are normalized to SI on load")
{
    const auto& t = table();
    CHECK(t[SpeciesId::CaO].molar_mass == doctest::Approx(0.05608).epsilon(1e-15));
    CHECK(t[SpeciesId::CaO].density == doctest::Approx(3340.0).epsilon(1e-15));
    CHECK(t[SpeciesId::N2].viscosity.v1 == doctest::Approx(17.89e-6).epsilon(1e-15));
    CHECK(t[SpeciesId::CO2].formation_enthalpy == doctest::Approx(-393.5e3).epsilon(1e-3));
}

TEST_CASE("heat capacity evaluations")
{
    const auto& t = table();
    CHECK(t.cp_molar(SpeciesId::Ar, 800.0) == doctest::Approx(20.79).epsilon(1e-14));
    CHECK(t.cp_molar(SpeciesId::Fe2O3, 800.0) == doctest::Approx(103.9).epsilon(1e-14));

    // Five-term calcite formula evaluated directly from the stored document.
    const json doc = bundled_json();
    json cp;
    for (const auto& s : doc["species"]) {
        if (s["id"] == "CaCO3") {
            cp = s["cp"];
        }
    }
    const double T = 298.15;
    const double expected = cp["C0"].get<double>() + cp["C1"].get<double>() * 1e-3 * T +
                            cp["C2"].get<double>() * 1e-5 * T * T + cp["d"].get<double>() / (T * T) +
                            cp["e"].get<double>() / std::sqrt(T);
    CHECK(t.cp_molar(SpeciesId::CaCO3, T) == doctest::Approx(expected).epsilon(1e-13));
    // Positive across the working range.
    for (double T2 = 298.15; T2 <= 1500.0; T2 += 50.0) {
        CHECK(t.cp_molar(SpeciesId::CaCO3, T2) > 0.0);
    }
}

TEST_CASE("cp integral matches quadrature")
{
    const auto& t = table();
    for (SpeciesId s : {SpeciesId::CaCO3, SpeciesId::CO2, SpeciesId::C4AF}) {
        const HeatCapacity& cp = t[s].cp;
        const double a = 300.0;
        const double b = 1400.0;
        const int n = 2000;
        const double h = (b - a) / n;
        double sum = cp(a) + cp(b);
        for (int i = 1; i < n; ++i) {
            sum += (i % 2 ? 4.0 : 2.0) * cp(a + i * h);
        }
        CHECK(cp.integral(a, b) == doctest::Approx(sum * h / 3.0).epsilon(1e-10));
    }
}

TEST_CASE("stoichiometric rows")
{
    const auto nu = table().stoichiometry();
    SpeciesVector row1{};
    row1[idx(SpeciesId::CaCO3)] = -1;
    row1[idx(SpeciesId::CaO)] = 1;
    row1[idx(SpeciesId::CO2)] = 1;
    CHECK(nu[0] == row1);
    SpeciesVector row5{};
    row5[idx(SpeciesId::CaO)] = -4;
    row5[idx(SpeciesId::Al2O3)] = -1;
    row5[idx(SpeciesId::Fe2O3)] = -1;
    row5[idx(SpeciesId::C4AF)] = 1;
    CHECK(nu[4] == row5);
}

TEST_CASE("every reaction conserves elements exactly and mass within tabulated rounding")
{
    const auto nu = table().stoichiometry();
    for (std::size_t j = 0; j < kNumReactions; ++j) {
        CAPTURE(j + 1);
        std::map<char, double> atoms;
        double mass = 0.0;
        double mass_scale = 0.0;
        for (std::size_t i = 0; i < kNumSpecies; ++i) {
            if (nu[j][i] == 0.0) {
                continue;
            }
            for (const auto& [el, count] : formulas().at(species_at(i))) {
                atoms[el] += nu[j][i] * count;
            }
            mass += nu[j][i] * table().species()[i].molar_mass;
            mass_scale += std::abs(nu[j][i]) * table().species()[i].molar_mass;
        }
        for (const auto& [el, total] : atoms) {
            CAPTURE(el);
            CHECK(total == 0.0);
        }
        CHECK(std::abs(mass) <= 0.005 * 0.5 * mass_scale);
        // The library's own element table agrees with the formulas above.
        const auto totals = element_totals(nu[j]);
        for (double e : totals) {
            CHECK(e == 0.0);
        }
    }
}

TEST_CASE("load errors name the offending entry")
{
    json doc = bundled_json();
    for (auto& s : doc["species"]) {
        if (s["id"] == "H2") {
            s.erase("viscosity");
        }
    }
    try {
        SpeciesTable::from_json(doc);
        FAIL("expected a validation error");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("H2") != std::string::npos);
        CHECK(std::string(e.what()).find("viscosity") != std::string::npos);
    }

    json broken = bundled_json();
    broken["reactions"][0]["stoichiometry"]["CO2"] = 2;
    CHECK_THROWS_AS(SpeciesTable::from_json(broken), ValidationError);

    CHECK_THROWS_AS(SpeciesTable::from_string("{not json"), ValidationError);
    CHECK_THROWS_AS(SpeciesTable::load("/nonexistent/properties.json"), ValidationError);
}

TEST_CASE("cp range warnings are recorded once per species")
{
    const SpeciesTable t = SpeciesTable::bundled();
    t.clear_range_warnings();
    (void)t.cp_molar(SpeciesId::N2, 800.0);
    CHECK(t.range_warnings().empty());
    (void)t.cp_molar(SpeciesId::N2, 2000.0);
    (void)t.cp_molar(SpeciesId::N2, 2100.0);
    REQUIRE(t.range_warnings().size() == 1);
    CHECK(t.range_warnings().front() == SpeciesId::N2);
}

#pragma once

#include <array>
#include <span>

#include "calciner/species.h"

namespace calciner {

using CalibrationFactors = std::array<double, kNumReactions>;

/// Factors 270 (r1), 5e5 (r6) and 60 (r9), one elsewhere.
CalibrationFactors default_calibration();

struct RateVector
{
    std::array<double, kNumReactions> r{}; // mol extent/(m^3 s)
    SpeciesVector R{};                     // mol/(m^3 s)
};

/// How reaction_rates treats negative concentrations.
enum class NegativePolicy {
    Reject, // throw DomainError
    Clamp   // evaluate with max(C, 0); used inside Newton iterations
};

/// factor k0 T^n exp(-E/(R T)).
double rate_constant(const ReactionSpec& rx, double factor, double T);

class Kinetics
{
public:
    /// Shift in C^a ~ C (C + eps)^(a-1) for orders 0 < a < 1, mol/L.
    static constexpr double kConcentrationShift = 1e-12;
    /// Same shift for fractional partial-pressure orders, in the reaction's pressure unit.
    static constexpr double kPressureShift = 1e-9;

    explicit Kinetics(const SpeciesTable& table, const CalibrationFactors& factors = default_calibration());

    const CalibrationFactors& factors() const { return factors_; }
    double rate_constant(std::size_t j, double T) const;

    /// Reaction extents and species production rates. Concentrations are
    /// mol/m^3 over the full species vector.
    RateVector rates(double T, double P, std::span<const double, kNumSpecies> C,
                     NegativePolicy policy = NegativePolicy::Reject) const;

private:
    const SpeciesTable* table_;
    CalibrationFactors factors_;
    std::array<SpeciesVector, kNumReactions> nu_{};
    /// Multiplier turning the tabulated rate into reaction extent.
    std::array<double, kNumReactions> extent_scale_{};
};

} // namespace calciner

#include "calciner/model.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "calciner/error.h"

namespace calciner {

using namespace layout;

void BoundarySpec::validate() const
{
    for (const Stream& s : inlets) {
        if (!(s.temperature > 0.0)) {
            throw ValidationError("boundary: stream '" + s.name + "' needs a positive temperature");
        }
        for (std::size_t i = 0; i < kNumSpecies; ++i) {
            if (!(s.mass_flow[i] >= 0.0) || !std::isfinite(s.mass_flow[i])) {
                throw ValidationError("boundary: stream '" + s.name + "' has a negative " +
                                      std::string(species_name(species_at(i))) + " flow");
            }
        }
    }
    if (!(outlet_pressure > 0.0)) {
        throw ValidationError("boundary: outlet pressure must be positive");
    }
    if (!(ambient_temperature > 0.0)) {
        throw ValidationError("boundary: ambient temperature must be positive");
    }
}

CalcinerModel::CalcinerModel(const SpeciesTable& table, const GeometrySpec& geometry, BoundarySpec boundary,
                             const CalibrationFactors& factors, ModelOptions options)
    : table_(&table),
      spec_(geometry),
      geometry_(segment_partition(geometry)),
      boundary_(std::move(boundary)),
      options_(std::move(options)),
      thermo_(table),
      transport_(table),
      kinetics_(table, factors)
{
    boundary_.validate();
    if (!(options_.velocity_regularization > 0.0)) {
        throw ValidationError("transport: velocity regularization must be positive");
    }
    if (!options_.closed) {
        for (const Stream& s : boundary_.inlets) {
            SpeciesVector n{};
            for (std::size_t i = 0; i < kNumSpecies; ++i) {
                n[i] = s.mass_flow[i] / table.species()[i].molar_mass;
                inlet_molar_[i] += n[i];
            }
            inlet_enthalpy_ += thermo_.enthalpy(s.temperature, n);
        }
    }
    refractory_concentration_ = table.refractory().concentration();
    shell_concentration_ = table.shell().concentration();
    conductance_rw_.resize(geometry_.size());
    for (std::size_t k = 0; k < geometry_.size(); ++k) {
        const SegmentGeometry& g = geometry_[k];
        const WallLayer layers[] = {{g.refractory_width, table.refractory().conductivity, g.area_cr},
                                    {g.shell_width, table.shell().conductivity, g.area_rw}};
        conductance_rw_[k] = overall_conductance(0.0, layers, 0.0);
    }
    // Near zero gradient the face velocity is steep; a pressure probe must
    // stay inside the regularized branch or the difference quotient falls
    // far short of the true slope.
    for (const SegmentGeometry& g : geometry_) {
        pressure_perturbation_ =
            std::min(pressure_perturbation_, 0.25 * options_.velocity_regularization * (g.y_hi - g.y_lo));
    }
}

double CalcinerModel::row_scale(std::size_t i) const
{
    return i % kBlock < kNumSpecies ? 1.0 : kEnergyScale;
}

double CalcinerModel::absolute_tolerance(std::size_t i) const
{
    const std::size_t o = i % kBlock;
    if (o < kNumSpecies) {
        return 1e-8;
    }
    if (o < kTc) {
        return 1e-2;
    }
    return o == kP ? 1e-6 : 1e-8;
}

double CalcinerModel::perturbation(std::size_t i, double v) const
{
    constexpr double kRel = 1.4901161193847656e-8;
    const std::size_t o = i % kBlock;
    if (o < kNumSpecies) {
        return kRel * std::max(std::abs(v), 1e-2);
    }
    if (o < kTc) {
        return kRel * std::max(std::abs(v), 1e6);
    }
    if (o == kP) {
        return pressure_perturbation_;
    }
    return kRel * std::max(std::abs(v), 1.0);
}

double CalcinerModel::steady_floor(std::size_t i) const
{
    return i % kBlock < kNumSpecies ? 1.0 : 1e4;
}

bool CalcinerModel::admissible(std::span<const double> z) const
{
    for (std::size_t k = 0; k < segments(); ++k) {
        for (std::size_t i = 0; i < kNumSpecies; ++i) {
            if (z[k * kBlock + i] < -options_.negative_tolerance) {
                return false;
            }
        }
    }
    return true;
}

void CalcinerModel::residual(double, std::span<const double> z, std::span<double> out) const
{
    assemble(z, out, nullptr);
}

ModelDiagnostics CalcinerModel::diagnostics(std::span<const double> z) const
{
    ModelDiagnostics d;
    std::vector<double> out(size());
    assemble(z, out, &d);
    return d;
}

namespace {

struct SegmentView
{
    std::span<const double, kNumSpecies> C;
    SpeciesVector clamped{};
    double Uc, Ur, Uw, Tc, Tr, Tw, P;
    MixtureProps props;
};

struct Face
{
    double velocity = 0.0;
    double area = 0.0;
    SpeciesVector molar{};
    double enthalpy = 0.0;
    double conduction = 0.0;
    double conduction_r = 0.0;
    double conduction_w = 0.0;
};

} // namespace

void CalcinerModel::assemble(std::span<const double> z, std::span<double> out, ModelDiagnostics* diag) const
{
    const std::size_t nv = segments();
    const double dy = spec_.dy();
    const Material& refr = table_->refractory();
    const Material& shell = table_->shell();
    const HeatTransferSpec& heat = options_.heat;

    std::vector<SegmentView> seg;
    seg.reserve(nv);
    for (std::size_t k = 0; k < nv; ++k) {
        const double* b = z.data() + k * kBlock;
        SegmentView s{std::span<const double, kNumSpecies>(b, kNumSpecies), {}, b[kUc], b[kUr], b[kUw],
                      b[kTc], b[kTr], b[kTw], b[kP], {}};
        if (!(s.P > 0.0)) {
            throw DomainError("segment " + std::to_string(k + 1) + ": non-positive pressure");
        }
        for (std::size_t i = 0; i < kNumSpecies; ++i) {
            s.clamped[i] = std::max(s.C[i], 0.0);
        }
        s.props = transport_.mixture(s.clamped, s.Tc, s.P);
        seg.push_back(s);
    }

    std::vector<Face> faces(nv + 1);
    auto advect = [&](Face& f, const SegmentView& donor, bool gas_only) {
        for (std::size_t i = gas_only ? kFirstGas : 0; i < kNumSpecies; ++i) {
            f.molar[i] = f.velocity * donor.C[i];
        }
    };
    for (std::size_t j = 1; j < nv; ++j) {
        const SegmentView& lo = seg[j - 1];
        const SegmentView& hi = seg[j];
        Face& f = faces[j];
        const double mu = 0.5 * (lo.props.mu_m + hi.props.mu_m);
        const double rho = 0.5 * (lo.props.rho_m + hi.props.rho_m);
        const double dh = 0.5 * (geometry_[j - 1].hydraulic_diameter + geometry_[j].hydraulic_diameter);
        f.velocity = velocity_darcy_weisbach(hi.P - lo.P, dy, mu, rho, dh, options_.velocity_regularization);
        const std::size_t donor = f.velocity >= 0.0 ? j - 1 : j;
        f.area = geometry_[donor].mean_area();
        advect(f, seg[donor], false);
        for (std::size_t i = 0; i < kNumSpecies; ++i) {
            if (options_.diffusivity[i] != 0.0) {
                f.molar[i] -= options_.diffusivity[i] * (hi.C[i] - lo.C[i]) / dy;
            }
            f.molar[i] *= f.area;
        }
        f.enthalpy = thermo_.enthalpy(seg[donor].Tc, f.molar);
        const double area_c = 0.5 * (geometry_[j - 1].mean_area() + geometry_[j].mean_area());
        const double area_r = 0.5 * (geometry_[j - 1].mean_refractory_area() + geometry_[j].mean_refractory_area());
        const double area_w = 0.5 * (geometry_[j - 1].mean_shell_area() + geometry_[j].mean_shell_area());
        f.conduction = -0.5 * (lo.props.k_m + hi.props.k_m) * (hi.Tc - lo.Tc) / dy * area_c;
        f.conduction_r = -refr.conductivity * (hi.Tr - lo.Tr) / dy * area_r;
        f.conduction_w = -shell.conductivity * (hi.Tw - lo.Tw) / dy * area_w;
    }
    if (!options_.closed) {
        const SegmentView& top = seg[nv - 1];
        Face& f = faces[nv];
        f.velocity = velocity_darcy_weisbach(boundary_.outlet_pressure - top.P, dy, top.props.mu_m,
                                             top.props.rho_m, geometry_[nv - 1].hydraulic_diameter,
                                             options_.velocity_regularization);
        f.area = geometry_[nv - 1].mean_area();
        // Backflow through the outlet carries the top segment's gas only.
        advect(f, top, f.velocity < 0.0);
        for (double& n : f.molar) {
            n *= f.area;
        }
        f.enthalpy = thermo_.enthalpy(top.Tc, f.molar);
    }

    if (diag) {
        diag->segments.assign(nv, {});
        diag->faces.assign(nv + 1, {});
        for (std::size_t j = 0; j <= nv; ++j) {
            FaceDiagnostics& fd = diag->faces[j];
            fd.y = j == 0 ? 0.0 : geometry_[j - 1].y_hi;
            fd.velocity = faces[j].velocity;
            fd.area = faces[j].area;
            fd.molar = faces[j].molar;
            fd.enthalpy = faces[j].enthalpy;
            fd.conduction = faces[j].conduction;
        }
        diag->inlet_molar = inlet_molar_;
        diag->inlet_enthalpy = inlet_enthalpy_;
    }

    for (std::size_t k = 0; k < nv; ++k) {
        const SegmentView& s = seg[k];
        const SegmentGeometry& g = geometry_[k];
        const Face& below = faces[k];
        const Face& above = faces[k + 1];
        double* o = out.data() + k * kBlock;

        RateVector rates;
        if (options_.reactions) {
            rates = kinetics_.rates(s.Tc, s.P, s.C, NegativePolicy::Clamp);
        }
        const bool inlet = k == 0 && !options_.closed;
        for (std::size_t i = 0; i < kNumSpecies; ++i) {
            double net = below.molar[i] - above.molar[i];
            if (inlet) {
                net += inlet_molar_[i];
            }
            o[i] = net / g.volume + rates.R[i];
        }

        const double v_seg = k == 0 ? std::abs(above.velocity)
                                    : 0.5 * (std::abs(below.velocity) + std::abs(above.velocity));
        double Q_cr_cv = 0.0;
        double Q_cr_rad = 0.0;
        double Q_rw = 0.0;
        double Q_we_cv = 0.0;
        double Q_we_rad = 0.0;
        Convection conv;
        double beta_cr = 0.0;
        double eps_g = 0.0;
        double eps_c = 0.0;
        if (heat.internal) {
            const double Re = s.props.rho_m * v_seg * g.hydraulic_diameter / s.props.mu_m;
            const double Pr = s.props.cp_mass * s.props.mu_m / s.props.k_m;
            conv = convection(Re, Pr);
            beta_cr = s.props.k_m * conv.nusselt / g.hydraulic_diameter;
            Q_cr_cv = g.area_cr * beta_cr * (s.Tc - s.Tr);
            const double gas = s.props.gas_concentration;
            const double p_co2 = s.clamped[idx(SpeciesId::CO2)] / gas * s.P;
            const double p_h2o = s.clamped[idx(SpeciesId::H2O)] / gas * s.P;
            eps_g = heat.wsgg.emissivity(s.Tc, p_co2, p_h2o, heat.beam_length_factor * g.hydraulic_diameter);
            eps_c = mixture_emissivity(heat.solid_emissivity, eps_g);
            Q_cr_rad = radiative_exchange(g.area_cr, eps_c, s.Tc, refr.emissivity, s.Tr);
            Q_rw = conductance_rw_[k] * (s.Tr - s.Tw);
        }
        if (heat.exterior) {
            const double Te = boundary_.ambient_temperature;
            Q_we_cv = g.area_we * heat.exterior_coefficient * (s.Tw - Te);
            Q_we_rad = radiative_exchange(g.area_we, shell.emissivity, s.Tw, heat.environment_emissivity, Te);
        }

        double net_c = below.enthalpy + below.conduction - above.enthalpy - above.conduction;
        if (inlet) {
            net_c += inlet_enthalpy_;
        }
        o[kUc] = (net_c - Q_cr_cv - Q_cr_rad) / g.volume;
        o[kUr] = (below.conduction_r - above.conduction_r + Q_cr_cv + Q_cr_rad - Q_rw) / g.refractory_volume;
        o[kUw] = (below.conduction_w - above.conduction_w + Q_rw - Q_we_cv - Q_we_rad) / g.shell_volume;

        double gas_total = 0.0;
        for (std::size_t i = kFirstGas; i < kNumSpecies; ++i) {
            gas_total += s.C[i];
        }
        const double v_gas = gas_total * kGasConstant * s.Tc / s.P;
        const double v_solid = thermo_.volume(Phase::Solid, s.Tc, s.P, s.C.first<kNumSolids>());
        // Each algebraic row sits on the unknown it mainly determines.
        o[kTc] = (s.Uc - thermo_.mixture_internal_energy_density(s.C, s.Tc, s.P)) / kEnergyScale;
        o[kTr] = (s.Ur - thermo_.material_enthalpy(refr, s.Tr, refractory_concentration_)) / kEnergyScale;
        o[kTw] = (s.Uw - thermo_.material_enthalpy(shell, s.Tw, shell_concentration_)) / kEnergyScale;
        o[kP] = v_gas + v_solid - 1.0;

        if (diag) {
            SegmentDiagnostics& d = diag->segments[k];
            d.T_c = s.Tc;
            d.T_r = s.Tr;
            d.T_w = s.Tw;
            d.P = s.P;
            d.velocity = v_seg;
            d.props = s.props;
            d.convection = conv;
            d.beta_cr = beta_cr;
            d.conductance_rw = conductance_rw_[k];
            d.eps_g = eps_g;
            d.eps_c = eps_c;
            d.Q_cr_cv = Q_cr_cv;
            d.Q_cr_rad = Q_cr_rad;
            d.Q_rw_cv = Q_rw;
            d.Q_we_cv = Q_we_cv;
            d.Q_we_rad = Q_we_rad;
            d.rates = rates;
        }
    }
}

void CalcinerModel::solve_algebraic(double, std::span<double> z) const
{
    const Material& refr = table_->refractory();
    const Material& shell = table_->shell();
    for (std::size_t k = 0; k < segments(); ++k) {
        double* b = z.data() + k * kBlock;
        const std::span<const double, kNumSpecies> C(b, kNumSpecies);
        const std::string where = "segment " + std::to_string(k + 1) + ": ";
        double gas_total = 0.0;
        for (std::size_t i = kFirstGas; i < kNumSpecies; ++i) {
            gas_total += C[i];
        }
        if (!(gas_total > 0.0)) {
            throw SolverError(where + "volume closure has no solution without gas");
        }
        const double v_solid = thermo_.volume(Phase::Solid, 1000.0, 1.0, C.first<kNumSolids>());
        if (!(v_solid < 1.0)) {
            throw SolverError(where + "solids fill the whole segment volume");
        }
        auto guess = [](double T) { return T > Thermo::kTMin && T < Thermo::kTMax ? T : 1000.0; };
        try {
            // U_c does not depend on P for an ideal gas, so T_c is found first.
            b[kTc] = thermo_.invert_mixture_temperature(b[kUc], C, boundary_.outlet_pressure, guess(b[kTc]));
        } catch (const Error& e) {
            throw SolverError(where + "mixture phase: " + e.what());
        }
        b[kP] = gas_total * kGasConstant * b[kTc] / (1.0 - v_solid);
        try {
            b[kTr] = thermo_.invert_material_temperature(b[kUr], refr, refractory_concentration_, guess(b[kTr]));
        } catch (const Error& e) {
            throw SolverError(where + "refractory phase: " + e.what());
        }
        try {
            b[kTw] = thermo_.invert_material_temperature(b[kUw], shell, shell_concentration_, guess(b[kTw]));
        } catch (const Error& e) {
            throw SolverError(where + "shell phase: " + e.what());
        }
    }
}

std::vector<double> CalcinerModel::initial_state(const InitialCondition& ic) const
{
    double frac_total = 0.0;
    for (std::size_t i = kFirstGas; i < kNumSpecies; ++i) {
        if (ic.gas_fractions[i] < 0.0) {
            throw ValidationError("initial condition: negative gas fraction");
        }
        frac_total += ic.gas_fractions[i];
    }
    if (!(frac_total > 0.0)) {
        throw ValidationError("initial condition: the initial fill needs at least one gas");
    }
    const double P = ic.pressure > 0.0 ? ic.pressure : boundary_.outlet_pressure;
    std::vector<double> z(size(), 0.0);
    for (std::size_t k = 0; k < segments(); ++k) {
        double* b = z.data() + k * kBlock;
        SpeciesVector C{};
        for (std::size_t i = 0; i < kNumSolids; ++i) {
            C[i] = ic.solids[i];
        }
        const double v_solid = thermo_.volume(Phase::Solid, ic.T_c, P, std::span<const double>(C.data(), kNumSolids));
        if (!(v_solid < 1.0)) {
            throw ValidationError("initial condition: solids exceed the segment volume");
        }
        const double gas_total = P * (1.0 - v_solid) / (kGasConstant * ic.T_c);
        for (std::size_t i = kFirstGas; i < kNumSpecies; ++i) {
            C[i] = ic.gas_fractions[i] / frac_total * gas_total;
        }
        std::copy(C.begin(), C.end(), b);
        b[kUc] = thermo_.mixture_internal_energy_density(C, ic.T_c, P);
        b[kUr] = thermo_.material_enthalpy(table_->refractory(), ic.T_r, refractory_concentration_);
        b[kUw] = thermo_.material_enthalpy(table_->shell(), ic.T_w, shell_concentration_);
        b[kTc] = ic.T_c;
        b[kTr] = ic.T_r;
        b[kTw] = ic.T_w;
        b[kP] = P;
    }
    return z;
}

Inventory CalcinerModel::inventory(std::span<const double> z) const
{
    Inventory inv;
    for (std::size_t k = 0; k < segments(); ++k) {
        const SegmentGeometry& g = geometry_[k];
        const double* b = z.data() + k * kBlock;
        for (std::size_t i = 0; i < kNumSpecies; ++i) {
            inv.moles[i] += b[i] * g.volume;
        }
        inv.energy += b[kUc] * g.volume + b[kUr] * g.refractory_volume + b[kUw] * g.shell_volume;
    }
    return inv;
}

Inventory CalcinerModel::inventory_rate(std::span<const double> z) const
{
    std::vector<double> f(size());
    assemble(z, f, nullptr);
    return inventory(f);
}

} // namespace calciner

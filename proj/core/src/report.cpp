#include "calciner/report.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>

#include "calciner/error.h"

namespace calciner {

using namespace layout;

std::string format_number(double value)
{
    if (std::isnan(value)) {
        return "nan";
    }
    if (std::isinf(value)) {
        return value > 0 ? "inf" : "-inf";
    }
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

Summary summarize(const CalcinerModel& model, std::span<const double> z, const SimulationResult* sim)
{
    Summary s;
    const ModelDiagnostics d = model.diagnostics(z);
    const FaceDiagnostics& top = d.faces.back();
    const std::size_t nv = model.segments();
    s.outlet_molar = top.molar;
    s.outlet_velocity = top.velocity;
    s.outlet_temperature = z[(nv - 1) * kBlock + kTc];

    const double in_caco3 = model.inlet_molar()[idx(SpeciesId::CaCO3)];
    s.conversion = in_caco3 > 0.0 ? 100.0 * (1.0 - top.molar[idx(SpeciesId::CaCO3)] / in_caco3)
                                  : std::numeric_limits<double>::quiet_NaN();

    double gas = 0.0;
    for (std::size_t i = kFirstGas; i < kNumSpecies; ++i) {
        gas += top.molar[i];
    }
    const double dry = gas - top.molar[idx(SpeciesId::H2O)];
    for (std::size_t i = kFirstGas; i < kNumSpecies; ++i) {
        s.wet_fractions[i] = gas != 0.0 ? 100.0 * top.molar[i] / gas : 0.0;
        if (species_at(i) != SpeciesId::H2O) {
            s.dry_fractions[i] = dry != 0.0 ? 100.0 * top.molar[i] / dry : 0.0;
        }
    }
    s.carbon_fraction = gas != 0.0 ? 100.0 * top.molar[idx(SpeciesId::C)] / gas : 0.0;
    for (const SegmentDiagnostics& seg : d.segments) {
        s.heat_loss += seg.Q_we_cv + seg.Q_we_rad;
    }
    if (sim) {
        s.t_settle = sim->t_settle;
        s.steady = sim->steady;
        s.final_time = sim->final_time;
    }
    return s;
}

Simulation::Simulation(ScenarioSpec spec)
    : spec_(std::move(spec)),
      model_(*spec_.table, spec_.geometry, spec_.boundary, spec_.calibration, spec_.options)
{
}

std::vector<double> Simulation::initial_state() const
{
    return model_.initial_state(spec_.initial);
}

RunResult Simulation::run(RunMode mode, std::ostream* progress) const
{
    RunResult res;
    res.mode = mode;
    res.t_end = mode == RunMode::Dynamic ? spec_.run.t_end : spec_.run.steady_t_max;
    ImplicitEuler solver(model_, spec_.solver);
    double next_report = 60.0;
    ImplicitEuler::Observer observer;
    if (progress) {
        observer = [&](double t, std::span<const double> z) {
            if (t >= next_report) {
                *progress << "t = " << format_number(std::round(t)) << " s, outlet T = "
                          << format_number(std::round(10.0 * (z[(model_.segments() - 1) * kBlock + kTc] - 273.15)) / 10.0)
                          << " C\n";
                next_report += 60.0;
            }
        };
    }
    res.simulation = solver.simulate(0.0, initial_state(), res.t_end, spec_.output.cadence, mode == RunMode::Steady,
                                     observer);
    res.summary = summarize(model_, res.simulation.final_state, &res.simulation);
    return res;
}

void write_timeseries(std::ostream& out, const CalcinerModel& model, const Trajectory& trajectory)
{
    out << "time[s],segment,y_mid[m],T_c[K],T_r[K],T_w[K],P[Pa],v_top[m/s],U_c[J/m3],U_r[J/m3],U_w[J/m3]";
    for (std::size_t i = 0; i < kNumSpecies; ++i) {
        out << ",C_" << species_name(species_at(i)) << "[mol/m3]";
    }
    out << '\n';
    for (std::size_t n = 0; n < trajectory.times.size(); ++n) {
        const std::vector<double>& z = trajectory.states[n];
        const ModelDiagnostics d = model.diagnostics(z);
        const std::string t = format_number(trajectory.times[n]);
        for (std::size_t k = 0; k < model.segments(); ++k) {
            const double* b = z.data() + k * kBlock;
            out << t << ',' << k + 1 << ',' << format_number(model.geometry()[k].y_mid()) << ','
                << format_number(b[kTc]) << ',' << format_number(b[kTr]) << ',' << format_number(b[kTw]) << ','
                << format_number(b[kP]) << ',' << format_number(d.faces[k + 1].velocity) << ','
                << format_number(b[kUc]) << ',' << format_number(b[kUr]) << ',' << format_number(b[kUw]);
            for (std::size_t i = 0; i < kNumSpecies; ++i) {
                out << ',' << format_number(b[i]);
            }
            out << '\n';
        }
    }
}

void write_profiles(std::ostream& out, const CalcinerModel& model, std::span<const double> z)
{
    const SpeciesTable& table = model.thermo().table();
    out << "y[m],v[m/s],T_c[K]";
    for (std::size_t i = 0; i < kNumSpecies; ++i) {
        out << ',' << species_name(species_at(i)) << "[kg/s]";
    }
    out << ",solids[kg/s],gas[kg/s]\n";
    const ModelDiagnostics d = model.diagnostics(z);
    auto row = [&](double y, double v, double T, const SpeciesVector& molar) {
        out << format_number(y) << ',' << format_number(v) << ',' << format_number(T);
        double solids = 0.0;
        double gas = 0.0;
        for (std::size_t i = 0; i < kNumSpecies; ++i) {
            const double m = molar[i] * table.species()[i].molar_mass;
            (i < kNumSolids ? solids : gas) += m;
            out << ',' << format_number(m);
        }
        out << ',' << format_number(solids) << ',' << format_number(gas) << '\n';
    };
    row(0.0, 0.0, z[kTc], model.inlet_molar());
    for (std::size_t j = 1; j < d.faces.size(); ++j) {
        row(d.faces[j].y, d.faces[j].velocity, z[(j - 1) * kBlock + kTc], d.faces[j].molar);
    }
}

void write_summary(std::ostream& out, const Summary& s)
{
    out << "key,value,unit\n";
    auto line = [&](const std::string& key, double value, const char* unit) {
        out << key << ',' << format_number(value) << ',' << unit << '\n';
    };
    line("conversion_CaCO3", s.conversion, "%");
    line("outlet_temperature", s.outlet_temperature - 273.15, "degC");
    line("outlet_temperature_K", s.outlet_temperature, "K");
    line("outlet_velocity", s.outlet_velocity, "m/s");
    for (std::size_t i = kFirstGas; i < kNumSpecies; ++i) {
        line("x_wet_" + std::string(species_name(species_at(i))), s.wet_fractions[i], "mol%");
    }
    for (std::size_t i = kFirstGas; i < kNumSpecies; ++i) {
        if (species_at(i) != SpeciesId::H2O) {
            line("x_dry_" + std::string(species_name(species_at(i))), s.dry_fractions[i], "mol%");
        }
    }
    line("x_C_solid_per_gas", s.carbon_fraction, "mol%");
    line("heat_loss", s.heat_loss, "W");
    line("t_settle", s.t_settle, "s");
    line("steady", s.steady ? 1.0 : 0.0, "flag");
    line("final_time", s.final_time, "s");
}

void write_diagnostics(std::ostream& out, const Simulation& sim, const RunResult& result)
{
    const ScenarioSpec& spec = sim.spec();
    const CalcinerModel& model = sim.model();
    const SimulationResult& r = result.simulation;
    const SolverStats& st = r.stats;
    const auto f = format_number;

    out << "scenario " << spec.name << '\n';
    out << "mode " << run_mode_name(result.mode) << ", horizon " << f(result.t_end) << " s, segments "
        << model.segments() << '\n';
    out << "calibration";
    for (std::size_t j = 0; j < kNumReactions; ++j) {
        out << " r" << j + 1 << '=' << f(spec.calibration[j]);
    }
    out << '\n';
    const SolverConfig& c = spec.solver;
    out << "solver dt_init=" << f(c.dt_init) << " dt_min=" << f(c.dt_min) << " dt_max=" << f(c.dt_max)
        << " newton_tol=" << f(c.newton_tol) << " algebraic_tol=" << f(c.algebraic_tol)
        << " steady_state_tol=" << f(c.steady_state_tol)
        << " steady_norm=" << (c.steady_norm == SteadyNorm::Max ? "max" : "rms") << '\n';
    out << "steps accepted=" << st.steps << " rejected=" << st.rejected << " newton=" << st.newton_iterations
        << " jacobians=" << st.jacobians << " residuals=" << st.residuals << " dt_range=[" << f(st.min_dt) << ", "
        << f(st.max_dt) << "] s\n";
    if (r.steady) {
        out << "steady criterion first met at t=" << f(r.t_settle) << " s\n";
    } else {
        out << "steady criterion not met by t=" << f(r.final_time) << " s\n";
    }

    std::vector<double> raw(model.size());
    model.residual(r.final_time, r.final_state, raw);
    double g = 0.0;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (model.is_algebraic(i)) {
            g = std::max(g, std::abs(raw[i]));
        }
    }
    out << "final algebraic residual " << f(g) << '\n';

    const ModelDiagnostics d = model.diagnostics(r.final_state);
    const Inventory rate = model.inventory_rate(r.final_state);
    const auto in_el = element_totals(model.inlet_molar());
    const auto out_el = element_totals(d.faces.back().molar);
    const auto acc_el = element_totals(rate.moles);
    out << "element balance at final state (in, out, accumulation) mol/s\n";
    for (std::size_t e = 0; e < kNumElements; ++e) {
        out << "  " << element_name(static_cast<Element>(e)) << ' ' << f(in_el[e]) << ' ' << f(out_el[e]) << ' '
            << f(acc_el[e]) << '\n';
    }
    double loss = 0.0;
    for (const SegmentDiagnostics& s : d.segments) {
        loss += s.Q_we_cv + s.Q_we_rad;
    }
    out << "energy balance at final state W: inlet " << f(model.inlet_enthalpy()) << " outlet "
        << f(d.faces.back().enthalpy) << " loss " << f(loss) << " accumulation " << f(rate.energy) << '\n';

    const auto warnings = model.thermo().table().range_warnings();
    if (!warnings.empty()) {
        out << "heat capacity evaluated outside the declared range for:";
        for (SpeciesId s : warnings) {
            out << ' ' << species_name(s);
        }
        out << '\n';
    }

    out << "segment,y_mid[m],T_c[K],T_r[K],T_w[K],P[Pa],v[m/s],Re,Pr,Nu,beta_cr[W/m2K],eps_g,"
           "Q_cr_cv[W],Q_cr_rad[W],Q_rw[W],Q_we_cv[W],Q_we_rad[W],phi\n";
    for (std::size_t k = 0; k < d.segments.size(); ++k) {
        const SegmentDiagnostics& s = d.segments[k];
        out << k + 1 << ',' << f(model.geometry()[k].y_mid()) << ',' << f(s.T_c) << ',' << f(s.T_r) << ','
            << f(s.T_w) << ',' << f(s.P) << ',' << f(s.velocity) << ',' << f(s.convection.reynolds) << ','
            << f(s.convection.prandtl) << ',' << f(s.convection.nusselt) << ',' << f(s.beta_cr) << ','
            << f(s.eps_g) << ',' << f(s.Q_cr_cv) << ',' << f(s.Q_cr_rad) << ',' << f(s.Q_rw_cv) << ','
            << f(s.Q_we_cv) << ',' << f(s.Q_we_rad) << ',' << f(s.props.phi) << '\n';
    }
}

void write_report_bundle(const std::filesystem::path& directory, const Simulation& sim, const RunResult& result)
{
    std::error_code ec;
    std::filesystem::create_directories(directory, ec);
    if (ec) {
        throw ValidationError(directory.string() + ": cannot create output directory: " + ec.message());
    }
    auto open = [&](const char* name) {
        std::ofstream f(directory / name, std::ios::binary);
        if (!f) {
            throw ValidationError((directory / name).string() + ": cannot open for writing");
        }
        return f;
    };
    {
        auto f = open("timeseries.csv");
        write_timeseries(f, sim.model(), result.simulation.trajectory);
    }
    {
        auto f = open("profiles.csv");
        write_profiles(f, sim.model(), result.simulation.final_state);
    }
    {
        auto f = open("summary.csv");
        write_summary(f, result.summary);
    }
    {
        auto f = open("diagnostics.log");
        write_diagnostics(f, sim, result);
    }
}

} // namespace calciner

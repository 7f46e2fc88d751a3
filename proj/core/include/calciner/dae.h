#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace calciner {

/// Semi-explicit index-1 DAE  dx/dt = f(x, y),  0 = g(x, y)  with the
/// differential and algebraic unknowns interleaved in one vector z.
///
/// Unknowns come in consecutive blocks of block_size(); residual rows of
/// block k may only depend on blocks k - bandwidth .. k + bandwidth. The
/// Jacobian colouring relies on this.
class DaeSystem
{
public:
    virtual ~DaeSystem() = default;

    virtual std::size_t size() const = 0;
    virtual std::size_t block_size() const { return size(); }
    virtual std::size_t block_bandwidth() const { return 0; }
    virtual bool is_algebraic(std::size_t i) const = 0;

    /// out_i = f_i(z) on differential rows and the (scaled) g_i(z) on
    /// algebraic rows. Must be safe to call concurrently.
    virtual void residual(double t, std::span<const double> z, std::span<double> out) const = 0;

    /// Scale dividing differential rows of the implicit Euler residual.
    virtual double row_scale(std::size_t) const { return 1.0; }
    /// Absolute tolerance for Newton update weights.
    virtual double absolute_tolerance(std::size_t) const { return 1e-10; }
    /// Finite-difference step for column i at value v.
    virtual double perturbation(std::size_t, double v) const;
    /// Absolute floor for the steady-state scaling of differential component i.
    virtual double steady_floor(std::size_t) const { return 1.0; }

    /// Whether z may be accepted as the end point of a step.
    virtual bool admissible(std::span<const double>) const { return true; }

    /// Overwrite the algebraic components of z so that g(z) = 0. The default
    /// runs Newton on g with the differential components frozen.
    virtual void solve_algebraic(double t, std::span<double> z) const;
};

enum class SteadyNorm { Max, Rms };

struct SolverConfig
{
    double dt_init = 1e-3;
    double dt_min = 1e-10;
    double dt_max = 10.0;
    /// Infinity norm of the scaled implicit Euler residual on differential rows.
    double newton_tol = 1e-9;
    int newton_max_iter = 12;
    /// Relative tolerance of the Newton update test.
    double update_rtol = 1e-10;
    /// Infinity norm of the algebraic residual.
    double algebraic_tol = 1e-8;
    double steady_state_tol = 1e-5;
    SteadyNorm steady_norm = SteadyNorm::Max;
    /// Newton iterations between Jacobian refreshes.
    int jacobian_reuse = 5;
    double growth = 1.5;
    /// Consecutive easy steps required before growing dt.
    int growth_after = 3;
    /// Threads used for Jacobian column evaluation. Results do not depend on it.
    int workers = 1;

    /// Throws ValidationError on inconsistent settings.
    void validate() const;
};

struct SolverStats
{
    long steps = 0;
    long rejected = 0;
    long newton_iterations = 0;
    long jacobians = 0;
    long residuals = 0;
    double last_dt = 0.0;
    double min_dt = 0.0;
    double max_dt = 0.0;
};

struct Trajectory
{
    std::vector<double> times;
    std::vector<std::vector<double>> states;
    /// Scaled steady-state measure of dx/dt at each snapshot.
    std::vector<double> steady_measure;
};

struct SimulationResult
{
    Trajectory trajectory;
    std::vector<double> final_state;
    double final_time = 0.0;
    bool steady = false;
    /// First time the steady criterion held, negative if never.
    double t_settle = -1.0;
    SolverStats stats;
};

/// Fixed-order implicit Euler with damped modified Newton and a coloured
/// finite-difference Jacobian factorized by sparse LU.
class ImplicitEuler
{
public:
    ImplicitEuler(const DaeSystem& system, SolverConfig config);
    ~ImplicitEuler();
    ImplicitEuler(const ImplicitEuler&) = delete;
    ImplicitEuler& operator=(const ImplicitEuler&) = delete;

    const SolverConfig& config() const { return config_; }
    const SolverStats& stats() const { return stats_; }

    /// Solve for the algebraic components of z. Throws SolverError when the
    /// algebraic residual cannot be brought below algebraic_tol.
    void consistent_init(double t, std::vector<double>& z);

    /// Infinity norm of the algebraic residual rows.
    double algebraic_norm(double t, std::span<const double> z);

    /// One implicit Euler step of size dt from a consistent z. Returns false
    /// (z untouched) when Newton fails or the result is inadmissible.
    bool try_step(double t, std::vector<double>& z, double dt);

    /// Scaled steady-state measure of the rate (x_new - x_old)/dt.
    double steady_measure(std::span<const double> z_old, std::span<const double> z_new, double dt) const;

    /// Dense Jacobian of the raw residual at z, row-major. For testing.
    std::vector<double> residual_jacobian(double t, std::span<const double> z);

    using Observer = std::function<void(double t, std::span<const double> z)>;

    /// Integrate from (t0, z0) to t_end, storing snapshots every `cadence`
    /// seconds (and at the end). With stop_at_steady the run ends at the
    /// first time the steady criterion holds.
    SimulationResult simulate(double t0, std::vector<double> z0, double t_end, double cadence,
                              bool stop_at_steady = false, const Observer& on_step = nullptr);

    /// Solver workspace (Jacobian strips, factorization).
    struct Impl;

private:
    const DaeSystem* system_;
    SolverConfig config_;
    SolverStats stats_;
    std::unique_ptr<Impl> impl_;
};

} // namespace calciner

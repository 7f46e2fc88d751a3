#include "calciner/dae.h"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "calciner/error.h"

namespace calciner {

namespace {

constexpr double kSqrtEps = 1.4901161193847656e-8;

bool all_finite(std::span<const double> v)
{
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

std::string format_time(double t)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", t);
    return buf;
}

} // namespace

double DaeSystem::perturbation(std::size_t, double v) const
{
    return kSqrtEps * std::max(std::abs(v), 1.0);
}

void DaeSystem::solve_algebraic(double t, std::span<double> z) const
{
    const std::size_t n = size();
    std::vector<std::size_t> alg;
    for (std::size_t i = 0; i < n; ++i) {
        if (is_algebraic(i)) {
            alg.push_back(i);
        }
    }
    const auto m = static_cast<Eigen::Index>(alg.size());
    if (m == 0) {
        return;
    }
    std::vector<double> r(n);
    std::vector<double> rp(n);
    Eigen::MatrixXd J(m, m);
    Eigen::VectorXd g(m);
    for (int it = 0; it < 50; ++it) {
        residual(t, z, r);
        double norm = 0.0;
        for (Eigen::Index a = 0; a < m; ++a) {
            g[a] = r[alg[a]];
            norm = std::max(norm, std::abs(g[a]));
        }
        if (norm <= 1e-13) {
            return;
        }
        for (Eigen::Index b = 0; b < m; ++b) {
            const std::size_t j = alg[b];
            const double saved = z[j];
            const double h = perturbation(j, saved);
            z[j] = saved + h;
            residual(t, z, rp);
            z[j] = saved;
            for (Eigen::Index a = 0; a < m; ++a) {
                J(a, b) = (rp[alg[a]] - r[alg[a]]) / h;
            }
        }
        const Eigen::VectorXd d = J.partialPivLu().solve(-g);
        for (Eigen::Index b = 0; b < m; ++b) {
            z[alg[b]] += d[b];
        }
        if (d.lpNorm<Eigen::Infinity>() <= 1e-14 * (1.0 + Eigen::Map<const Eigen::VectorXd>(z.data(), z.size()).lpNorm<Eigen::Infinity>())) {
            return;
        }
    }
}

void SolverConfig::validate() const
{
    auto bad = [](const std::string& what) { throw ValidationError("solver: " + what); };
    if (!(dt_min > 0.0 && dt_min <= dt_init && dt_init <= dt_max)) {
        bad("require 0 < dt_min <= dt_init <= dt_max");
    }
    if (!(newton_tol > 0.0 && algebraic_tol > 0.0 && steady_state_tol > 0.0 && update_rtol > 0.0)) {
        bad("tolerances must be positive");
    }
    if (newton_max_iter < 1 || jacobian_reuse < 1 || growth_after < 1) {
        bad("newton_max_iter, jacobian_reuse and growth_after must be at least 1");
    }
    if (!(growth >= 1.0)) {
        bad("growth must be at least 1");
    }
    if (workers < 1) {
        bad("workers must be at least 1");
    }
}

struct ImplicitEuler::Impl
{
    using SparseMatrix = Eigen::SparseMatrix<double>;

    std::size_t n = 0;
    std::size_t block = 0;
    std::size_t nblocks = 0;
    std::size_t bandwidth = 0;
    std::size_t ncolors = 0;
    std::vector<std::vector<std::size_t>> colors;
    // Row range [lo, hi) of each column's possible nonzeros.
    std::vector<std::size_t> row_lo;
    std::vector<std::size_t> row_hi;
    // Column-wise strips of the raw residual Jacobian.
    std::vector<std::vector<double>> columns;
    std::vector<bool> algebraic;
    std::vector<double> scale;

    SparseMatrix matrix;
    Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
    bool analyzed = false;
    bool have_jacobian = false;
    int jacobian_age = 0;
    double factored_dt = -1.0;
    std::string last_failure;

    explicit Impl(const DaeSystem& sys)
    {
        n = sys.size();
        block = sys.block_size();
        if (block == 0 || n % block != 0) {
            throw ValidationError("dae system: size must be a multiple of the block size");
        }
        nblocks = n / block;
        bandwidth = sys.block_bandwidth();
        const std::size_t period = std::min(nblocks, 2 * bandwidth + 1);
        ncolors = period * block;
        colors.resize(ncolors);
        row_lo.resize(n);
        row_hi.resize(n);
        columns.resize(n);
        algebraic.resize(n);
        scale.resize(n);
        for (std::size_t j = 0; j < n; ++j) {
            const std::size_t b = j / block;
            colors[(b % period) * block + j % block].push_back(j);
            row_lo[j] = (b >= bandwidth ? b - bandwidth : 0) * block;
            row_hi[j] = std::min(nblocks, b + bandwidth + 1) * block;
            columns[j].assign(row_hi[j] - row_lo[j], 0.0);
            algebraic[j] = sys.is_algebraic(j);
            scale[j] = algebraic[j] ? 1.0 : sys.row_scale(j);
        }
        matrix.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    }
};

ImplicitEuler::ImplicitEuler(const DaeSystem& system, SolverConfig config)
    : system_(&system), config_(config), impl_(std::make_unique<Impl>(system))
{
    config_.validate();
}

ImplicitEuler::~ImplicitEuler() = default;

double ImplicitEuler::algebraic_norm(double t, std::span<const double> z)
{
    std::vector<double> r(impl_->n);
    system_->residual(t, z, r);
    ++stats_.residuals;
    double norm = 0.0;
    for (std::size_t i = 0; i < impl_->n; ++i) {
        if (impl_->algebraic[i]) {
            norm = std::max(norm, std::abs(r[i]));
        }
    }
    return norm;
}

void ImplicitEuler::consistent_init(double t, std::vector<double>& z)
{
    if (z.size() != impl_->n) {
        throw ValidationError("consistent_init: state has the wrong size");
    }
    system_->solve_algebraic(t, z);
    const double norm = algebraic_norm(t, z);
    if (!(norm <= config_.algebraic_tol)) {
        throw SolverError("consistent initialization left an algebraic residual of " + format_time(norm));
    }
}

double ImplicitEuler::steady_measure(std::span<const double> z_old, std::span<const double> z_new,
                                     double dt) const
{
    double max_q = 0.0;
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < impl_->n; ++i) {
        if (impl_->algebraic[i]) {
            continue;
        }
        const double q = std::abs(z_new[i] - z_old[i]) / dt / (std::abs(z_new[i]) + system_->steady_floor(i));
        max_q = std::max(max_q, q);
        sum += q * q;
        ++count;
    }
    if (config_.steady_norm == SteadyNorm::Max || count == 0) {
        return max_q;
    }
    return std::sqrt(sum / static_cast<double>(count));
}

namespace {

// Evaluates the coloured finite-difference Jacobian of the raw residual.
// Every column strip is written by exactly one worker, so the result is
// independent of the worker count.
void fd_jacobian(const DaeSystem& sys, ImplicitEuler::Impl& im, double t, std::span<const double> z,
                 std::span<const double> r0, int workers, long& residual_count)
{
    const std::size_t nw = std::min<std::size_t>(static_cast<std::size_t>(workers), im.ncolors);
    std::vector<std::exception_ptr> errors(nw);
    auto work = [&](std::size_t w) {
        try {
            std::vector<double> zp(z.begin(), z.end());
            std::vector<double> out(im.n);
            std::vector<double> h(im.n);
            for (std::size_t c = w; c < im.ncolors; c += nw) {
                for (std::size_t j : im.colors[c]) {
                    h[j] = sys.perturbation(j, z[j]);
                    zp[j] = z[j] + h[j];
                    h[j] = zp[j] - z[j];
                }
                sys.residual(t, zp, out);
                for (std::size_t j : im.colors[c]) {
                    auto& col = im.columns[j];
                    for (std::size_t r = im.row_lo[j]; r < im.row_hi[j]; ++r) {
                        col[r - im.row_lo[j]] = (out[r] - r0[r]) / h[j];
                    }
                    zp[j] = z[j];
                }
            }
        } catch (...) {
            errors[w] = std::current_exception();
        }
    };
    if (nw <= 1) {
        work(0);
    } else {
        std::vector<std::thread> threads;
        threads.reserve(nw - 1);
        for (std::size_t w = 1; w < nw; ++w) {
            threads.emplace_back(work, w);
        }
        work(0);
        for (auto& th : threads) {
            th.join();
        }
    }
    for (auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
    residual_count += static_cast<long>(im.ncolors);
}

void assemble_iteration_matrix(ImplicitEuler::Impl& im, double dt)
{
    std::vector<Eigen::Triplet<double>> trip;
    std::size_t nnz = 0;
    for (std::size_t j = 0; j < im.n; ++j) {
        nnz += im.columns[j].size();
    }
    trip.reserve(nnz);
    for (std::size_t j = 0; j < im.n; ++j) {
        const auto& col = im.columns[j];
        for (std::size_t r = im.row_lo[j]; r < im.row_hi[j]; ++r) {
            double v = col[r - im.row_lo[j]];
            if (!im.algebraic[r]) {
                v = ((r == j ? 1.0 : 0.0) - dt * v) / im.scale[r];
            }
            trip.emplace_back(static_cast<int>(r), static_cast<int>(j), v);
        }
    }
    im.matrix.setFromTriplets(trip.begin(), trip.end());
    if (!im.analyzed) {
        im.lu.analyzePattern(im.matrix);
        im.analyzed = true;
    }
    im.lu.factorize(im.matrix);
    if (im.lu.info() != Eigen::Success) {
        throw SolverError("iteration matrix is singular");
    }
    im.factored_dt = dt;
}

} // namespace

std::vector<double> ImplicitEuler::residual_jacobian(double t, std::span<const double> z)
{
    std::vector<double> r0(impl_->n);
    system_->residual(t, z, r0);
    ++stats_.residuals;
    fd_jacobian(*system_, *impl_, t, z, r0, config_.workers, stats_.residuals);
    ++stats_.jacobians;
    impl_->have_jacobian = true;
    impl_->jacobian_age = 0;
    impl_->factored_dt = -1.0;
    std::vector<double> dense(impl_->n * impl_->n, 0.0);
    for (std::size_t j = 0; j < impl_->n; ++j) {
        for (std::size_t r = impl_->row_lo[j]; r < impl_->row_hi[j]; ++r) {
            dense[r * impl_->n + j] = impl_->columns[j][r - impl_->row_lo[j]];
        }
    }
    return dense;
}

bool ImplicitEuler::try_step(double t, std::vector<double>& z, double dt)
{
    Impl& im = *impl_;
    const std::size_t n = im.n;
    const double t_new = t + dt;
    std::vector<double> zk = z;
    std::vector<double> raw(n);
    std::vector<double> F(n);
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(n));

    // Implicit Euler residual: scaled (x - x_old - dt f) and g.
    auto evaluate = [&](std::span<const double> zz) -> bool {
        try {
            system_->residual(t_new, zz, raw);
        } catch (const Error& e) {
            im.last_failure = e.what();
            ++stats_.residuals;
            return false;
        }
        ++stats_.residuals;
        for (std::size_t i = 0; i < n; ++i) {
            F[i] = im.algebraic[i] ? raw[i] : (zz[i] - z[i] - dt * raw[i]) / im.scale[i];
        }
        if (!all_finite(F)) {
            im.last_failure = "non-finite residual";
            return false;
        }
        return true;
    };
    auto norms = [&]() {
        double fd = 0.0;
        double ga = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double& target = im.algebraic[i] ? ga : fd;
            target = std::max(target, std::abs(F[i]));
        }
        return std::pair{fd, ga};
    };
    auto refresh = [&]() {
        // The Jacobian is taken of the raw residual at the current iterate.
        fd_jacobian(*system_, im, t_new, zk, raw, config_.workers, stats_.residuals);
        ++stats_.jacobians;
        im.have_jacobian = true;
        im.jacobian_age = 0;
        im.factored_dt = -1.0;
    };

    if (!evaluate(zk)) {
        im.jacobian_age = config_.jacobian_reuse;
        return false;
    }
    {
        auto [fd, ga] = norms();
        if (fd <= config_.newton_tol && ga <= config_.algebraic_tol && system_->admissible(zk)) {
            stats_.last_dt = dt;
            return true;
        }
    }

    double previous_update = std::numeric_limits<double>::infinity();
    // Jacobian generation used for the previous update, and whether that
    // Jacobian was evaluated during this step.
    long jacobian_generation = 0;
    long previous_generation = -1;
    bool fresh = false;
    try {
        for (int iter = 0; iter < config_.newton_max_iter; ++iter) {
            ++stats_.newton_iterations;
            if (!im.have_jacobian || im.jacobian_age >= config_.jacobian_reuse) {
                refresh();
                ++jacobian_generation;
                fresh = true;
            }
            if (im.factored_dt != dt) {
                assemble_iteration_matrix(im, dt);
            }
            for (std::size_t i = 0; i < n; ++i) {
                rhs[static_cast<Eigen::Index>(i)] = -F[i];
            }
            const Eigen::VectorXd delta = im.lu.solve(rhs);
            ++im.jacobian_age;

            double update = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double w = system_->absolute_tolerance(i) + config_.update_rtol * std::abs(zk[i]);
                update = std::max(update, std::abs(delta[static_cast<Eigen::Index>(i)]) / w);
            }
            if (!std::isfinite(update)) {
                im.last_failure = "non-finite Newton update";
                im.jacobian_age = config_.jacobian_reuse;
                return false;
            }

            double lambda = 1.0;
            std::vector<double> trial(n);
            bool ok = false;
            for (int ls = 0; ls < 6; ++ls) {
                for (std::size_t i = 0; i < n; ++i) {
                    trial[i] = zk[i] + lambda * delta[static_cast<Eigen::Index>(i)];
                }
                if (evaluate(trial)) {
                    ok = true;
                    break;
                }
                lambda *= 0.5;
            }
            if (!ok) {
                im.jacobian_age = config_.jacobian_reuse;
                return false;
            }
            zk.swap(trial);

            auto [fd, ga] = norms();
            const bool small_update = lambda == 1.0 && update <= 1.0;
            if (ga <= config_.algebraic_tol && (fd <= config_.newton_tol || small_update)) {
                if (!system_->admissible(zk)) {
                    im.last_failure = "inadmissible state (negative concentration)";
                    return false;
                }
                z.swap(zk);
                stats_.last_dt = dt;
                return true;
            }
            const bool same_jacobian = previous_generation == jacobian_generation;
            if (same_jacobian && update > 0.9 * previous_update && fresh) {
                im.last_failure = "Newton iteration stalled";
                im.jacobian_age = config_.jacobian_reuse;
                return false;
            }
            if (same_jacobian && update > 0.5 * previous_update) {
                // Slow contraction with an old Jacobian: re-evaluate at the current iterate.
                im.jacobian_age = config_.jacobian_reuse;
            }
            previous_update = update;
            previous_generation = jacobian_generation;
        }
    } catch (const Error& e) {
        im.last_failure = e.what();
        im.jacobian_age = config_.jacobian_reuse;
        return false;
    }
    im.last_failure = "Newton iteration limit reached";
    im.jacobian_age = config_.jacobian_reuse;
    return false;
}

SimulationResult ImplicitEuler::simulate(double t0, std::vector<double> z0, double t_end, double cadence,
                                         bool stop_at_steady, const Observer& on_step)
{
    SimulationResult res;
    consistent_init(t0, z0);
    std::vector<double> z = std::move(z0);
    double t = t0;
    double dt = config_.dt_init;
    stats_.min_dt = std::numeric_limits<double>::infinity();
    stats_.max_dt = 0.0;

    auto record = [&](double time, double measure) {
        res.trajectory.times.push_back(time);
        res.trajectory.states.push_back(z);
        res.trajectory.steady_measure.push_back(measure);
    };
    record(t, std::numeric_limits<double>::quiet_NaN());
    if (on_step) {
        on_step(t, z);
    }

    long out_index = 1;
    auto next_output = [&]() {
        return cadence > 0.0 ? std::min(t0 + static_cast<double>(out_index) * cadence, t_end) : t_end;
    };
    int easy = 0;
    std::vector<double> trial;
    while (t < t_end) {
        const double target = next_output();
        double h = std::min(dt, target - t);
        bool lands = h >= target - t;
        // Avoid leaving a sliver before an output time.
        if (!lands && target - t - h < 1e-3 * h) {
            h = target - t;
            lands = true;
        }
        trial = z;
        const long iters_before = stats_.newton_iterations;
        if (!try_step(t, trial, h)) {
            ++stats_.rejected;
            dt = 0.5 * h;
            easy = 0;
            if (dt < config_.dt_min) {
                throw SolverError("step size fell below dt_min at t = " + format_time(t) +
                                  " s; last failure: " + impl_->last_failure);
            }
            continue;
        }
        const double measure = steady_measure(z, trial, h);
        z.swap(trial);
        t = lands ? target : t + h;
        ++stats_.steps;
        stats_.min_dt = std::min(stats_.min_dt, h);
        stats_.max_dt = std::max(stats_.max_dt, h);
        if (stats_.newton_iterations - iters_before <= 3) {
            if (++easy >= config_.growth_after) {
                dt = std::min(dt * config_.growth, config_.dt_max);
                easy = 0;
            }
        } else {
            easy = 0;
        }
        const bool now_steady = measure <= config_.steady_state_tol;
        if (now_steady && !res.steady) {
            res.steady = true;
            res.t_settle = t;
        }
        if (on_step) {
            on_step(t, z);
        }
        const bool stop = stop_at_steady && now_steady;
        if ((lands && cadence > 0.0) || t >= t_end || stop) {
            record(t, measure);
            ++out_index;
        }
        if (stop) {
            break;
        }
    }
    if (res.trajectory.times.back() != t) {
        record(t, std::numeric_limits<double>::quiet_NaN());
    }
    res.final_state = z;
    res.final_time = t;
    res.stats = stats_;
    return res;
}

} // namespace calciner

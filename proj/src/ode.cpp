#include "mcnf/ode.hpp"

#include <algorithm>
#include <cmath>

#include "mcnf/errors.hpp"

namespace mcnf {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
// b (5th order) minus b* (4th order): error weights.
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

bool all_finite(std::span<const double> v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

}  // namespace

IntegrateStats integrate(const Dynamics& dynamics, std::span<double> y, double t0, double t1,
                         const SolverConfig& cfg, const StepHook& hook) {
    if (t0 == t1) throw SolverError("integrate: empty time interval");
    if (cfg.rtol <= 0.0 || cfg.atol <= 0.0) throw SolverError("integrate: tolerances must be > 0");

    const std::size_t n = y.size();
    const double dir = (t1 > t0) ? 1.0 : -1.0;
    double t = t0;
    double h = dir * std::min(std::abs(cfg.h_init), std::abs(t1 - t0));

    std::vector<double> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), ynew(n);
    IntegrateStats stats;

    while (dir * (t1 - t) > 0.0) {
        if (stats.n_steps + stats.n_rejected >= cfg.max_steps)
            throw SolverError("integrate: max_steps exceeded");
        if (std::abs(h) < cfg.h_min) throw SolverError("integrate: step size underflow");
        if (std::abs(h) > std::abs(t1 - t)) h = t1 - t;

        dynamics(t, y, k1);
        if (!all_finite(k1)) throw SolverError("integrate: non-finite derivative");
        for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h * a21 * k1[i];
        dynamics(t + c2 * h, ytmp, k2);
        for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
        dynamics(t + c3 * h, ytmp, k3);
        for (std::size_t i = 0; i < n; ++i)
            ytmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        dynamics(t + c4 * h, ytmp, k4);
        for (std::size_t i = 0; i < n; ++i)
            ytmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        dynamics(t + c5 * h, ytmp, k5);
        for (std::size_t i = 0; i < n; ++i)
            ytmp[i] =
                y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
        dynamics(t + h, ytmp, k6);
        for (std::size_t i = 0; i < n; ++i)
            ynew[i] =
                y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
        dynamics(t + h, ynew, k7);

        // scaled RMS error over the embedded 4th-order difference
        double err = 0.0;
        bool finite = all_finite(ynew);
        if (finite) {
            for (std::size_t i = 0; i < n; ++i) {
                const double ei = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                                       e6 * k6[i] + e7 * k7[i]);
                const double scale = cfg.atol + cfg.rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
                err += (ei / scale) * (ei / scale);
            }
            err = std::sqrt(err / static_cast<double>(n));
        }

        if (!finite || !std::isfinite(err)) {
            // a trial stage left the representable range; retry smaller
            ++stats.n_rejected;
            h *= 0.2;
            continue;
        }

        if (err <= 1.0) {
            t += h;
            std::copy(ynew.begin(), ynew.end(), y.begin());
            if (hook) hook(t, y);
            ++stats.n_steps;
        } else {
            ++stats.n_rejected;
        }
        const double factor =
            (err == 0.0) ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
        h *= factor;
    }
    return stats;
}

FlowResult forward_flow(const FlowField& ff, const Point& x0, double logp0,
                        const SolverConfig& cfg, const FlowOptions& opts) {
    const int dim = ff.spec.ambient_dim();
    const int mg = ff.spec.gen_count();

    FieldWorkspace ws;
    ws.resize(ff.spec, ff.params.arch);

    std::vector<double> probes;
    if (opts.mode == DivergenceMode::Estimate) {
        if (!opts.rng) throw Error("forward_flow: Estimate mode needs an rng");
        if (opts.n_probes < 1) throw Error("forward_flow: n_probes must be >= 1");
        probes.resize(static_cast<std::size_t>(opts.n_probes) * mg);
        for (double& e : probes) e = opts.rng->rademacher();
    }

    std::vector<double> y(dim + 1);
    std::copy(x0.coords.begin(), x0.coords.end(), y.begin());
    y[dim] = logp0;

    std::vector<double> vel(dim);
    Dynamics dyn = [&](double t, std::span<const double> s, std::span<double> dy) {
        auto x = s.first(dim);
        double div;
        if (opts.mode == DivergenceMode::Exact) {
            velocity(ff, t, x, std::span<double>(dy.data(), dim), ws);
            div = divergence_exact(ff, t, x, ws);
        } else {
            div = 0.0;
            for (int k = 0; k < opts.n_probes; ++k) {
                div += divergence_probe(ff, t, x,
                                        std::span<const double>(probes.data() + k * mg, mg),
                                        std::span<double>(dy.data(), dim), ws);
            }
            div /= opts.n_probes;
        }
        dy[dim] = -div;
    };
    StepHook hook = [&](double, std::span<double> s) {
        retract_in_place(ff.spec, s.first(dim));
    };

    IntegrateStats stats = integrate(dyn, y, opts.t0, opts.t1, cfg, hook);

    FlowResult out;
    out.point.spec = ff.spec;
    out.point.coords.assign(y.begin(), y.begin() + dim);
    out.delta_logp = y[dim] - logp0;
    out.n_steps = stats.n_steps;
    out.n_rejected = stats.n_rejected;
    return out;
}

AdjointResult backward_adjoint(const FlowField& ff, const Point& x1, const Vec& a_x1, double a_l1,
                               const SolverConfig& cfg) {
    const int dim = ff.spec.ambient_dim();
    const std::size_t np = ff.params.arch.param_count;

    FieldWorkspace ws;
    ws.resize(ff.spec, ff.params.arch);

    // state: [x, l, a_x, a_l, g_theta]
    std::vector<double> y(2 * dim + 2 + np, 0.0);
    std::copy(x1.coords.begin(), x1.coords.end(), y.begin());
    y[dim] = 0.0;
    std::copy(a_x1.begin(), a_x1.end(), y.begin() + dim + 1);
    y[2 * dim + 1] = a_l1;

    Dynamics dyn = [&](double t, std::span<const double> s, std::span<double> dy) {
        auto x = s.first(dim);
        auto a_x = s.subspan(dim + 1, dim);
        const double a_l = s[2 * dim + 1];
        double div = adjoint_rhs(ff, t, x, a_x, a_l, std::span<double>(dy.data(), dim),
                                 std::span<double>(dy.data() + dim + 1, dim),
                                 std::span<double>(dy.data() + 2 * dim + 2, np), ws);
        dy[dim] = -div;
        dy[2 * dim + 1] = 0.0;
        // contraction signs put the true adjoint equations at -1 times the
        // returned values
        for (int a = 0; a < dim; ++a) dy[dim + 1 + a] = -dy[dim + 1 + a];
        for (std::size_t p = 0; p < np; ++p) dy[2 * dim + 2 + p] = -dy[2 * dim + 2 + p];
    };
    // SPD trajectories keep the positivity guard while running backwards.
    StepHook hook;
    if (ff.spec.kind == ManifoldKind::Spd)
        hook = [&](double, std::span<double> s) { retract_in_place(ff.spec, s.first(dim)); };

    IntegrateStats stats = integrate(dyn, y, 1.0, 0.0, cfg, hook);

    AdjointResult out;
    out.grad_params.g.assign(y.begin() + 2 * dim + 2, y.end());
    out.grad_x0.assign(y.begin() + dim + 1, y.begin() + 2 * dim + 1);
    out.n_steps = stats.n_steps;
    return out;
}

}  // namespace mcnf

#pragma once

#include <functional>
#include <span>
#include <vector>

#include "mcnf/field.hpp"
#include "mcnf/manifold.hpp"
#include "mcnf/net.hpp"
#include "mcnf/rng.hpp"

namespace mcnf {

struct SolverConfig {
    double rtol = 1e-6;
    double atol = 1e-6;
    double h_init = 0.1;
    double h_min = 1e-10;
    int max_steps = 100000;  // accepted + rejected attempts
};

struct IntegrateStats {
    int n_steps = 0;  // accepted
    int n_rejected = 0;
};

using Dynamics = std::function<void(double t, std::span<const double> y, std::span<double> dydt)>;
using StepHook = std::function<void(double t, std::span<double> y)>;

/// Adaptive Dormand-Prince 5(4). Error per component is scaled by
/// atol + rtol * |y|, a step is accepted when the RMS of the scaled error
/// is <= 1, and the step factor is 0.9 * err^(-1/5) clamped to [0.2, 5].
/// The hook runs on accepted states (projection); hook exceptions abort
/// the trajectory. Integrates in either time direction.
IntegrateStats integrate(const Dynamics& dynamics, std::span<double> y, double t0, double t1,
                         const SolverConfig& cfg, const StepHook& hook = {});

enum class DivergenceMode { Exact, Estimate };

struct FlowOptions {
    DivergenceMode mode = DivergenceMode::Exact;
    int n_probes = 1;
    Rng* rng = nullptr;  // probe source, required in Estimate mode
    double t0 = 0.0;
    double t1 = 1.0;
};

struct FlowResult {
    Point point;
    double delta_logp = 0.0;
    int n_steps = 0;
    int n_rejected = 0;
};

/// Integrate the augmented state (x, l) with x' = X_t(x), l' = -div X_t
/// over [t0, t1]; the retraction hook keeps x on the manifold. Returns the
/// transported point and the accumulated log-density change l(t1) - logp0.
/// In Estimate mode the Rademacher probes are drawn once and held fixed
/// along the trajectory (one probe set per sample).
FlowResult forward_flow(const FlowField& ff, const Point& x0, double logp0,
                        const SolverConfig& cfg, const FlowOptions& opts = {});

struct AdjointResult {
    ParamGrad grad_params;
    Vec grad_x0;
    int n_steps = 0;
};

/// Integrate the augmented adjoint system from t = 1 to t = 0, recomputing
/// x backwards alongside (x, l, a_x, a_l, g_theta):
///   x' = X_t(x), l' = -div, a_x' = -[(dY/dx)^T a_x - a_l dg/dx], a_l' = 0,
///   g_theta' = -[(dY/dtheta)^T a_x - a_l dg/dtheta].
/// Returns g_theta(0) (the loss gradient) and a_x(0).
AdjointResult backward_adjoint(const FlowField& ff, const Point& x1, const Vec& a_x1, double a_l1,
                               const SolverConfig& cfg);

}  // namespace mcnf

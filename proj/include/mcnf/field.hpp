#pragma once

#include <span>
#include <vector>

#include "mcnf/manifold.hpp"
#include "mcnf/net.hpp"
#include "mcnf/rng.hpp"

namespace mcnf {

/// Time-dependent vector field X_t = sum_i f_i(t, .) X_i assembled from a
/// manifold's generating set and the coefficient network.
struct FlowField {
    ManifoldSpec spec;
    MlpParams params;
};

/// Scratch for one thread evaluating a field and its adjoint contractions.
struct FieldWorkspace {
    NetWorkspace net;
    std::vector<double> f;        // network output, gen_count
    std::vector<double> gens;     // generator stack, gen_count x D
    std::vector<double> divs;     // generator divergences, gen_count
    std::vector<double> rows;     // cotangent rows for jacobian contraction
    std::vector<double> tmp_v;      // probe direction / misc D-vector
    std::vector<double> tmp_u;      // gen_count-vector
    std::vector<double> gx_full;    // input_dim accumulator
    std::vector<double> gdiv_theta;  // dg/dtheta accumulator
    void resize(const ManifoldSpec& spec, const MlpArch& arch);
};

/// X_t(x) = sum_i f_i(t, x) X_i(x); result is tangent at on-manifold x.
/// The checked overload enforces the constraint precondition.
void velocity(const FlowField& ff, double t, std::span<const double> x, std::span<double> out,
              FieldWorkspace& ws);
Vec velocity(const FlowField& ff, double t, const Vec& x);

/// Exact divergence sum_i df_i(X_i) + sum_i f_i div(X_i): one dual sweep
/// per generator.
double divergence_exact(const FlowField& ff, double t, std::span<const double> x,
                        FieldWorkspace& ws);
double divergence_exact(const FlowField& ff, double t, const Vec& x);

/// Hutchinson-style estimate with a supplied probe (entries +-1): one dual
/// sweep total; also returns the velocity for free.
double divergence_probe(const FlowField& ff, double t, std::span<const double> x,
                        std::span<const double> probe, std::span<double> vel_out,
                        FieldWorkspace& ws);

/// Monte Carlo divergence estimate, n_probes Rademacher draws from rng.
double divergence_estimate(const FlowField& ff, double t, const Vec& x, Rng& rng, int n_probes);

/// Contractions feeding the cotangent-lift (adjoint) system. With the
/// ambient extension Y(t,x) = sum f_i X_i(x) and g = divergence_exact:
///   da_x     = (dY/dx)^T a_x - a_l * dg/dx
///   g_params = (dY/dtheta)^T a_x - a_l * dg/dtheta
/// so that a_x' = -da_x, g_theta' = -g_params integrate the adjoint of the
/// forward system (x' = Y, l' = -g). dx_dot returns Y, div_out returns g.
struct AdjointContractions {
    Vec dx_dot;
    Vec da_x;
    ParamGrad g_params;
};
AdjointContractions adjoint_contractions(const FlowField& ff, double t, const Vec& x,
                                         const Vec& a_x, double a_l);

/// Workspace form writing into caller buffers; returns the divergence g.
double adjoint_rhs(const FlowField& ff, double t, std::span<const double> x,
                   std::span<const double> a_x, double a_l, std::span<double> vel_out,
                   std::span<double> da_x_out, std::span<double> g_params_out,
                   FieldWorkspace& ws);

}  // namespace mcnf

#include "mcnf/field.hpp"

#include <algorithm>
#include <cmath>

#include "mcnf/errors.hpp"

namespace mcnf {

namespace {

constexpr double kVelocityConstraintTol = 1e-6;

void eval_all_generators(const ManifoldSpec& spec, std::span<const double> x,
                         std::vector<double>& gens) {
    const int mg = spec.gen_count();
    const int dim = spec.ambient_dim();
    for (int i = 0; i < mg; ++i)
        eval_generator(spec, x, i, std::span<double>(gens.data() + i * dim, dim));
}

}  // namespace

void FieldWorkspace::resize(const ManifoldSpec& spec, const MlpArch& arch) {
    const int mg = spec.gen_count();
    const int dim = spec.ambient_dim();
    net.resize(arch);
    f.assign(mg, 0.0);
    gens.assign(static_cast<std::size_t>(mg) * dim, 0.0);
    divs.assign(mg, 0.0);
    rows.assign(static_cast<std::size_t>(mg) * dim, 0.0);
    tmp_v.assign(dim, 0.0);
    tmp_u.assign(mg, 0.0);
    gx_full.assign(arch.input_dim, 0.0);
    gdiv_theta.assign(arch.param_count, 0.0);
}

void velocity(const FlowField& ff, double t, std::span<const double> x, std::span<double> out,
              FieldWorkspace& ws) {
    const int mg = ff.spec.gen_count();
    const int dim = ff.spec.ambient_dim();
    auto f = nw_forward(ff.params, t, x, ws.net);
    eval_all_generators(ff.spec, x, ws.gens);
    std::fill(out.begin(), out.end(), 0.0);
    for (int i = 0; i < mg; ++i) {
        const double fi = f[i];
        const double* gi = ws.gens.data() + static_cast<std::size_t>(i) * dim;
        for (int a = 0; a < dim; ++a) out[a] += fi * gi[a];
    }
}

Vec velocity(const FlowField& ff, double t, const Vec& x) {
    if (constraint_residual(ff.spec, x) > kVelocityConstraintTol)
        throw OffManifoldError("velocity: state violates the manifold constraint");
    FieldWorkspace ws;
    ws.resize(ff.spec, ff.params.arch);
    Vec out(ff.spec.ambient_dim());
    velocity(ff, t, x, out, ws);
    return out;
}

double divergence_exact(const FlowField& ff, double t, std::span<const double> x,
                        FieldWorkspace& ws) {
    const int mg = ff.spec.gen_count();
    const int dim = ff.spec.ambient_dim();
    auto f = nw_forward(ff.params, t, x, ws.net);
    eval_all_generators(ff.spec, x, ws.gens);
    generator_divergences(ff.spec, x, ws.divs);
    double div = 0.0;
    for (int i = 0; i < mg; ++i) {
        auto df = nw_jvp(
            ff.params,
            std::span<const double>(ws.gens.data() + static_cast<std::size_t>(i) * dim, dim),
            ws.net);
        div += df[i] + f[i] * ws.divs[i];
    }
    return div;
}

double divergence_exact(const FlowField& ff, double t, const Vec& x) {
    FieldWorkspace ws;
    ws.resize(ff.spec, ff.params.arch);
    return divergence_exact(ff, t, x, ws);
}

double divergence_probe(const FlowField& ff, double t, std::span<const double> x,
                        std::span<const double> probe, std::span<double> vel_out,
                        FieldWorkspace& ws) {
    const int mg = ff.spec.gen_count();
    const int dim = ff.spec.ambient_dim();
    auto f = nw_forward(ff.params, t, x, ws.net);
    eval_all_generators(ff.spec, x, ws.gens);
    generator_divergences(ff.spec, x, ws.divs);

    std::fill(vel_out.begin(), vel_out.end(), 0.0);
    std::fill(ws.tmp_v.begin(), ws.tmp_v.end(), 0.0);
    double div = 0.0;
    for (int i = 0; i < mg; ++i) {
        const double fi = f[i];
        const double ei = probe[i];
        const double* gi = ws.gens.data() + static_cast<std::size_t>(i) * dim;
        for (int a = 0; a < dim; ++a) {
            vel_out[a] += fi * gi[a];
            ws.tmp_v[a] += ei * gi[a];
        }
        div += fi * ws.divs[i];
    }
    auto df = nw_jvp(ff.params, ws.tmp_v, ws.net);
    for (int i = 0; i < mg; ++i) div += probe[i] * df[i];
    return div;
}

double divergence_estimate(const FlowField& ff, double t, const Vec& x, Rng& rng, int n_probes) {
    if (n_probes < 1) throw Error("divergence_estimate: n_probes must be >= 1");
    FieldWorkspace ws;
    ws.resize(ff.spec, ff.params.arch);
    const int mg = ff.spec.gen_count();
    Vec probe(mg), vel(ff.spec.ambient_dim());
    double acc = 0.0;
    for (int k = 0; k < n_probes; ++k) {
        for (double& e : probe) e = rng.rademacher();
        acc += divergence_probe(ff, t, x, probe, vel, ws);
    }
    return acc / n_probes;
}

double adjoint_rhs(const FlowField& ff, double t, std::span<const double> x,
                   std::span<const double> a_x, double a_l, std::span<double> vel_out,
                   std::span<double> da_x_out, std::span<double> g_params_out,
                   FieldWorkspace& ws) {
    const int mg = ff.spec.gen_count();
    const int dim = ff.spec.ambient_dim();
    const std::size_t np = ff.params.arch.param_count;
    const bool need_div_grad = (a_l != 0.0);

    auto f = nw_forward(ff.params, t, x, ws.net);
    eval_all_generators(ff.spec, x, ws.gens);
    generator_divergences(ff.spec, x, ws.divs);

    // velocity and the cotangent u_i = <X_i, a_x>
    std::fill(vel_out.begin(), vel_out.end(), 0.0);
    for (int i = 0; i < mg; ++i) {
        const double fi = f[i];
        const double* gi = ws.gens.data() + static_cast<std::size_t>(i) * dim;
        double dot = 0.0;
        for (int a = 0; a < dim; ++a) {
            vel_out[a] += fi * gi[a];
            dot += gi[a] * a_x[a];
        }
        ws.tmp_u[i] = dot;
    }

    std::fill(da_x_out.begin(), da_x_out.end(), 0.0);
    std::fill(g_params_out.begin(), g_params_out.begin() + np, 0.0);

    // (dY/dx)^T a_x part 1: sum_i grad f_i <X_i, a_x>; the same sweep
    // yields (dY/dtheta)^T a_x.
    std::fill(ws.gx_full.begin(), ws.gx_full.end(), 0.0);
    nw_vjp_accum(ff.params, ws.tmp_u, ws.net, ws.gx_full, g_params_out);
    for (int a = 0; a < dim; ++a) da_x_out[a] += ws.gx_full[a + 1];

    // (dY/dx)^T a_x part 2: sum_i f_i (dX_i/dx)^T a_x (closed forms)
    for (int i = 0; i < mg; ++i) {
        const double fi = f[i];
        double* row = ws.rows.data() + static_cast<std::size_t>(i) * dim;
        for (int a = 0; a < dim; ++a) row[a] = fi * a_x[a];
    }
    generator_jacobian_transpose_sum(ff.spec, x, ws.rows.data(), da_x_out);

    // Divergence g = sum_i df_i(X_i) + sum_i f_i d_i and, when a_l != 0,
    // its gradients. The x-gradient of the first term splits into the
    // Hessian contraction (X_i frozen) and sum_i (dX_i/dx)^T grad f_i.
    double div = 0.0;
    std::fill(ws.gx_full.begin(), ws.gx_full.end(), 0.0);
    if (need_div_grad) std::fill(ws.gdiv_theta.begin(), ws.gdiv_theta.end(), 0.0);
    for (int i = 0; i < mg; ++i) {
        auto gi = std::span<const double>(ws.gens.data() + static_cast<std::size_t>(i) * dim, dim);
        auto df = nw_jvp(ff.params, gi, ws.net);
        div += df[i] + f[i] * ws.divs[i];
        if (!need_div_grad) continue;
        ws.tmp_u.assign(mg, 0.0);
        ws.tmp_u[i] = 1.0;
        nw_grad_of_jvp_accum(ff.params, ws.tmp_u, ws.net, ws.gx_full, ws.gdiv_theta);
    }
    if (!need_div_grad) return div;

    std::vector<double>& gdiv_x = ws.tmp_v;  // ambient dg/dx accumulator
    std::copy(ws.gx_full.begin() + 1, ws.gx_full.end(), gdiv_x.begin());

    // rows of df/dx contracted with the generator jacobians
    for (int i = 0; i < mg; ++i) {
        ws.tmp_u.assign(mg, 0.0);
        ws.tmp_u[i] = 1.0;
        std::fill(ws.gx_full.begin(), ws.gx_full.end(), 0.0);
        nw_vjp_accum(ff.params, ws.tmp_u, ws.net, ws.gx_full, std::span<double>());
        double* row = ws.rows.data() + static_cast<std::size_t>(i) * dim;
        for (int a = 0; a < dim; ++a) row[a] = ws.gx_full[a + 1];
    }
    generator_jacobian_transpose_sum(ff.spec, x, ws.rows.data(), gdiv_x);

    // sum_i d_i grad f_i (x and theta parts) and sum_i f_i grad d_i
    std::fill(ws.gx_full.begin(), ws.gx_full.end(), 0.0);
    nw_vjp_accum(ff.params, ws.divs, ws.net, ws.gx_full, ws.gdiv_theta);
    for (int a = 0; a < dim; ++a) gdiv_x[a] += ws.gx_full[a + 1];
    generator_divergence_gradient_sum(ff.spec, x, f, gdiv_x);

    for (int a = 0; a < dim; ++a) da_x_out[a] -= a_l * gdiv_x[a];
    for (std::size_t p = 0; p < np; ++p) g_params_out[p] -= a_l * ws.gdiv_theta[p];
    return div;
}

AdjointContractions adjoint_contractions(const FlowField& ff, double t, const Vec& x,
                                         const Vec& a_x, double a_l) {
    FieldWorkspace ws;
    ws.resize(ff.spec, ff.params.arch);
    AdjointContractions out;
    out.dx_dot.assign(ff.spec.ambient_dim(), 0.0);
    out.da_x.assign(ff.spec.ambient_dim(), 0.0);
    out.g_params.g.assign(ff.params.arch.param_count, 0.0);
    adjoint_rhs(ff, t, x, a_x, a_l, out.dx_dot, out.da_x, out.g_params.g, ws);
    return out;
}

}  // namespace mcnf

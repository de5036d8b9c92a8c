#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mcnf/manifold.hpp"
#include "mcnf/rng.hpp"

namespace mcnf {

enum class Activation { Tanh, Linear };

struct LayerSpec {
    int in = 0;
    int out = 0;
    Activation act = Activation::Linear;
    std::size_t w_off = 0;  // offset of the (out x in) row-major weight block
    std::size_t b_off = 0;  // offset of the bias block
};

struct MlpArch {
    int input_dim = 0;
    std::vector<LayerSpec> layers;
    std::size_t param_count = 0;

    int output_dim() const { return layers.empty() ? input_dim : layers.back().out; }

    /// Coefficient network used throughout: (D+1) -> 5m -> 5m -> m with
    /// tanh hidden activations and a linear read-out.
    static MlpArch standard(const ManifoldSpec& spec);

    /// Arbitrary stack (test fixtures: constant nets, single linear layers).
    static MlpArch custom(int input_dim, const std::vector<std::pair<int, Activation>>& layers);

    bool operator==(const MlpArch& o) const;
};

/// Network parameters stored as one flat vector; layer blocks are located
/// through the architecture offsets. Flat storage keeps Adam, checkpoints
/// and finite-difference probing trivial.
struct MlpParams {
    MlpArch arch;
    std::vector<double> theta;
};

struct ParamGrad {
    std::vector<double> g;
};

/// Glorot-uniform weights, zero biases, final layer scaled by 0.01 so the
/// initial flow stays near the identity.
MlpParams net_init(const ManifoldSpec& spec, Rng& rng);
MlpParams net_init(const MlpArch& arch, Rng& rng);

void net_forward(const MlpParams& p, double t, std::span<const double> x, std::span<double> f_out);

struct JvpResult {
    std::vector<double> f;
    std::vector<double> df_v;  // (df/dx) v, time direction fixed to 0
};
JvpResult net_jvp(const MlpParams& p, double t, std::span<const double> x,
                  std::span<const double> v);

struct VjpResult {
    std::vector<double> grad_x;  // (df/dx)^T u
    double grad_t = 0.0;
    ParamGrad grad_params;  // (df/dtheta)^T u
};
VjpResult net_vjp(const MlpParams& p, double t, std::span<const double> x,
                  std::span<const double> u);

/// Gradients with respect to x and theta of s = <u, (df/dx) v> with u, v
/// held constant (reverse sweep over the forward-dual computation).
struct JvpGradResult {
    std::vector<double> grad_x;
    ParamGrad grad_params;
};
JvpGradResult net_grad_of_jvp(const MlpParams& p, double t, std::span<const double> x,
                              std::span<const double> v, std::span<const double> u);

// ---- workspace interface used by the field/adjoint hot path ----

/// Per-thread scratch holding the activation caches for one network.
struct NetWorkspace {
    std::vector<std::vector<double>> z;      // z[0] = input, z[l] = layer output
    std::vector<std::vector<double>> dz;     // dual (directional) chain
    std::vector<std::vector<double>> zbar;   // value-chain adjoints
    std::vector<std::vector<double>> dzbar;  // dual-chain adjoints
    void resize(const MlpArch& arch);
};

/// Forward pass caching activations in ws.z; returns span of the output.
std::span<const double> nw_forward(const MlpParams& p, double t, std::span<const double> x,
                                   NetWorkspace& ws);

/// Dual forward pass (requires nw_forward first); fills ws.dz. The returned
/// span is (df/dx) v.
std::span<const double> nw_jvp(const MlpParams& p, std::span<const double> v, NetWorkspace& ws);

/// Reverse sweep accumulating (df/dx)^T u into gx_full (input_dim entries,
/// slot 0 = time) and (df/dtheta)^T u into gp (param_count entries). Either
/// destination may be empty to skip it. Requires nw_forward first.
void nw_vjp_accum(const MlpParams& p, std::span<const double> u, NetWorkspace& ws,
                  std::span<double> gx_full, std::span<double> gp);

/// Reverse sweep over the dual computation: accumulates the gradients of
/// s = <u, (df/dx) v> using the dual chain currently in ws (nw_forward and
/// nw_jvp must have run).
void nw_grad_of_jvp_accum(const MlpParams& p, std::span<const double> u, NetWorkspace& ws,
                          std::span<double> gx_full, std::span<double> gp);

// ---- checkpoint serialization ----

/// Binary checkpoint: "MCNF" magic, u32 header length, JSON header
/// (architecture, manifold, seed), then the flat little-endian f64 stream.
void save_checkpoint(const std::string& path, const MlpParams& p, const ManifoldSpec& spec,
                     std::uint64_t seed);
MlpParams load_checkpoint(const std::string& path, ManifoldSpec* spec_out = nullptr,
                          std::uint64_t* seed_out = nullptr);

}  // namespace mcnf

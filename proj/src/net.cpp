#include "mcnf/net.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "mcnf/errors.hpp"
#include "mcnf/io.hpp"

#include "json.hpp"

namespace mcnf {

namespace {

void layer_apply(const LayerSpec& l, const double* theta, const double* in, double* out) {
    const double* w = theta + l.w_off;
    const double* b = theta + l.b_off;
    for (int r = 0; r < l.out; ++r) {
        double s = b[r];
        const double* wr = w + static_cast<std::size_t>(r) * l.in;
        for (int c = 0; c < l.in; ++c) s += wr[c] * in[c];
        out[r] = s;
    }
}

// out = W^T in, accumulated
void layer_apply_transposed(const LayerSpec& l, const double* theta, const double* in,
                            double* out) {
    const double* w = theta + l.w_off;
    std::fill(out, out + l.in, 0.0);
    for (int r = 0; r < l.out; ++r) {
        const double* wr = w + static_cast<std::size_t>(r) * l.in;
        const double v = in[r];
        for (int c = 0; c < l.in; ++c) out[c] += v * wr[c];
    }
}

}  // namespace

MlpArch MlpArch::standard(const ManifoldSpec& spec) {
    const int d = spec.ambient_dim();
    const int m = spec.gen_count();
    return custom(d + 1, {{5 * m, Activation::Tanh}, {5 * m, Activation::Tanh},
                          {m, Activation::Linear}});
}

MlpArch MlpArch::custom(int input_dim, const std::vector<std::pair<int, Activation>>& layers) {
    MlpArch arch;
    arch.input_dim = input_dim;
    std::size_t off = 0;
    int in = input_dim;
    for (const auto& [out, act] : layers) {
        LayerSpec l;
        l.in = in;
        l.out = out;
        l.act = act;
        l.w_off = off;
        off += static_cast<std::size_t>(out) * in;
        l.b_off = off;
        off += out;
        arch.layers.push_back(l);
        in = out;
    }
    arch.param_count = off;
    return arch;
}

bool MlpArch::operator==(const MlpArch& o) const {
    if (input_dim != o.input_dim || layers.size() != o.layers.size()) return false;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        if (layers[i].in != o.layers[i].in || layers[i].out != o.layers[i].out ||
            layers[i].act != o.layers[i].act)
            return false;
    }
    return true;
}

MlpParams net_init(const ManifoldSpec& spec, Rng& rng) {
    return net_init(MlpArch::standard(spec), rng);
}

MlpParams net_init(const MlpArch& arch, Rng& rng) {
    MlpParams p{arch, std::vector<double>(arch.param_count, 0.0)};
    for (std::size_t li = 0; li < arch.layers.size(); ++li) {
        const LayerSpec& l = arch.layers[li];
        const double bound = std::sqrt(6.0 / (l.in + l.out));
        const double scale = (li + 1 == arch.layers.size()) ? 0.01 : 1.0;
        for (int i = 0; i < l.out * l.in; ++i)
            p.theta[l.w_off + i] = scale * rng.uniform(-bound, bound);
        // biases stay zero
    }
    return p;
}

void NetWorkspace::resize(const MlpArch& arch) {
    const std::size_t depth = arch.layers.size() + 1;
    auto fit = [&](std::vector<std::vector<double>>& buf) {
        buf.resize(depth);
        buf[0].assign(arch.input_dim, 0.0);
        for (std::size_t l = 0; l < arch.layers.size(); ++l)
            buf[l + 1].assign(arch.layers[l].out, 0.0);
    };
    fit(z);
    fit(dz);
    fit(zbar);
    fit(dzbar);
}

std::span<const double> nw_forward(const MlpParams& p, double t, std::span<const double> x,
                                   NetWorkspace& ws) {
    if (ws.z.size() != p.arch.layers.size() + 1 ||
        ws.z[0].size() != static_cast<std::size_t>(p.arch.input_dim))
        ws.resize(p.arch);
    ws.z[0][0] = t;
    std::copy(x.begin(), x.end(), ws.z[0].begin() + 1);
    for (std::size_t l = 0; l < p.arch.layers.size(); ++l) {
        const LayerSpec& ls = p.arch.layers[l];
        layer_apply(ls, p.theta.data(), ws.z[l].data(), ws.z[l + 1].data());
        if (ls.act == Activation::Tanh)
            for (double& v : ws.z[l + 1]) v = std::tanh(v);
    }
    return ws.z.back();
}

std::span<const double> nw_jvp(const MlpParams& p, std::span<const double> v, NetWorkspace& ws) {
    ws.dz[0][0] = 0.0;  // time direction fixed to zero
    std::copy(v.begin(), v.end(), ws.dz[0].begin() + 1);
    for (std::size_t l = 0; l < p.arch.layers.size(); ++l) {
        const LayerSpec& ls = p.arch.layers[l];
        const double* w = p.theta.data() + ls.w_off;
        for (int r = 0; r < ls.out; ++r) {
            double s = 0.0;
            const double* wr = w + static_cast<std::size_t>(r) * ls.in;
            for (int c = 0; c < ls.in; ++c) s += wr[c] * ws.dz[l][c];
            ws.dz[l + 1][r] = s;
        }
        if (ls.act == Activation::Tanh)
            for (int r = 0; r < ls.out; ++r) {
                const double zv = ws.z[l + 1][r];
                ws.dz[l + 1][r] *= (1.0 - zv * zv);
            }
    }
    return ws.dz.back();
}

void nw_vjp_accum(const MlpParams& p, std::span<const double> u, NetWorkspace& ws,
                  std::span<double> gx_full, std::span<double> gp) {
    const auto& layers = p.arch.layers;
    std::copy(u.begin(), u.end(), ws.zbar.back().begin());
    for (std::size_t l = layers.size(); l-- > 0;) {
        const LayerSpec& ls = layers[l];
        std::vector<double>& bar = ws.zbar[l + 1];
        if (ls.act == Activation::Tanh)
            for (int r = 0; r < ls.out; ++r) {
                const double zv = ws.z[l + 1][r];
                bar[r] *= (1.0 - zv * zv);
            }
        if (!gp.empty()) {
            double* gw = gp.data() + ls.w_off;
            double* gb = gp.data() + ls.b_off;
            for (int r = 0; r < ls.out; ++r) {
                const double br = bar[r];
                gb[r] += br;
                double* gwr = gw + static_cast<std::size_t>(r) * ls.in;
                const double* zl = ws.z[l].data();
                for (int c = 0; c < ls.in; ++c) gwr[c] += br * zl[c];
            }
        }
        layer_apply_transposed(ls, p.theta.data(), bar.data(), ws.zbar[l].data());
    }
    if (!gx_full.empty())
        for (int c = 0; c < p.arch.input_dim; ++c) gx_full[c] += ws.zbar[0][c];
}

void nw_grad_of_jvp_accum(const MlpParams& p, std::span<const double> u, NetWorkspace& ws,
                          std::span<double> gx_full, std::span<double> gp) {
    const auto& layers = p.arch.layers;
    // seeds: s = <u, dz_L>; the value chain enters only through tanh factors
    std::copy(u.begin(), u.end(), ws.dzbar.back().begin());
    std::fill(ws.zbar.back().begin(), ws.zbar.back().end(), 0.0);
    for (std::size_t l = layers.size(); l-- > 0;) {
        const LayerSpec& ls = layers[l];
        std::vector<double>& zb = ws.zbar[l + 1];    // adjoint of z_{l+1}
        std::vector<double>& dzb = ws.dzbar[l + 1];  // adjoint of dz_{l+1}
        // peel the activation: z = phi(a), dz = phi'(a) (.) da
        // abar  = phi' zb + phi'' da dzb,   dabar = phi' dzb
        // For tanh, phi' = 1 - z^2 and phi'' = -2 z phi'; da is recovered
        // from the stored dz as dz / phi'.
        if (ls.act == Activation::Tanh) {
            for (int r = 0; r < ls.out; ++r) {
                const double zv = ws.z[l + 1][r];
                const double d1 = 1.0 - zv * zv;
                const double dzv = ws.dz[l + 1][r];  // = phi' * da
                const double abar = d1 * zb[r] - 2.0 * zv * dzv * dzb[r];
                const double dabar = d1 * dzb[r];
                zb[r] = abar;
                dzb[r] = dabar;
            }
        }
        if (!gp.empty()) {
            double* gw = gp.data() + ls.w_off;
            double* gb = gp.data() + ls.b_off;
            const double* zl = ws.z[l].data();
            const double* dzl = ws.dz[l].data();
            for (int r = 0; r < ls.out; ++r) {
                const double ab = zb[r];
                const double dab = dzb[r];
                gb[r] += ab;
                double* gwr = gw + static_cast<std::size_t>(r) * ls.in;
                for (int c = 0; c < ls.in; ++c) gwr[c] += ab * zl[c] + dab * dzl[c];
            }
        }
        layer_apply_transposed(ls, p.theta.data(), zb.data(), ws.zbar[l].data());
        layer_apply_transposed(ls, p.theta.data(), dzb.data(), ws.dzbar[l].data());
    }
    if (!gx_full.empty())
        for (int c = 0; c < p.arch.input_dim; ++c) gx_full[c] += ws.zbar[0][c];
}

void net_forward(const MlpParams& p, double t, std::span<const double> x,
                 std::span<double> f_out) {
    NetWorkspace ws;
    auto f = nw_forward(p, t, x, ws);
    std::copy(f.begin(), f.end(), f_out.begin());
}

JvpResult net_jvp(const MlpParams& p, double t, std::span<const double> x,
                  std::span<const double> v) {
    NetWorkspace ws;
    auto f = nw_forward(p, t, x, ws);
    auto df = nw_jvp(p, v, ws);
    return {std::vector<double>(f.begin(), f.end()), std::vector<double>(df.begin(), df.end())};
}

VjpResult net_vjp(const MlpParams& p, double t, std::span<const double> x,
                  std::span<const double> u) {
    NetWorkspace ws;
    nw_forward(p, t, x, ws);
    VjpResult r;
    r.grad_params.g.assign(p.arch.param_count, 0.0);
    std::vector<double> gx_full(p.arch.input_dim, 0.0);
    nw_vjp_accum(p, u, ws, gx_full, r.grad_params.g);
    r.grad_t = gx_full[0];
    r.grad_x.assign(gx_full.begin() + 1, gx_full.end());
    return r;
}

JvpGradResult net_grad_of_jvp(const MlpParams& p, double t, std::span<const double> x,
                              std::span<const double> v, std::span<const double> u) {
    NetWorkspace ws;
    nw_forward(p, t, x, ws);
    nw_jvp(p, v, ws);
    JvpGradResult r;
    r.grad_params.g.assign(p.arch.param_count, 0.0);
    std::vector<double> gx_full(p.arch.input_dim, 0.0);
    nw_grad_of_jvp_accum(p, u, ws, gx_full, r.grad_params.g);
    r.grad_x.assign(gx_full.begin() + 1, gx_full.end());
    return r;
}

void save_checkpoint(const std::string& path, const MlpParams& p, const ManifoldSpec& spec,
                     std::uint64_t seed) {
    nlohmann::ordered_json header;
    header["manifold"] = spec.to_string();
    if (spec.kind == ManifoldKind::Spd) header["wishart_dof"] = spec.wishart_dof;
    header["input_dim"] = p.arch.input_dim;
    nlohmann::ordered_json layers = nlohmann::ordered_json::array();
    for (const LayerSpec& l : p.arch.layers) {
        layers.push_back({{"out", l.out}, {"act", l.act == Activation::Tanh ? "tanh" : "linear"}});
    }
    header["layers"] = layers;
    header["seed"] = seed;
    header["param_count"] = p.arch.param_count;
    std::string head = header.dump();

    std::string blob;
    blob.reserve(8 + head.size() + 8 * p.theta.size());
    blob += "MCNF";
    std::uint32_t hlen = static_cast<std::uint32_t>(head.size());
    char lenbuf[4];
    std::memcpy(lenbuf, &hlen, 4);
    if constexpr (std::endian::native == std::endian::big) std::reverse(lenbuf, lenbuf + 4);
    blob.append(lenbuf, 4);
    blob += head;
    for (double v : p.theta) {
        char buf[8];
        std::memcpy(buf, &v, 8);
        if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + 8);
        blob.append(buf, 8);
    }
    atomic_write_file(path, blob);
}

MlpParams load_checkpoint(const std::string& path, ManifoldSpec* spec_out,
                          std::uint64_t* seed_out) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open checkpoint: " + path);
    std::string all((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (all.size() < 8 || all.compare(0, 4, "MCNF") != 0)
        throw Error("bad checkpoint magic: " + path);
    std::uint32_t hlen;
    std::memcpy(&hlen, all.data() + 4, 4);
    if constexpr (std::endian::native == std::endian::big) {
        char* p = reinterpret_cast<char*>(&hlen);
        std::reverse(p, p + 4);
    }
    if (all.size() < 8 + hlen) throw Error("truncated checkpoint header: " + path);
    nlohmann::json header = nlohmann::json::parse(all.substr(8, hlen));

    ManifoldSpec spec = ManifoldSpec::parse(header.at("manifold").get<std::string>());
    if (header.contains("wishart_dof")) spec.wishart_dof = header["wishart_dof"].get<double>();
    std::vector<std::pair<int, Activation>> layers;
    for (const auto& l : header.at("layers"))
        layers.emplace_back(l.at("out").get<int>(), l.at("act").get<std::string>() == "tanh"
                                                        ? Activation::Tanh
                                                        : Activation::Linear);
    MlpArch arch = MlpArch::custom(header.at("input_dim").get<int>(), layers);
    if (arch.param_count != header.at("param_count").get<std::size_t>())
        throw Error("checkpoint parameter count mismatch: " + path);

    const std::size_t need = 8 + hlen + 8 * arch.param_count;
    if (all.size() < need) throw Error("truncated checkpoint payload: " + path);
    MlpParams p{arch, std::vector<double>(arch.param_count)};
    for (std::size_t i = 0; i < arch.param_count; ++i) {
        char buf[8];
        std::memcpy(buf, all.data() + 8 + hlen + 8 * i, 8);
        if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + 8);
        std::memcpy(&p.theta[i], buf, 8);
    }
    if (spec_out) *spec_out = spec;
    if (seed_out && header.contains("seed")) *seed_out = header["seed"].get<std::uint64_t>();
    return p;
}

}  // namespace mcnf

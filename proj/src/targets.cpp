#include "mcnf/targets.hpp"

#include <algorithm>
#include <cmath>

#include "mcnf/densemat.hpp"
#include "mcnf/errors.hpp"

namespace mcnf {

namespace {

double logsumexp(const std::vector<double>& v) {
    double m = *std::max_element(v.begin(), v.end());
    double s = 0.0;
    for (double x : v) s += std::exp(x - m);
    return m + std::log(s);
}

// trace divisor of the Langevin family: the frame count, with m := n-1 on SO(n)
double langevin_divisor(const ManifoldSpec& spec) {
    return spec.kind == ManifoldKind::Stiefel ? spec.m : spec.n - 1;
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double component_log_density(const TargetSpec& ts, const ManifoldSpec& spec,
                             std::span<const double> q, std::span<const double> w) {
    switch (ts.family) {
        case TargetFamily::VonMisesFisher:
            return ts.beta * dot(w, q);
        case TargetFamily::Langevin:
            return ts.beta / langevin_divisor(spec) * dot(w, q);
        case TargetFamily::UnitaryTrace:
            // Re tr(W^H Q) is the real dot product of the (re, im) stacks
            return ts.beta / spec.n * dot(w, q);
        case TargetFamily::Wishart: {
            RealMatrix qm = sym_from_upper(spec.n, q);
            RealMatrix wm = sym_from_upper(spec.n, w);
            RealMatrix winv = spd_inverse(wm);
            double tr = 0.0;
            for (int i = 0; i < spec.n; ++i)
                for (int j = 0; j < spec.n; ++j) tr += winv(i, j) * qm(j, i);
            return 0.5 * ts.beta * (spd_log_det(qm) - spd_log_det(wm)) - 0.5 * tr;
        }
        default:
            throw Error("component_log_density: family has no mixture components");
    }
}

void component_gradient(const TargetSpec& ts, const ManifoldSpec& spec, std::span<const double> q,
                        std::span<const double> w, double weight, std::span<double> out) {
    switch (ts.family) {
        case TargetFamily::VonMisesFisher: {
            for (std::size_t a = 0; a < out.size(); ++a) out[a] += weight * ts.beta * w[a];
            return;
        }
        case TargetFamily::Langevin: {
            const double s = ts.beta / langevin_divisor(spec);
            for (std::size_t a = 0; a < out.size(); ++a) out[a] += weight * s * w[a];
            return;
        }
        case TargetFamily::UnitaryTrace: {
            const double s = ts.beta / spec.n;
            for (std::size_t a = 0; a < out.size(); ++a) out[a] += weight * s * w[a];
            return;
        }
        case TargetFamily::Wishart: {
            // d/du logdet Q and d/du tr(W^-1 Q) over the triangle coordinates
            const int n = spec.n;
            RealMatrix qm = sym_from_upper(n, q);
            RealMatrix wm = sym_from_upper(n, w);
            RealMatrix qinv = spd_inverse(qm);
            RealMatrix winv = spd_inverse(wm);
            for (int a = 0; a < n; ++a)
                for (int b = a; b < n; ++b) {
                    const double mult = (a == b) ? 1.0 : 2.0;
                    const double g =
                        0.5 * ts.beta * mult * qinv(a, b) - 0.5 * mult * winv(a, b);
                    out[upper_index(n, a, b)] += weight * g;
                }
            return;
        }
        default:
            throw Error("component_gradient: family has no mixture components");
    }
}

ComplexMatrix matrix_power_sum(const ComplexMatrix& u, const std::vector<double>& c) {
    // sum_j (j+1) c_{j+1} U^j, i.e. the derivative weights of sum c_j U^j
    const std::size_t n = u.rows();
    ComplexMatrix acc(n, n);
    ComplexMatrix pw = ComplexMatrix::identity(n);
    for (std::size_t j = 0; j < c.size(); ++j) {
        const double wj = (j + 1) * c[j];
        for (std::size_t i = 0; i < acc.re.data.size(); ++i) {
            acc.re.data[i] += wj * pw.re.data[i];
            acc.im.data[i] += wj * pw.im.data[i];
        }
        if (j + 1 < c.size()) pw = matmul(pw, u);
    }
    return acc;
}

}  // namespace

std::string family_to_string(TargetFamily f) {
    switch (f) {
        case TargetFamily::VonMisesFisher: return "vmf";
        case TargetFamily::Langevin: return "langevin";
        case TargetFamily::UnitaryTrace: return "unitary_trace";
        case TargetFamily::Wishart: return "wishart";
        case TargetFamily::ConjugationInvariant: return "conjugation_invariant";
        case TargetFamily::Uniform: return "uniform";
    }
    throw Error("family_to_string: bad family");
}

TargetFamily family_from_string(const std::string& s) {
    if (s == "vmf") return TargetFamily::VonMisesFisher;
    if (s == "langevin") return TargetFamily::Langevin;
    if (s == "unitary_trace") return TargetFamily::UnitaryTrace;
    if (s == "wishart") return TargetFamily::Wishart;
    if (s == "conjugation_invariant") return TargetFamily::ConjugationInvariant;
    if (s == "uniform") return TargetFamily::Uniform;
    throw ConfigError("unknown target family '" + s + "'");
}

void validate_target(const TargetSpec& ts, const ManifoldSpec& spec) {
    if (ts.family == TargetFamily::Uniform) return;
    if (ts.beta <= 0.0) throw ConfigError("target: beta must be > 0");
    auto require_kind = [&](bool ok) {
        if (!ok)
            throw ConfigError("target: family " + family_to_string(ts.family) +
                              " does not match manifold " + spec.to_string());
    };
    switch (ts.family) {
        case TargetFamily::VonMisesFisher:
            require_kind(spec.kind == ManifoldKind::Sphere);
            break;
        case TargetFamily::Langevin:
            require_kind(spec.kind == ManifoldKind::SpecialOrthogonal ||
                         spec.kind == ManifoldKind::Stiefel);
            break;
        case TargetFamily::UnitaryTrace:
            require_kind(spec.kind == ManifoldKind::Unitary ||
                         spec.kind == ManifoldKind::SpecialUnitary);
            break;
        case TargetFamily::Wishart: {
            require_kind(spec.kind == ManifoldKind::Spd);
            double beta_int;
            if (std::modf(ts.beta, &beta_int) != 0.0 || ts.beta < spec.n + 1)
                throw ConfigError("target: wishart requires integer beta >= n+1");
            break;
        }
        case TargetFamily::ConjugationInvariant:
            require_kind(spec.kind == ManifoldKind::SpecialUnitary);
            if (ts.c.empty()) throw ConfigError("target: conjugation_invariant needs coefficients c");
            break;
        case TargetFamily::Uniform:
            break;
    }
    if (ts.family != TargetFamily::ConjugationInvariant) {
        if (ts.k < 1) throw ConfigError("target: k must be >= 1");
        if (static_cast<int>(ts.centers.size()) != ts.k)
            throw ConfigError("target: expected k centers");
        for (const Point& w : ts.centers) {
            if (!(w.spec == spec)) throw ConfigError("target: center on the wrong manifold");
            if (check_constraint(w) > 1e-8) throw ConfigError("target: invalid center");
        }
    }
}

double log_target(const TargetSpec& ts, const Point& q) {
    const ManifoldSpec& spec = q.spec;
    switch (ts.family) {
        case TargetFamily::Uniform:
            return 0.0;
        case TargetFamily::ConjugationInvariant: {
            ComplexMatrix u = complex_matrix_from_coords(spec, q.coords);
            ComplexMatrix pw = ComplexMatrix::identity(spec.n);
            double re_tr = 0.0;
            for (std::size_t j = 0; j < ts.c.size(); ++j) {
                pw = matmul(pw, u);
                for (int a = 0; a < spec.n; ++a) re_tr += ts.c[j] * pw.re(a, a);
            }
            return ts.beta / spec.n * re_tr;
        }
        default: {
            std::vector<double> comps(ts.centers.size());
            for (std::size_t i = 0; i < ts.centers.size(); ++i)
                comps[i] = component_log_density(ts, spec, q.coords, ts.centers[i].coords);
            return logsumexp(comps);
        }
    }
}

Vec grad_log_target(const TargetSpec& ts, const Point& q) {
    const ManifoldSpec& spec = q.spec;
    Vec out(spec.ambient_dim(), 0.0);
    switch (ts.family) {
        case TargetFamily::Uniform:
            return out;
        case TargetFamily::ConjugationInvariant: {
            ComplexMatrix u = complex_matrix_from_coords(spec, q.coords);
            // gradient of Re tr(sum_j c_j U^j) is (sum_j j c_j U^{j-1})^H
            ComplexMatrix g = conj_transpose(matrix_power_sum(u, ts.c));
            const double s = ts.beta / spec.n;
            for (std::size_t i = 0; i < g.re.data.size(); ++i) {
                out[i] = s * g.re.data[i];
                out[g.re.data.size() + i] = s * g.im.data[i];
            }
            return out;
        }
        default: {
            std::vector<double> comps(ts.centers.size());
            for (std::size_t i = 0; i < ts.centers.size(); ++i)
                comps[i] = component_log_density(ts, spec, q.coords, ts.centers[i].coords);
            const double lse = logsumexp(comps);
            for (std::size_t i = 0; i < ts.centers.size(); ++i) {
                const double weight = std::exp(comps[i] - lse);
                component_gradient(ts, spec, q.coords, ts.centers[i].coords, weight, out);
            }
            return out;
        }
    }
}

std::vector<Point> sample_centers(const ManifoldSpec& spec, TargetFamily family, int k,
                                  double beta, Rng& rng) {
    if (family == TargetFamily::ConjugationInvariant || family == TargetFamily::Uniform)
        return {};
    std::vector<Point> centers;
    if (spec.kind == ManifoldKind::Spd) {
        // the fixed experiment centers W_i = (1/beta) W_hat_i
        std::vector<std::vector<double>> base;
        if (spec.n == 2) {
            base = {{1, 0, 2}, {2, 0, 1}, {1, 1, 2}, {2, -1, 1}};
        } else if (spec.n == 3) {
            base = {{2, 0, 0, 1, 0, 1}, {1, 0, 0, 2, 0, 1}, {1, 0, 0, 1, 0, 2},
                    {2, 0, 0, 2, 0, 2}};
        } else {
            throw ConfigError("sample_centers: no fixed spd centers for n > 3");
        }
        if (k > static_cast<int>(base.size()))
            throw ConfigError("sample_centers: at most 4 spd centers available");
        for (int i = 0; i < k; ++i) {
            Point w{spec, Vec(base[i].begin(), base[i].end())};
            for (double& v : w.coords) v /= beta;
            centers.push_back(std::move(w));
        }
        return centers;
    }
    for (int i = 0; i < k; ++i) centers.push_back(sample_base(spec, rng));
    return centers;
}

}  // namespace mcnf

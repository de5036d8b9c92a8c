#include "mcnf/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdlib>

#include "mcnf/errors.hpp"

namespace mcnf {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;
constexpr double kLn2 = 0.69314718055994530941723212145817657;

// Retraction returns its input unchanged when the state is already on the
// manifold to machine precision, which makes it bit-for-bit idempotent.
constexpr double kIdempotencyTol = 1e-14;
constexpr double kTrustRegion = 0.1;
constexpr double kSpdPivotGuard = 1e-10;

int pair_count(int n) { return n * (n - 1) / 2; }

// Pairs (k, j), k < j, enumerated in reverse lexicographic order, matching
// the printed so(3) basis: v1 ~ (1,2), v2 ~ (0,2), v3 ~ (0,1).
std::pair<int, int> pair_from_index(int n, int i) {
    int lex = pair_count(n) - 1 - i;
    for (int k = 0; k < n - 1; ++k) {
        int row = n - 1 - k;
        if (lex < row) return {k, k + 1 + lex};
        lex -= row;
    }
    std::abort();  // unreachable for valid i
}

void require_index(const ManifoldSpec& spec, int i) {
    if (i < 0 || i >= spec.gen_count()) throw Error("generator index out of range");
}

std::pair<int, int> matrix_dims(const ManifoldSpec& spec) {
    switch (spec.kind) {
        case ManifoldKind::Stiefel: return {spec.n, spec.m};
        default: return {spec.n, spec.n};
    }
}

double vec_norm(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
}

// Multivariate log gamma: log Gamma_n(a).
double log_multigamma(int n, double a) {
    double s = 0.25 * n * (n - 1) * std::log(kPi);
    for (int j = 1; j <= n; ++j) s += std::lgamma(a - 0.5 * (j - 1));
    return s;
}

// Smallest Cholesky pivot of sym(u); returns -inf on total failure.
double min_cholesky_pivot(int n, std::span<const double> u) {
    RealMatrix q = sym_from_upper(n, u);
    RealMatrix l(n, n);
    double min_piv = std::numeric_limits<double>::infinity();
    for (int j = 0; j < n; ++j) {
        double d = q(j, j);
        for (int k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
        min_piv = std::min(min_piv, d);
        if (d <= 0.0) return min_piv;
        l(j, j) = std::sqrt(d);
        for (int i = j + 1; i < n; ++i) {
            double s = q(i, j);
            for (int k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            l(i, j) = s / l(j, j);
        }
    }
    return min_piv;
}

}  // namespace

int upper_index(int n, int i, int j) { return i * n - i * (i - 1) / 2 + (j - i); }

RealMatrix sym_from_upper(int n, std::span<const double> u) {
    RealMatrix s(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            double v = u[upper_index(n, i, j)];
            s(i, j) = v;
            s(j, i) = v;
        }
    return s;
}

void upper_from_sym(const RealMatrix& s, std::span<double> out) {
    const int n = static_cast<int>(s.rows);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) out[upper_index(n, i, j)] = s(i, j);
}

int ManifoldSpec::ambient_dim() const {
    switch (kind) {
        case ManifoldKind::Sphere: return n + 1;
        case ManifoldKind::SpecialOrthogonal: return n * n;
        case ManifoldKind::Unitary:
        case ManifoldKind::SpecialUnitary: return 2 * n * n;
        case ManifoldKind::Stiefel: return n * m;
        case ManifoldKind::Spd: return n * (n + 1) / 2;
        case ManifoldKind::Euclidean: return n;
    }
    std::abort();
}

int ManifoldSpec::gen_count() const {
    switch (kind) {
        case ManifoldKind::Sphere: return n + 1;
        case ManifoldKind::SpecialOrthogonal: return pair_count(n);
        case ManifoldKind::Unitary: return n * n;
        case ManifoldKind::SpecialUnitary: return n * n - 1;
        case ManifoldKind::Stiefel: return pair_count(n);
        case ManifoldKind::Spd: return n * n;
        case ManifoldKind::Euclidean: return n;
    }
    std::abort();
}

int ManifoldSpec::intrinsic_dim() const {
    switch (kind) {
        case ManifoldKind::Sphere: return n;
        case ManifoldKind::SpecialOrthogonal: return pair_count(n);
        case ManifoldKind::Unitary: return n * n;
        case ManifoldKind::SpecialUnitary: return n * n - 1;
        case ManifoldKind::Stiefel: return n * m - m * (m + 1) / 2;
        case ManifoldKind::Spd: return n * (n + 1) / 2;
        case ManifoldKind::Euclidean: return n;
    }
    std::abort();
}

ManifoldSpec ManifoldSpec::parse(const std::string& s) {
    auto split = [](const std::string& str) {
        std::vector<std::string> parts;
        std::size_t pos = 0;
        while (pos <= str.size()) {
            std::size_t next = str.find(':', pos);
            if (next == std::string::npos) next = str.size();
            parts.push_back(str.substr(pos, next - pos));
            pos = next + 1;
        }
        return parts;
    };
    auto parts = split(s);
    auto to_int = [&](const std::string& p) {
        std::size_t used = 0;
        int v = 0;
        try {
            v = std::stoi(p, &used);
        } catch (const std::exception&) {
            throw ConfigError("manifold: bad size parameter in '" + s + "'");
        }
        if (used != p.size() || v <= 0) throw ConfigError("manifold: bad size parameter in '" + s + "'");
        return v;
    };
    ManifoldSpec spec;
    const std::string& name = parts[0];
    if (name == "stiefel") {
        if (parts.size() != 3) throw ConfigError("manifold: expected stiefel:m:n");
        spec.kind = ManifoldKind::Stiefel;
        spec.m = to_int(parts[1]);
        spec.n = to_int(parts[2]);
        if (spec.m >= spec.n) throw ConfigError("manifold: stiefel requires m < n");
        return spec;
    }
    if (parts.size() != 2) throw ConfigError("manifold: expected kind:n in '" + s + "'");
    int n = to_int(parts[1]);
    spec.n = n;
    if (name == "sphere") {
        spec.kind = ManifoldKind::Sphere;
    } else if (name == "so") {
        spec.kind = ManifoldKind::SpecialOrthogonal;
        if (n < 2) throw ConfigError("manifold: so requires n >= 2");
    } else if (name == "u") {
        spec.kind = ManifoldKind::Unitary;
    } else if (name == "su") {
        spec.kind = ManifoldKind::SpecialUnitary;
        if (n < 2) throw ConfigError("manifold: su requires n >= 2");
    } else if (name == "spd") {
        spec.kind = ManifoldKind::Spd;
    } else if (name == "euclidean") {
        spec.kind = ManifoldKind::Euclidean;
    } else {
        throw ConfigError("manifold: unknown kind '" + name + "'");
    }
    return spec;
}

std::string ManifoldSpec::to_string() const {
    switch (kind) {
        case ManifoldKind::Sphere: return "sphere:" + std::to_string(n);
        case ManifoldKind::SpecialOrthogonal: return "so:" + std::to_string(n);
        case ManifoldKind::Unitary: return "u:" + std::to_string(n);
        case ManifoldKind::SpecialUnitary: return "su:" + std::to_string(n);
        case ManifoldKind::Stiefel:
            return "stiefel:" + std::to_string(m) + ":" + std::to_string(n);
        case ManifoldKind::Spd: return "spd:" + std::to_string(n);
        case ManifoldKind::Euclidean: return "euclidean:" + std::to_string(n);
    }
    std::abort();
}

RealMatrix real_matrix_from_coords(const ManifoldSpec& spec, std::span<const double> x) {
    auto [r, c] = matrix_dims(spec);
    RealMatrix q(r, c);
    std::copy(x.begin(), x.begin() + r * c, q.data.begin());
    return q;
}

ComplexMatrix complex_matrix_from_coords(const ManifoldSpec& spec, std::span<const double> x) {
    const int n = spec.n;
    ComplexMatrix q(n, n);
    std::copy(x.begin(), x.begin() + n * n, q.re.data.begin());
    std::copy(x.begin() + n * n, x.begin() + 2 * n * n, q.im.data.begin());
    return q;
}

void coords_from_real_matrix(const RealMatrix& q, std::span<double> out) {
    std::copy(q.data.begin(), q.data.end(), out.begin());
}

void coords_from_complex_matrix(const ComplexMatrix& q, std::span<double> out) {
    std::copy(q.re.data.begin(), q.re.data.end(), out.begin());
    std::copy(q.im.data.begin(), q.im.data.end(), out.begin() + q.re.data.size());
}

double constraint_residual(const ManifoldSpec& spec, std::span<const double> x) {
    switch (spec.kind) {
        case ManifoldKind::Sphere:
            return std::abs(vec_norm(x) - 1.0);
        case ManifoldKind::SpecialOrthogonal: {
            RealMatrix q = real_matrix_from_coords(spec, x);
            double res = distance_to_identity(matmul(transpose(q), q));
            return res + std::abs(determinant(q) - 1.0);
        }
        case ManifoldKind::Unitary: {
            ComplexMatrix q = complex_matrix_from_coords(spec, x);
            return distance_to_identity(matmul(conj_transpose(q), q));
        }
        case ManifoldKind::SpecialUnitary: {
            ComplexMatrix q = complex_matrix_from_coords(spec, x);
            double res = distance_to_identity(matmul(conj_transpose(q), q));
            return res + std::abs(determinant(q) - std::complex<double>(1.0));
        }
        case ManifoldKind::Stiefel: {
            RealMatrix q = real_matrix_from_coords(spec, x);
            return distance_to_identity(matmul(transpose(q), q));
        }
        case ManifoldKind::Spd:
            return min_cholesky_pivot(spec.n, x) <= 0.0
                       ? std::numeric_limits<double>::infinity()
                       : 0.0;
        case ManifoldKind::Euclidean:
            return 0.0;
    }
    std::abort();
}

void eval_generator(const ManifoldSpec& spec, std::span<const double> x, int i,
                    std::span<double> out) {
    require_index(spec, i);
    std::fill(out.begin(), out.end(), 0.0);
    const int n = spec.n;
    switch (spec.kind) {
        case ManifoldKind::Sphere: {
            // X_i(x) = e_i - <x, e_i> x
            const double xi = x[i];
            for (int j = 0; j < n + 1; ++j) out[j] = -xi * x[j];
            out[i] += 1.0;
            return;
        }
        case ManifoldKind::SpecialOrthogonal: {
            // A (E_kj - E_jk): column j <- A[:,k], column k <- -A[:,j]
            auto [k, j] = pair_from_index(n, i);
            for (int a = 0; a < n; ++a) {
                out[a * n + j] = x[a * n + k];
                out[a * n + k] = -x[a * n + j];
            }
            return;
        }
        case ManifoldKind::Unitary:
        case ManifoldKind::SpecialUnitary: {
            const int nn = n * n;
            const int p = pair_count(n);
            auto re = [&](int a, int b) { return x[a * n + b]; };
            auto im = [&](int a, int b) { return x[nn + a * n + b]; };
            auto set_col = [&](int col, auto fre, auto fim) {
                for (int a = 0; a < n; ++a) {
                    out[a * n + col] = fre(a);
                    out[nn + a * n + col] = fim(a);
                }
            };
            if (i < p) {
                // real skew E_kj - E_jk acting on the right
                auto [k, j] = pair_from_index(n, i);
                set_col(j, [&](int a) { return re(a, k); }, [&](int a) { return im(a, k); });
                for (int a = 0; a < n; ++a) {
                    out[a * n + k] = -re(a, j);
                    out[nn + a * n + k] = -im(a, j);
                }
            } else if (i < 2 * p) {
                // i (E_kj + E_jk): columns get i * (source column)
                auto [k, j] = pair_from_index(n, i - p);
                set_col(j, [&](int a) { return -im(a, k); }, [&](int a) { return re(a, k); });
                for (int a = 0; a < n; ++a) {
                    out[a * n + k] = -im(a, j);
                    out[nn + a * n + k] = re(a, j);
                }
            } else if (spec.kind == ManifoldKind::Unitary) {
                // i E_jj
                int j = i - 2 * p;
                set_col(j, [&](int a) { return -im(a, j); }, [&](int a) { return re(a, j); });
            } else {
                // i (E_kk - E_{k+1,k+1})
                int k = i - 2 * p;
                set_col(k, [&](int a) { return -im(a, k); }, [&](int a) { return re(a, k); });
                set_col(k + 1, [&](int a) { return im(a, k + 1); },
                        [&](int a) { return -re(a, k + 1); });
            }
            return;
        }
        case ManifoldKind::Stiefel: {
            // (E_kj - E_jk) Q: row k <- Q[j,:], row j <- -Q[k,:]
            auto [k, j] = pair_from_index(n, i);
            const int m = spec.m;
            for (int b = 0; b < m; ++b) {
                out[k * m + b] = x[j * m + b];
                out[j * m + b] = -x[k * m + b];
            }
            return;
        }
        case ManifoldKind::Spd: {
            // E_jk Q + Q E_kj mapped to upper-triangle coordinates
            const int k = i / n, j = i % n;
            RealMatrix q = sym_from_upper(n, x);
            RealMatrix s(n, n);
            for (int b = 0; b < n; ++b) s(j, b) += q(k, b);
            for (int a = 0; a < n; ++a) s(a, j) += q(a, k);
            for (int a = 0; a < n; ++a)
                for (int b = a; b < n; ++b) out[upper_index(n, a, b)] = s(a, b);
            return;
        }
        case ManifoldKind::Euclidean:
            out[i] = 1.0;
            return;
    }
}

Vec eval_generator(const Point& p, int i) {
    Vec out(p.spec.ambient_dim());
    eval_generator(p.spec, p.coords, i, out);
    return out;
}

double generator_divergence(const ManifoldSpec& spec, std::span<const double> x, int i) {
    require_index(spec, i);
    if (spec.kind == ManifoldKind::Sphere) return -static_cast<double>(spec.n) * x[i];
    return 0.0;
}

void generator_divergences(const ManifoldSpec& spec, std::span<const double> x,
                           std::span<double> out) {
    const int m = spec.gen_count();
    if (spec.kind == ManifoldKind::Sphere) {
        for (int i = 0; i < m; ++i) out[i] = -static_cast<double>(spec.n) * x[i];
    } else {
        std::fill(out.begin(), out.begin() + m, 0.0);
    }
}

void generator_divergence_gradient_sum(const ManifoldSpec& spec, std::span<const double> /*x*/,
                                       std::span<const double> f, std::span<double> out) {
    if (spec.kind != ManifoldKind::Sphere) return;
    const double n = static_cast<double>(spec.n);
    for (std::size_t i = 0; i < f.size(); ++i) out[i] -= n * f[i];
}

void generator_jacobian_transpose_sum(const ManifoldSpec& spec, std::span<const double> x,
                                      const double* rows, std::span<double> out) {
    const int mg = spec.gen_count();
    const int dim = spec.ambient_dim();
    const int n = spec.n;
    switch (spec.kind) {
        case ManifoldKind::Euclidean:
            return;  // constant generators
        case ManifoldKind::Sphere: {
            // (dX_i/dx)^T w = -e_i <x, w> - x_i w
            for (int i = 0; i < mg; ++i) {
                const double* w = rows + i * dim;
                double dot = 0.0;
                for (int a = 0; a < dim; ++a) dot += x[a] * w[a];
                out[i] -= dot;
                const double xi = x[i];
                for (int a = 0; a < dim; ++a) out[a] -= xi * w[a];
            }
            return;
        }
        case ManifoldKind::SpecialOrthogonal: {
            // direction V -> V v_i, transpose: W v_i^T = W (E_jk - E_kj)
            for (int i = 0; i < mg; ++i) {
                const double* w = rows + i * dim;
                auto [k, j] = pair_from_index(n, i);
                for (int a = 0; a < n; ++a) {
                    out[a * n + k] += w[a * n + j];
                    out[a * n + j] -= w[a * n + k];
                }
            }
            return;
        }
        case ManifoldKind::Unitary:
        case ManifoldKind::SpecialUnitary: {
            // transpose contraction is W v_i^H; v^H column action mirrors
            // eval_generator with the conjugated basis element
            const int nn = n * n;
            const int p = pair_count(n);
            for (int i = 0; i < mg; ++i) {
                const double* w = rows + i * dim;
                auto wre = [&](int a, int b) { return w[a * n + b]; };
                auto wim = [&](int a, int b) { return w[nn + a * n + b]; };
                if (i < p) {
                    // v^H = E_jk - E_kj
                    auto [k, j] = pair_from_index(n, i);
                    for (int a = 0; a < n; ++a) {
                        out[a * n + k] += wre(a, j);
                        out[nn + a * n + k] += wim(a, j);
                        out[a * n + j] -= wre(a, k);
                        out[nn + a * n + j] -= wim(a, k);
                    }
                } else if (i < 2 * p) {
                    // v^H = -i (E_kj + E_jk): col j <- -i W[:,k], col k <- -i W[:,j]
                    auto [k, j] = pair_from_index(n, i - p);
                    for (int a = 0; a < n; ++a) {
                        out[a * n + j] += wim(a, k);
                        out[nn + a * n + j] -= wre(a, k);
                        out[a * n + k] += wim(a, j);
                        out[nn + a * n + k] -= wre(a, j);
                    }
                } else if (spec.kind == ManifoldKind::Unitary) {
                    int j = i - 2 * p;
                    for (int a = 0; a < n; ++a) {
                        out[a * n + j] += wim(a, j);
                        out[nn + a * n + j] -= wre(a, j);
                    }
                } else {
                    int k = i - 2 * p;
                    for (int a = 0; a < n; ++a) {
                        out[a * n + k] += wim(a, k);
                        out[nn + a * n + k] -= wre(a, k);
                        out[a * n + k + 1] -= wim(a, k + 1);
                        out[nn + a * n + k + 1] += wre(a, k + 1);
                    }
                }
            }
            return;
        }
        case ManifoldKind::Stiefel: {
            // direction V -> v_i V, transpose: v_i^T W = (E_jk - E_kj) W
            const int m = spec.m;
            for (int i = 0; i < mg; ++i) {
                const double* w = rows + i * dim;
                auto [k, j] = pair_from_index(n, i);
                for (int b = 0; b < m; ++b) {
                    out[j * m + b] += w[k * m + b];
                    out[k * m + b] -= w[j * m + b];
                }
            }
            return;
        }
        case ManifoldKind::Spd: {
            // S = E_kj A + A E_jk with A upper-supported from w, then
            // symmetrize back into the triangle coordinates.
            for (int i = 0; i < mg; ++i) {
                const double* w = rows + i * dim;
                const int k = i / n, j = i % n;
                auto aup = [&](int a, int b) { return a <= b ? w[upper_index(n, a, b)] : 0.0; };
                RealMatrix s(n, n);
                for (int b = 0; b < n; ++b) s(k, b) += aup(j, b);
                for (int a = 0; a < n; ++a) s(a, k) += aup(a, j);
                for (int a = 0; a < n; ++a) {
                    out[upper_index(n, a, a)] += s(a, a);
                    for (int b = a + 1; b < n; ++b) out[upper_index(n, a, b)] += s(a, b) + s(b, a);
                }
            }
            return;
        }
    }
}

Point retract(const ManifoldSpec& spec, std::span<const double> raw) {
    Point p{spec, Vec(raw.begin(), raw.end())};
    retract_in_place(spec, p.coords);
    return p;
}

void retract_in_place(const ManifoldSpec& spec, std::span<double> x) {
    switch (spec.kind) {
        case ManifoldKind::Euclidean:
            return;
        case ManifoldKind::Sphere: {
            double nrm = vec_norm(x);
            double res = std::abs(nrm - 1.0);
            if (res < kIdempotencyTol) return;
            if (res > kTrustRegion) throw OffManifoldError("retract: sphere state outside trust region");
            for (double& v : x) v /= nrm;
            return;
        }
        case ManifoldKind::SpecialOrthogonal:
        case ManifoldKind::Stiefel: {
            double res = constraint_residual(spec, x);
            if (res < kIdempotencyTol) return;
            if (res > kTrustRegion) throw OffManifoldError("retract: frame outside trust region");
            RealMatrix q = real_matrix_from_coords(spec, x);
            auto [qq, rr] = qr_decompose(q);
            if (spec.kind == ManifoldKind::SpecialOrthogonal && determinant(qq) < 0.0) {
                for (std::size_t a = 0; a < qq.rows; ++a) qq(a, qq.cols - 1) = -qq(a, qq.cols - 1);
            }
            coords_from_real_matrix(qq, x);
            return;
        }
        case ManifoldKind::Unitary:
        case ManifoldKind::SpecialUnitary: {
            double res = constraint_residual(spec, x);
            if (res < kIdempotencyTol) return;
            if (res > kTrustRegion) throw OffManifoldError("retract: frame outside trust region");
            ComplexMatrix q = complex_matrix_from_coords(spec, x);
            auto [qq, rr] = qr_decompose(q);
            if (spec.kind == ManifoldKind::SpecialUnitary) {
                std::complex<double> det = determinant(qq);
                for (std::size_t a = 0; a < qq.rows(); ++a)
                    qq.set(a, qq.cols() - 1, qq(a, qq.cols() - 1) / det);
            }
            coords_from_complex_matrix(qq, x);
            return;
        }
        case ManifoldKind::Spd: {
            // symmetric by storage; only the positivity guard applies
            if (min_cholesky_pivot(spec.n, x) < kSpdPivotGuard)
                throw NotPositiveDefiniteError("retract: spd state lost positive definiteness");
            return;
        }
    }
}

Point sample_base(const ManifoldSpec& spec, Rng& rng) {
    const int dim = spec.ambient_dim();
    Point p{spec, Vec(dim, 0.0)};
    const int n = spec.n;
    switch (spec.kind) {
        case ManifoldKind::Sphere: {
            for (double& v : p.coords) v = rng.normal();
            double nrm = vec_norm(p.coords);
            for (double& v : p.coords) v /= nrm;
            return p;
        }
        case ManifoldKind::Euclidean: {
            for (double& v : p.coords) v = rng.normal();
            return p;
        }
        case ManifoldKind::SpecialOrthogonal: {
            RealMatrix g(n, n);
            for (double& v : g.data) v = rng.normal();
            auto [q, r] = qr_decompose(g);
            if (determinant(q) < 0.0)
                for (int a = 0; a < n; ++a) q(a, n - 1) = -q(a, n - 1);
            coords_from_real_matrix(q, p.coords);
            return p;
        }
        case ManifoldKind::Stiefel: {
            RealMatrix g(n, spec.m);
            for (double& v : g.data) v = rng.normal();
            auto [q, r] = qr_decompose(g);
            coords_from_real_matrix(q, p.coords);
            return p;
        }
        case ManifoldKind::Unitary:
        case ManifoldKind::SpecialUnitary: {
            ComplexMatrix g(n, n);
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b) {
                    double re = rng.normal();
                    double im = rng.normal();
                    g.set(a, b, {re, im});
                }
            auto [q, r] = qr_decompose(g);
            if (spec.kind == ManifoldKind::SpecialUnitary) {
                // divide by the principal n-th root of the determinant
                std::complex<double> det = determinant(q);
                std::complex<double> root = std::polar(1.0, std::arg(det) / n);
                for (int a = 0; a < n; ++a)
                    for (int b = 0; b < n; ++b) q.set(a, b, q(a, b) / root);
            }
            coords_from_complex_matrix(q, p.coords);
            return p;
        }
        case ManifoldKind::Spd: {
            // Bartlett sample of Wishart(beta, (5/beta) I)
            const int beta = static_cast<int>(spec.wishart_dof);
            if (beta < n + 1) throw ConfigError("spd base density requires integer dof >= n+1");
            const double scale = std::sqrt(5.0 / beta);
            RealMatrix t(n, n);
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < i; ++j) t(i, j) = rng.normal();
                t(i, i) = std::sqrt(rng.chi_squared(beta - i));
            }
            RealMatrix a(n, n);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) a(i, j) = scale * t(i, j);
            RealMatrix q = matmul(a, transpose(a));
            upper_from_sym(q, p.coords);
            return p;
        }
    }
    std::abort();
}

double base_log_density0(const ManifoldSpec& spec, const Point& p) {
    switch (spec.kind) {
        case ManifoldKind::Sphere:
        case ManifoldKind::SpecialOrthogonal:
        case ManifoldKind::Unitary:
        case ManifoldKind::SpecialUnitary:
        case ManifoldKind::Stiefel:
            return 0.0;
        case ManifoldKind::Euclidean: {
            double s = 0.0;
            for (double v : p.coords) s += v * v;
            return -0.5 * spec.n * std::log(2.0 * kPi) - 0.5 * s;
        }
        case ManifoldKind::Spd: {
            // Wishart(beta, W0 = (5/beta) I) relative to the invariant
            // density mu_g = det(Q)^{-(n+1)/2} Leb:
            //   (beta/2)(log det Q - log det W0) - tr(W0^{-1} Q)/2 - log C
            // with log C = (beta n / 2) log 2 + log Gamma_n(beta/2).
            const int n = spec.n;
            const double beta = spec.wishart_dof;
            RealMatrix q = sym_from_upper(n, p.coords);
            double logdet_q = spd_log_det(q);
            double tr_q = 0.0;
            for (int i = 0; i < n; ++i) tr_q += q(i, i);
            double logdet_w0 = n * std::log(5.0 / beta);
            double log_c = 0.5 * beta * n * kLn2 + log_multigamma(n, 0.5 * beta);
            return 0.5 * beta * (logdet_q - logdet_w0) - 0.5 * (beta / 5.0) * tr_q - log_c;
        }
    }
    std::abort();
}

double is_tangent(const Point& p, std::span<const double> v) {
    const ManifoldSpec& spec = p.spec;
    switch (spec.kind) {
        case ManifoldKind::Sphere: {
            double dot = 0.0;
            for (std::size_t i = 0; i < p.coords.size(); ++i) dot += p.coords[i] * v[i];
            return std::abs(dot);
        }
        case ManifoldKind::SpecialOrthogonal:
        case ManifoldKind::Stiefel: {
            RealMatrix q = real_matrix_from_coords(spec, p.coords);
            RealMatrix w = real_matrix_from_coords(spec, v);
            RealMatrix s = matmul(transpose(q), w);
            RealMatrix st = transpose(s);
            for (std::size_t i = 0; i < s.data.size(); ++i) s.data[i] += st.data[i];
            return frobenius_norm(s);
        }
        case ManifoldKind::Unitary:
        case ManifoldKind::SpecialUnitary: {
            ComplexMatrix q = complex_matrix_from_coords(spec, p.coords);
            ComplexMatrix w = complex_matrix_from_coords(spec, v);
            ComplexMatrix s = matmul(conj_transpose(q), w);
            ComplexMatrix st = conj_transpose(s);
            for (std::size_t i = 0; i < s.re.data.size(); ++i) {
                s.re.data[i] += st.re.data[i];
                s.im.data[i] += st.im.data[i];
            }
            return frobenius_norm(s);
        }
        case ManifoldKind::Spd:
        case ManifoldKind::Euclidean:
            return 0.0;
    }
    std::abort();
}

}  // namespace mcnf

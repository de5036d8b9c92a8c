#include "mcnf/densemat.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

namespace mcnf {

namespace {

using cdouble = std::complex<double>;

// Generic dense kernel over double / std::complex<double>. The public
// RealMatrix / ComplexMatrix types are thin wrappers around these.
template <typename T>
struct Dense {
    std::size_t rows = 0, cols = 0;
    std::vector<T> a;
    Dense(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, T{}) {}
    T& operator()(std::size_t i, std::size_t j) { return a[i * cols + j]; }
    T operator()(std::size_t i, std::size_t j) const { return a[i * cols + j]; }
};

Dense<double> to_dense(const RealMatrix& m) {
    Dense<double> d(m.rows, m.cols);
    d.a = m.data;
    return d;
}

Dense<cdouble> to_dense(const ComplexMatrix& m) {
    Dense<cdouble> d(m.rows(), m.cols());
    for (std::size_t i = 0; i < d.a.size(); ++i) d.a[i] = {m.re.data[i], m.im.data[i]};
    return d;
}

RealMatrix from_dense(const Dense<double>& d) {
    RealMatrix m(d.rows, d.cols);
    m.data = d.a;
    return m;
}

ComplexMatrix from_dense(const Dense<cdouble>& d) {
    ComplexMatrix m(d.rows, d.cols);
    for (std::size_t i = 0; i < d.a.size(); ++i) {
        m.re.data[i] = d.a[i].real();
        m.im.data[i] = d.a[i].imag();
    }
    return m;
}

template <typename T>
Dense<T> mul(const Dense<T>& x, const Dense<T>& y) {
    Dense<T> z(x.rows, y.cols);
    for (std::size_t i = 0; i < x.rows; ++i)
        for (std::size_t k = 0; k < x.cols; ++k) {
            T xik = x(i, k);
            for (std::size_t j = 0; j < y.cols; ++j) z(i, j) += xik * y(k, j);
        }
    return z;
}

template <typename T>
double fro(const Dense<T>& x) {
    double s = 0.0;
    for (const T& v : x.a) s += std::norm(cdouble(v));
    return std::sqrt(s);
}

// Modified Gram-Schmidt with one reorthogonalization pass. The column norms
// become the (real, positive) diagonal of r, which is exactly the phase-fixed
// convention required for Haar sampling.
template <typename T>
std::pair<Dense<T>, Dense<T>> qr_impl(const Dense<T>& a) {
    const std::size_t m = a.rows, n = a.cols;
    if (m < n) throw Error("qr_decompose: more columns than rows");
    Dense<T> q = a;
    Dense<T> r(n, n);
    const double tol = 1e-12 * std::max(fro(a), 1.0);
    for (std::size_t j = 0; j < n; ++j) {
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t k = 0; k < j; ++k) {
                T dot{};
                for (std::size_t i = 0; i < m; ++i) {
                    if constexpr (std::is_same_v<T, cdouble>)
                        dot += std::conj(q(i, k)) * q(i, j);
                    else
                        dot += q(i, k) * q(i, j);
                }
                for (std::size_t i = 0; i < m; ++i) q(i, j) -= dot * q(i, k);
                r(k, j) += dot;
            }
        }
        double nrm = 0.0;
        for (std::size_t i = 0; i < m; ++i) nrm += std::norm(cdouble(q(i, j)));
        nrm = std::sqrt(nrm);
        if (nrm < tol) throw RankDeficientError("qr_decompose: rank-deficient column");
        r(j, j) = T(nrm);
        for (std::size_t i = 0; i < m; ++i) q(i, j) /= nrm;
    }
    return {q, r};
}

template <typename T>
T det_impl(Dense<T> a) {
    const std::size_t n = a.rows;
    if (n != a.cols) throw Error("determinant: matrix not square");
    T det = T(1.0);
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        double best = std::abs(cdouble(a(k, k)));
        for (std::size_t i = k + 1; i < n; ++i) {
            double v = std::abs(cdouble(a(i, k)));
            if (v > best) {
                best = v;
                piv = i;
            }
        }
        if (best == 0.0) return T(0.0);
        if (piv != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
            det = -det;
        }
        det *= a(k, k);
        for (std::size_t i = k + 1; i < n; ++i) {
            T f = a(i, k) / a(k, k);
            for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= f * a(k, j);
        }
    }
    return det;
}

// Solve a x = b in place (x stored over b) by LU with partial pivoting.
template <typename T>
void lu_solve_inplace(Dense<T> a, Dense<T>& b) {
    const std::size_t n = a.rows;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        double best = std::abs(cdouble(a(k, k)));
        for (std::size_t i = k + 1; i < n; ++i) {
            double v = std::abs(cdouble(a(i, k)));
            if (v > best) {
                best = v;
                piv = i;
            }
        }
        if (best == 0.0) throw Error("lu_solve: singular matrix");
        if (piv != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
            for (std::size_t j = 0; j < b.cols; ++j) std::swap(b(k, j), b(piv, j));
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            T f = a(i, k) / a(k, k);
            for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= f * a(k, j);
            for (std::size_t j = 0; j < b.cols; ++j) b(i, j) -= f * b(k, j);
        }
    }
    for (std::size_t k = n; k-- > 0;) {
        for (std::size_t j = 0; j < b.cols; ++j) {
            T s = b(k, j);
            for (std::size_t i = k + 1; i < n; ++i) s -= a(k, i) * b(i, j);
            b(k, j) = s / a(k, k);
        }
    }
}

// Diagonal Pade(6) approximant coefficients for exp:
// c_k = (2p-k)! p! / ((2p)! k! (p-k)!) with p = 6.
constexpr double kPade6[7] = {1.0,         1.0 / 2.0,    5.0 / 44.0, 1.0 / 66.0,
                              1.0 / 792.0, 1.0 / 15840.0, 1.0 / 665280.0};

template <typename T>
Dense<T> exp_impl(const Dense<T>& a) {
    const std::size_t n = a.rows;
    if (n != a.cols) throw Error("matrix_exp: matrix not square");

    // Scale so the Pade approximant is evaluated at norm <= 0.5.
    double nrm = fro(a);
    int s = 0;
    if (nrm > 0.5) s = static_cast<int>(std::ceil(std::log2(nrm / 0.5)));
    double scale = std::ldexp(1.0, -s);

    Dense<T> x(n, n);
    for (std::size_t i = 0; i < x.a.size(); ++i) x.a[i] = a.a[i] * scale;

    // N = sum_k c_k x^k split into even and odd parts; D = N(-x).
    Dense<T> pw(n, n);  // x^k, starts at identity
    for (std::size_t i = 0; i < n; ++i) pw(i, i) = T(1.0);
    Dense<T> even(n, n), odd(n, n);
    for (int k = 0; k <= 6; ++k) {
        Dense<T>& dst = (k % 2 == 0) ? even : odd;
        for (std::size_t i = 0; i < pw.a.size(); ++i) dst.a[i] += pw.a[i] * T(kPade6[k]);
        if (k < 6) pw = mul(pw, x);
    }
    Dense<T> num(n, n), den(n, n);
    for (std::size_t i = 0; i < num.a.size(); ++i) {
        num.a[i] = even.a[i] + odd.a[i];
        den.a[i] = even.a[i] - odd.a[i];
    }
    lu_solve_inplace(den, num);  // num <- den^{-1} num
    for (int k = 0; k < s; ++k) num = mul(num, num);
    return num;
}

}  // namespace

RealMatrix matmul(const RealMatrix& a, const RealMatrix& b) {
    return from_dense(mul(to_dense(a), to_dense(b)));
}

ComplexMatrix matmul(const ComplexMatrix& a, const ComplexMatrix& b) {
    return from_dense(mul(to_dense(a), to_dense(b)));
}

RealMatrix transpose(const RealMatrix& a) {
    RealMatrix t(a.cols, a.rows);
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t j = 0; j < a.cols; ++j) t(j, i) = a(i, j);
    return t;
}

ComplexMatrix conj_transpose(const ComplexMatrix& a) {
    ComplexMatrix t(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) t.set(j, i, std::conj(a(i, j)));
    return t;
}

double frobenius_norm(const RealMatrix& a) { return fro(to_dense(a)); }
double frobenius_norm(const ComplexMatrix& a) { return fro(to_dense(a)); }

double distance_to_identity(const RealMatrix& a) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t j = 0; j < a.cols; ++j) {
            double d = a(i, j) - (i == j ? 1.0 : 0.0);
            s += d * d;
        }
    return std::sqrt(s);
}

double distance_to_identity(const ComplexMatrix& a) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            s += std::norm(a(i, j) - cdouble(i == j ? 1.0 : 0.0, 0.0));
    return std::sqrt(s);
}

std::pair<RealMatrix, RealMatrix> qr_decompose(const RealMatrix& a) {
    auto [q, r] = qr_impl(to_dense(a));
    return {from_dense(q), from_dense(r)};
}

std::pair<ComplexMatrix, ComplexMatrix> qr_decompose(const ComplexMatrix& a) {
    auto [q, r] = qr_impl(to_dense(a));
    return {from_dense(q), from_dense(r)};
}

double determinant(const RealMatrix& a) { return det_impl(to_dense(a)); }

std::complex<double> determinant(const ComplexMatrix& a) { return det_impl(to_dense(a)); }

RealMatrix matrix_exp(const RealMatrix& a) { return from_dense(exp_impl(to_dense(a))); }

ComplexMatrix matrix_exp(const ComplexMatrix& a) { return from_dense(exp_impl(to_dense(a))); }

RealMatrix cholesky(const RealMatrix& a) {
    const std::size_t n = a.rows;
    if (n != a.cols) throw Error("cholesky: matrix not square");
    RealMatrix l(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double d = a(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
        if (d <= 0.0) throw NotPositiveDefiniteError("cholesky: pivot <= 0");
        l(j, j) = std::sqrt(d);
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            l(i, j) = s / l(j, j);
        }
    }
    return l;
}

std::vector<double> cholesky_solve(const RealMatrix& l, const std::vector<double>& b) {
    const std::size_t n = l.rows;
    std::vector<double> x = b;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < i; ++k) x[i] -= l(i, k) * x[k];
        x[i] /= l(i, i);
    }
    for (std::size_t i = n; i-- > 0;) {
        for (std::size_t k = i + 1; k < n; ++k) x[i] -= l(k, i) * x[k];
        x[i] /= l(i, i);
    }
    return x;
}

RealMatrix spd_inverse(const RealMatrix& a) {
    const std::size_t n = a.rows;
    RealMatrix l = cholesky(a);
    RealMatrix inv(n, n);
    std::vector<double> e(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        e.assign(n, 0.0);
        e[j] = 1.0;
        std::vector<double> col = cholesky_solve(l, e);
        for (std::size_t i = 0; i < n; ++i) inv(i, j) = col[i];
    }
    return inv;
}

double spd_log_det(const RealMatrix& a) {
    RealMatrix l = cholesky(a);
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows; ++i) s += std::log(l(i, i));
    return 2.0 * s;
}

}  // namespace mcnf

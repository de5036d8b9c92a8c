#pragma once

#include <complex>
#include <cstddef>
#include <utility>
#include <vector>

#include "mcnf/errors.hpp"

namespace mcnf {

/// Dense row-major real matrix. Sized for the small problems handled here
/// (n <= 8); no attempt is made at cache blocking or BLAS dispatch.
struct RealMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;  // row-major, rows*cols entries

    RealMatrix() = default;
    RealMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
    RealMatrix(std::size_t r, std::size_t c, std::vector<double> d)
        : rows(r), cols(c), data(std::move(d)) {}

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    static RealMatrix identity(std::size_t n) {
        RealMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }
};

/// Complex matrix stored as a (re, im) pair of equally shaped real matrices,
/// so a flat view of the coefficients is a plain real vector.
struct ComplexMatrix {
    RealMatrix re;
    RealMatrix im;

    ComplexMatrix() = default;
    ComplexMatrix(std::size_t r, std::size_t c) : re(r, c), im(r, c) {}

    std::size_t rows() const { return re.rows; }
    std::size_t cols() const { return re.cols; }

    std::complex<double> operator()(std::size_t i, std::size_t j) const {
        return {re(i, j), im(i, j)};
    }
    void set(std::size_t i, std::size_t j, std::complex<double> z) {
        re(i, j) = z.real();
        im(i, j) = z.imag();
    }

    static ComplexMatrix identity(std::size_t n) {
        ComplexMatrix m(n, n);
        m.re = RealMatrix::identity(n);
        return m;
    }
};

RealMatrix matmul(const RealMatrix& a, const RealMatrix& b);
ComplexMatrix matmul(const ComplexMatrix& a, const ComplexMatrix& b);

RealMatrix transpose(const RealMatrix& a);
ComplexMatrix conj_transpose(const ComplexMatrix& a);

double frobenius_norm(const RealMatrix& a);
double frobenius_norm(const ComplexMatrix& a);

/// Frobenius distance ||a - I||_F; a must be square.
double distance_to_identity(const RealMatrix& a);
double distance_to_identity(const ComplexMatrix& a);

/// Thin QR with r's diagonal real and positive (the phase-fixed convention
/// that makes QR of a Gaussian matrix Haar distributed). Requires
/// rows >= cols; throws RankDeficientError when a diagonal of r falls
/// below 1e-12 * ||a||_F.
std::pair<RealMatrix, RealMatrix> qr_decompose(const RealMatrix& a);
std::pair<ComplexMatrix, ComplexMatrix> qr_decompose(const ComplexMatrix& a);

/// Determinant via LU with partial pivoting. Zero is a valid return.
double determinant(const RealMatrix& a);
std::complex<double> determinant(const ComplexMatrix& a);

/// Matrix exponential, scaling-and-squaring with a diagonal Pade(6)
/// approximant. Accurate to ~1e-12 for ||a||_F <= 10.
RealMatrix matrix_exp(const RealMatrix& a);
ComplexMatrix matrix_exp(const ComplexMatrix& a);

/// Cholesky factor L (lower triangular, L L^T = a) of a symmetric positive
/// definite matrix; reads only the lower triangle. Throws
/// NotPositiveDefiniteError when a pivot is <= 0.
RealMatrix cholesky(const RealMatrix& a);

/// Solve a x = b for symmetric positive definite a via its Cholesky factor.
std::vector<double> cholesky_solve(const RealMatrix& chol_lower, const std::vector<double>& b);

/// Inverse of a symmetric positive definite matrix.
RealMatrix spd_inverse(const RealMatrix& a);

/// log det of a symmetric positive definite matrix (via Cholesky).
double spd_log_det(const RealMatrix& a);

}  // namespace mcnf

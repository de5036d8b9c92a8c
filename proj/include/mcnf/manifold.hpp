#pragma once

#include <span>
#include <string>
#include <vector>

#include "mcnf/densemat.hpp"
#include "mcnf/rng.hpp"

namespace mcnf {

using Vec = std::vector<double>;

enum class ManifoldKind {
    Sphere,             // S^n in R^{n+1}
    SpecialOrthogonal,  // SO(n), n x n real
    Unitary,            // U(n), n x n complex as (re, im)
    SpecialUnitary,     // SU(n)
    Stiefel,            // V_m(R^n): n x m orthonormal frames, m < n
    Spd,                // Sym^+(n), stored by upper triangle
    Euclidean,          // R^n with coordinate fields (test fixture)
};

struct ManifoldSpec {
    ManifoldKind kind = ManifoldKind::Sphere;
    int n = 2;               // sphere dimension / matrix size
    int m = 1;               // frame count, Stiefel only
    double wishart_dof = 0;  // base density degrees of freedom, Spd only

    int ambient_dim() const;
    int gen_count() const;
    int intrinsic_dim() const;

    /// Parse "sphere:2", "so:3", "u:2", "su:3", "stiefel:2:4", "spd:2".
    static ManifoldSpec parse(const std::string& s);
    std::string to_string() const;

    bool operator==(const ManifoldSpec& o) const {
        return kind == o.kind && n == o.n && m == o.m;
    }
};

struct Point {
    ManifoldSpec spec;
    Vec coords;  // flat ambient coordinates, length ambient_dim()
};

/// Nonnegative residual measuring how far the coordinates are from the
/// manifold: |"norm" - 1| for spheres, ||Q^H Q - I||_F (+|det - 1| where
/// the determinant is constrained) for matrix manifolds, +inf for a
/// non-positive-definite Spd state.
double constraint_residual(const ManifoldSpec& spec, std::span<const double> x);
inline double check_constraint(const Point& p) { return constraint_residual(p.spec, p.coords); }

/// i-th generating vector field evaluated through its smooth ambient
/// extension (defined for any x near the manifold, tangent on it).
void eval_generator(const ManifoldSpec& spec, std::span<const double> x, int i,
                    std::span<double> out);
Vec eval_generator(const Point& p, int i);

/// Divergence of the i-th generator with respect to the base density:
/// -n*x_i on S^n, zero on the homogeneous-space manifolds.
double generator_divergence(const ManifoldSpec& spec, std::span<const double> x, int i);

/// Project ambient coordinates back onto the manifold (normalization /
/// phase-fixed QR / positivity check). Throws OffManifoldError when the
/// input is outside the trust region (residual > 0.1), and
/// NotPositiveDefiniteError when an Spd state lost positivity.
Point retract(const ManifoldSpec& spec, std::span<const double> raw);

/// In-place retraction used as the per-step solver hook. For Spd this is
/// the positivity guard (min Cholesky pivot >= 1e-10) rather than a
/// projection.
void retract_in_place(const ManifoldSpec& spec, std::span<double> x);

/// Draw from the base measure: uniform on S^n, Haar on SO/U/SU and the
/// Stiefel manifold, Wishart(beta, 5/beta I) on Sym^+.
Point sample_base(const ManifoldSpec& spec, Rng& rng);

/// log of the initial probability density relative to the base density:
/// 0 on the compact manifolds, the normalized Wishart log-density with
/// respect to the invariant density on Sym^+.
double base_log_density0(const ManifoldSpec& spec, const Point& p);

/// Tangency residual of v at p (0 means tangent).
double is_tangent(const Point& p, std::span<const double> v);

// ---- contractions used by the cotangent-lift adjoint ----

/// All generator divergences at x, written to out[0..gen_count).
void generator_divergences(const ManifoldSpec& spec, std::span<const double> x,
                           std::span<double> out);

/// out += sum_i (d X_i / d x)^T w_i, where rows is gen_count x D row-major
/// and X_i are the ambient generator extensions (closed forms per manifold).
void generator_jacobian_transpose_sum(const ManifoldSpec& spec, std::span<const double> x,
                                      const double* rows, std::span<double> out);

/// out += sum_i f_i * grad_x div(X_i)  (nonzero only on spheres).
void generator_divergence_gradient_sum(const ManifoldSpec& spec, std::span<const double> x,
                                       std::span<const double> f, std::span<double> out);

// ---- conversions between flat coordinates and matrices ----

RealMatrix real_matrix_from_coords(const ManifoldSpec& spec, std::span<const double> x);
ComplexMatrix complex_matrix_from_coords(const ManifoldSpec& spec, std::span<const double> x);
void coords_from_real_matrix(const RealMatrix& q, std::span<double> out);
void coords_from_complex_matrix(const ComplexMatrix& q, std::span<double> out);

/// Symmetric matrix from upper-triangle coordinates and back (Spd storage).
RealMatrix sym_from_upper(int n, std::span<const double> u);
void upper_from_sym(const RealMatrix& s, std::span<double> out);

/// Index of entry (i, j), i <= j, in the upper-triangle storage.
int upper_index(int n, int i, int j);

}  // namespace mcnf

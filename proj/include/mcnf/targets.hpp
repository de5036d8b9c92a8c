#pragma once

#include <string>
#include <vector>

#include "mcnf/manifold.hpp"
#include "mcnf/rng.hpp"

namespace mcnf {

enum class TargetFamily {
    VonMisesFisher,        // spheres: beta <W, q>
    Langevin,              // SO(n) / Stiefel: (beta/m) tr(W^T Q), m = n-1 on SO(n)
    UnitaryTrace,          // U(n) / SU(n): (beta/n) Re tr(W^H Q)
    Wishart,               // Sym^+: (beta/2)(logdet Q - logdet W) - tr(W^-1 Q)/2
    ConjugationInvariant,  // SU(n): (beta/n) Re tr(sum_j c_j U^j)
    Uniform,               // constant density relative to the base measure
};

std::string family_to_string(TargetFamily f);
TargetFamily family_from_string(const std::string& s);

/// Unnormalized mixture target: logsumexp over k component log-densities.
struct TargetSpec {
    TargetFamily family = TargetFamily::Uniform;
    double beta = 1.0;
    int k = 1;
    std::vector<Point> centers;
    std::vector<double> c;  // ConjugationInvariant coefficients
};

/// Throws ConfigError when the family does not live on the given manifold
/// or the parameters are out of range.
void validate_target(const TargetSpec& ts, const ManifoldSpec& spec);

double log_target(const TargetSpec& ts, const Point& q);

/// Ambient gradient of log_target (softmax-weighted component gradients).
Vec grad_log_target(const TargetSpec& ts, const Point& q);

/// Mixture centers: base-measure samples on the compact manifolds, the
/// fixed (1/beta)-scaled matrices on Sym^+(2) and Sym^+(3).
std::vector<Point> sample_centers(const ManifoldSpec& spec, TargetFamily family, int k,
                                  double beta, Rng& rng);

}  // namespace mcnf

#pragma once

#include "episcale/linalg.hpp"

#include <complex>
#include <cstddef>
#include <functional>
#include <string_view>
#include <vector>

namespace episcale {

using VectorMap = std::function<Vector(const Vector&)>;

enum class FixedPointMethod { Iteration, Newton };

std::string_view to_string(FixedPointMethod m);

struct FixedPointOptions {
    double tol = 1e-10;
    std::size_t max_iter = 200000;
    /// Damping is halved on divergence down to this floor, then Newton takes over.
    double min_damping = 1.0 / 64.0;
    std::size_t newton_max_iter = 100;
};

struct FixedPointResult {
    Vector x;
    /// ||step(x) - x||_inf at the returned point
    double residual = 0;
    std::size_t iterations = 0;
    FixedPointMethod method = FixedPointMethod::Iteration;
    /// damping factor in use when iteration converged (1 for undamped)
    double damping = 1;
};

/// Damped fixed-point iteration x <- (1 - lambda) x + lambda step(x), with
/// lambda halved whenever the residual stops improving, and a
/// finite-difference Newton fallback on step(x) - x = 0.
/// Throws NumericalError if neither reaches tol.
FixedPointResult find_fixed_point(const VectorMap& step, const Vector& seed, const FixedPointOptions& options = {});

/// Finite-difference Jacobian with step h = 1e-6 (1 + ||x||_inf). Central
/// differences, except forward differences in coordinates with x_i < h so
/// the map is never evaluated outside the nonnegative orthant.
Matrix finite_difference_jacobian(const VectorMap& step, const Vector& x);

struct HyperbolicityReport {
    std::vector<std::complex<double>> eigenvalues;
    /// min over eigenvalues of | |lambda| - 1 |
    double distance_to_unit_circle = 0;
    double spectral_radius = 0;
    bool hyperbolic = false;
    /// hyperbolic with every |lambda| < 1
    bool attracting = false;
};

/// Eigenvalues of the finite-difference Jacobian at x. Hyperbolic when all
/// of them are at least `margin` away from the unit circle.
HyperbolicityReport check_hyperbolicity(const VectorMap& step, const Vector& x, double margin = 1e-6);

} // namespace episcale

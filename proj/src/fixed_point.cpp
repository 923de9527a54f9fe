#include "episcale/fixed_point.hpp"

#include "episcale/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace episcale {

std::string_view to_string(FixedPointMethod m)
{
    return m == FixedPointMethod::Newton ? "newton" : "iteration";
}

namespace {

double residual_of(const Vector& x, const Vector& fx)
{
    return max_abs(fx - x);
}

// Newton on G(x) = step(x) - x with a backtracking line search on ||G||_inf.
bool newton_solve(const VectorMap& step, Vector& x, const FixedPointOptions& options, FixedPointResult& out)
{
    const auto n = x.size();
    Vector fx = step(x);
    double res = residual_of(x, fx);
    for (std::size_t it = 0; it < options.newton_max_iter; ++it) {
        ++out.iterations;
        if (res < options.tol) {
            out.x = x;
            out.residual = res;
            out.method = FixedPointMethod::Newton;
            return true;
        }
        const Matrix J = finite_difference_jacobian(step, x) - Matrix::Identity(n, n);
        Eigen::FullPivLU<Matrix> lu(J);
        if (!lu.isInvertible()) {
            return false;
        }
        const Vector delta = lu.solve(fx - x);
        double t = 1.0;
        bool improved = false;
        for (int ls = 0; ls < 30; ++ls) {
            Vector trial = x - t * delta;
            // stay in the orthant; the maps are only defined there
            trial = trial.cwiseMax(0.0);
            Vector ftrial;
            try {
                ftrial = step(trial);
            } catch (const std::domain_error&) {
                t *= 0.5;
                continue;
            }
            const double rtrial = residual_of(trial, ftrial);
            if (std::isfinite(rtrial) && rtrial < res) {
                x = std::move(trial);
                fx = std::move(ftrial);
                res = rtrial;
                improved = true;
                break;
            }
            t *= 0.5;
        }
        if (!improved) {
            return false;
        }
    }
    if (res < options.tol) {
        out.x = x;
        out.residual = res;
        out.method = FixedPointMethod::Newton;
        return true;
    }
    return false;
}

} // namespace

FixedPointResult find_fixed_point(const VectorMap& step, const Vector& seed, const FixedPointOptions& options)
{
    if (!(options.tol > 0.0)) {
        throw std::invalid_argument("find_fixed_point: tol must be positive");
    }
    FixedPointResult out;
    out.x = seed;

    // iterations without a new best residual before the damping is halved
    constexpr std::size_t kPatience = 200;

    double damping = 1.0;
    Vector best = seed;
    double best_res = std::numeric_limits<double>::infinity();
    Vector x = seed;
    std::size_t since_best = 0;

    while (out.iterations < options.max_iter) {
        const Vector fx = step(x);
        const double res = residual_of(x, fx);
        ++out.iterations;
        if (!std::isfinite(res)) {
            since_best = kPatience; // treat as divergence
        } else {
            if (res < options.tol) {
                out.x = x;
                out.residual = res;
                out.method = FixedPointMethod::Iteration;
                out.damping = damping;
                return out;
            }
            if (res < best_res) {
                // a strict decrease of more than rounding counts as progress
                if (res < best_res * (1.0 - 1e-12)) {
                    since_best = 0;
                }
                best_res = res;
                best = x;
            } else {
                ++since_best;
            }
        }
        if (since_best >= kPatience || (std::isfinite(best_res) && res > 1e6 * best_res)) {
            damping *= 0.5;
            if (damping < options.min_damping) {
                break;
            }
            x = best;
            since_best = 0;
            continue;
        }
        x = (1.0 - damping) * x + damping * fx;
    }

    Vector start = std::isfinite(best_res) ? best : seed;
    if (newton_solve(step, start, options, out)) {
        return out;
    }
    throw NumericalError("find_fixed_point: no convergence to tol " + std::to_string(options.tol) +
                         " (best residual " + std::to_string(best_res) + ")");
}

Matrix finite_difference_jacobian(const VectorMap& step, const Vector& x)
{
    const auto n = x.size();
    const double h = 1e-6 * (1.0 + max_abs(x));
    const Vector fx = step(x);
    Matrix J(fx.size(), n);
    for (Eigen::Index i = 0; i < n; ++i) {
        Vector plus = x;
        plus[i] += h;
        if (x[i] >= h) {
            Vector minus = x;
            minus[i] -= h;
            J.col(i) = (step(plus) - step(minus)) / (2.0 * h);
        } else {
            J.col(i) = (step(plus) - fx) / h;
        }
    }
    return J;
}

HyperbolicityReport check_hyperbolicity(const VectorMap& step, const Vector& x, double margin)
{
    const Matrix J = finite_difference_jacobian(step, x);
    Eigen::EigenSolver<Matrix> solver(J, false);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("check_hyperbolicity: eigenvalue computation failed");
    }
    HyperbolicityReport report;
    report.distance_to_unit_circle = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
        const std::complex<double> lambda = solver.eigenvalues()[i];
        report.eigenvalues.push_back(lambda);
        const double modulus = std::abs(lambda);
        report.spectral_radius = std::max(report.spectral_radius, modulus);
        report.distance_to_unit_circle = std::min(report.distance_to_unit_circle, std::abs(modulus - 1.0));
    }
    report.hyperbolic = report.distance_to_unit_circle >= margin;
    report.attracting = report.hyperbolic && report.spectral_radius < 1.0;
    return report;
}

} // namespace episcale

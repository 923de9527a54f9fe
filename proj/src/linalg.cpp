#include "episcale/linalg.hpp"

#include "episcale/errors.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

namespace episcale {

double spectral_radius_2x2(double a, double b, double c, double d)
{
    const double half_trace = 0.5 * (a + d);
    const double det = a * d - b * c;
    const double disc = half_trace * half_trace - det;
    if (disc >= 0) {
        const double root = std::sqrt(disc);
        return std::max(std::abs(half_trace + root), std::abs(half_trace - root));
    }
    // complex pair, |lambda|^2 = det
    return std::sqrt(det);
}

double spectral_radius(const Matrix& m)
{
    if (m.rows() != m.cols()) {
        throw ValidationError("matrix", "spectral radius needs a square matrix");
    }
    if (!m.allFinite()) {
        throw ValidationError("matrix", "entries must be finite");
    }
    const auto n = m.rows();
    if (n == 0) {
        return 0.0;
    }
    if (n == 1) {
        return std::abs(m(0, 0));
    }
    if (n == 2) {
        return spectral_radius_2x2(m(0, 0), m(0, 1), m(1, 0), m(1, 1));
    }
    if (m.cwiseAbs().maxCoeff() == 0.0) {
        return 0.0;
    }

    // For a nonnegative matrix the Perron root r is an eigenvalue and
    // rho(m + I) = r + 1 is strictly dominant when m is irreducible, so the
    // shift removes the periodic cases that stall plain power iteration.
    const bool nonnegative = (m.array() >= 0.0).all();
    const double shift = nonnegative ? 1.0 : 0.0;
    const Matrix a = m + shift * Matrix::Identity(n, n);

    // positive start for nonnegative matrices; a generic one otherwise so that
    // m * x = 0 on the first step is unlikely
    Vector x(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        x[i] = nonnegative ? 1.0 : 1.0 + 0.618033988749895 * static_cast<double>(i + 1);
    }
    x.normalize();
    double estimate = 0.0;
    constexpr int kMaxIterations = 200000;
    constexpr double kTol = 1e-12;
    int stable = 0;
    for (int it = 0; it < kMaxIterations; ++it) {
        Vector y = a * x;
        const double norm = y.norm();
        if (norm == 0.0) {
            throw NumericalError("spectral_radius: iterate collapsed to zero");
        }
        // Rayleigh quotient of the normalised iterate
        const double rayleigh = x.dot(y);
        y /= norm;
        const double residual = (a * y - rayleigh * y).norm();
        const bool settled = std::abs(rayleigh - estimate) <= kTol * std::max(1.0, std::abs(rayleigh));
        estimate = rayleigh;
        x = std::move(y);
        if (settled && residual <= 1e-9 * std::max(1.0, std::abs(rayleigh))) {
            if (++stable >= 3) {
                return std::abs(estimate - shift);
            }
        } else {
            stable = 0;
        }
    }
    throw NumericalError("spectral_radius: power iteration did not converge");
}

double column_sum_defect(const Matrix& m)
{
    if (m.size() == 0) {
        return 0.0;
    }
    return (m.colwise().sum().array() - 1.0).abs().maxCoeff();
}

bool is_regular(const Matrix& m)
{
    if (m.rows() != m.cols() || m.rows() == 0) {
        return false;
    }
    const auto n = m.rows();
    using BoolMatrix = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic>;
    const BoolMatrix pattern = (m.array() > kStructuralZero).cast<int>();
    BoolMatrix power = pattern;
    const long bound = n * n - 2 * n + 2;
    for (long p = 1; p <= bound; ++p) {
        if ((power.array() > 0).all()) {
            return true;
        }
        power = ((power * pattern).array() > 0).cast<int>();
    }
    return (power.array() > 0).all();
}

Matrix matrix_power(const Matrix& m, unsigned long k)
{
    Matrix result = Matrix::Identity(m.rows(), m.cols());
    Matrix base = m;
    while (k > 0) {
        if (k & 1UL) {
            result = result * base;
        }
        k >>= 1U;
        if (k > 0) {
            base = base * base;
        }
    }
    return result;
}

double max_abs(const Vector& v)
{
    return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

} // namespace episcale

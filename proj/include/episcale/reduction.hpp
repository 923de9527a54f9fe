#pragma once

// Aggregated four-dimensional model obtained when movement is fast compared
// with the disease dynamics. Every patch quantity is replaced by the global
// total weighted by the stationary distribution of the corresponding
// movement matrix.

#include "episcale/errors.hpp"
#include "episcale/fixed_point.hpp"
#include "episcale/metapop.hpp"

#include <array>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace episcale {

struct StationaryCheck {
    Vector m;
    /// ||M m - m||_inf of the linear-solve result
    double solve_residual = 0;
    /// ||M m - m||_inf of the power-iteration result
    double power_residual = 0;
    /// ||m_solve - m_power||_inf
    double discrepancy = 0;
    std::size_t power_iterations = 0;
};

/// Probability vector m with M m = m for a column-stochastic regular M.
/// Linear solve of (M - I) m = 0 with the last row replaced by the
/// normalization sum(m) = 1; power iteration runs alongside as a cross-check.
/// The solve is returned unless its residual exceeds 1e-10 and the power
/// iterate does better. Throws NumericalError if neither meets 1e-10 or an
/// entry is not positive.
StationaryCheck stationary_check(const Matrix& M);

Vector stationary_distribution(const Matrix& M);

struct StationaryProfile {
    std::array<Vector, 4> m;

    const Vector& operator[](Compartment c) const noexcept { return m[index_of(c)]; }
    std::size_t patches() const noexcept { return static_cast<std::size_t>(m[0].size()); }
};

StationaryProfile stationary_profile(const MovementModel& movement);

/// Coefficients of the reduced SEIRS system. The per-patch vectors are kept
/// because the incidence terms depend on the global state.
struct ReducedParams {
    double B_bar = 0;
    double delta_S_S = 0;
    double delta_R_S = 0;
    double delta_E_E = 0;
    double delta_E_I = 0;
    double delta_I_I = 0;
    double delta_I_R = 0;
    double delta_R_R = 0;
    double beta_bar_I = 0;

    Vector sigma_S, sigma_E, beta;
    StationaryProfile profile;
    /// The local parameters the coefficients were built from.
    std::vector<EpidemicParams> local;

    std::size_t patches() const noexcept { return static_cast<std::size_t>(beta.size()); }
};

/// Weighted means of the local parameters. Requires standard incidence and
/// constant recruitment in every patch (UnsupportedError otherwise).
ReducedParams reduced_params(std::span<const EpidemicParams> patches, const StationaryProfile& profile);
ReducedParams reduced_params(const MetapopModel& model);

/// sum_j sigma_j^S beta_j m_j^I m_j^S / N_j(Y), N_j(Y) = sum_C m_j^C C.
/// Patches with N_j(Y) = 0 contribute nothing.
double beta_bar_S(const ReducedParams& rp, const GlobalState& y);
/// Same with sigma_j^E.
double beta_bar_E(const ReducedParams& rp, const GlobalState& y);

/// One step of the reduced system. Evaluated as the sum over patches of the
/// local step applied to the stationary-weighted patch state, which is the
/// coefficient form regrouped by patch; one patch reproduces seirs_step
/// bit for bit.
GlobalState reduced_step(const ReducedParams& rp, const GlobalState& y);

double r0_reduced(const ReducedParams& rp);

/// (B_bar / (1 - delta_S_S), 0, 0, 0)
GlobalState dfe_reduced(const ReducedParams& rp);

/// Patch state with block C equal to m^C times the global total of C.
MetapopState distribute(const StationaryProfile& profile, const GlobalState& y);

/// ||reduced_step(y) - y||_inf
double reduced_residual(const ReducedParams& rp, const GlobalState& y);

/// X* = slow_map(distribute(y*)). Throws PreconditionError unless y* is a
/// fixed point of the reduced step (residual below 1e-10 (1 + ||y*||_inf)).
MetapopState lift_equilibrium(const MetapopModel& model, const GlobalState& y_star);

GlobalState from_vector(const Vector& v);
Vector to_vector(const GlobalState& y);

struct TimescaleEntry {
    unsigned k = 0;
    /// ||X_k* - X*||_inf
    double distance = 0;
    /// ||full_step(X_k*) - X_k*||_inf
    double residual = 0;
    FixedPointMethod method = FixedPointMethod::Iteration;
    std::size_t iterations = 0;
    /// X_k* is hyperbolic and attracting for the full model with this k
    bool attracting = false;
    MetapopState fixed_point{1};
};

struct TimescaleReport {
    MetapopState lifted{1};
    HyperbolicityReport reduced_stability;
    /// y* is hyperbolic and attracting, so the limit statement applies
    bool transfer_applies = false;
    std::vector<TimescaleEntry> entries;
    double tolerance = 1e-6;
    /// transfer_applies, d(k_max) < tolerance and d(k_max) <= d(k_min)
    bool passed = false;
};

struct TimescaleOptions {
    FixedPointOptions fixed_point{};
    double tolerance = 1e-6;
    int workers = 1;
};

/// Thrown when some k has no fixed point; carries the k values that did.
class TimescaleError : public NumericalError {
public:
    TimescaleError(const std::string& what, std::vector<TimescaleEntry> completed)
        : NumericalError(what), completed_(std::move(completed))
    {
    }
    const std::vector<TimescaleEntry>& completed() const noexcept { return completed_; }

private:
    std::vector<TimescaleEntry> completed_;
};

/// For each k, the fixed point X_k* of the full model with ratio k, seeded at
/// the lift X* of y*, and its distance to X*. Distinct k run concurrently on
/// up to `workers` threads; the result does not depend on the worker count.
TimescaleReport timescale_convergence(const MetapopModel& model, const GlobalState& y_star, std::span<const unsigned> ks,
                                      const TimescaleOptions& options = {});

} // namespace episcale

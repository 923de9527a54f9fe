#include "episcale/reduction.hpp"

#include "episcale/errors.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <variant>

namespace episcale {

namespace {

double stationary_residual(const Matrix& M, const Vector& m)
{
    return max_abs(M * m - m);
}

Vector power_stationary(const Matrix& M, std::size_t& iterations)
{
    const auto n = M.rows();
    Vector m = Vector::Constant(n, 1.0 / static_cast<double>(n));
    constexpr std::size_t kCap = 1000000;
    // stop at the rounding floor: no new smallest change for kStall steps
    constexpr std::size_t kStall = 1000;
    double best = INFINITY;
    std::size_t best_at = 0;
    for (iterations = 0; iterations < kCap; ++iterations) {
        Vector next = M * m;
        next /= next.sum();
        const double change = max_abs(next - m);
        m = std::move(next);
        if (change <= 1e-16) {
            break;
        }
        if (change < best) {
            best = change;
            best_at = iterations;
        } else if (iterations - best_at >= kStall) {
            break;
        }
    }
    return m;
}

} // namespace

StationaryCheck stationary_check(const Matrix& M)
{
    const auto n = M.rows();
    if (n == 0 || M.cols() != n) {
        throw std::invalid_argument("stationary_distribution: matrix must be square and nonempty");
    }
    StationaryCheck out;
    Matrix A = M - Matrix::Identity(n, n);
    A.row(n - 1).setOnes();
    Vector rhs = Vector::Zero(n);
    rhs[n - 1] = 1.0;
    Vector solved = A.partialPivLu().solve(rhs);
    out.solve_residual = stationary_residual(M, solved);

    Vector powered = power_stationary(M, out.power_iterations);
    out.power_residual = stationary_residual(M, powered);
    out.discrepancy = max_abs(solved - powered);

    if (std::isfinite(out.solve_residual) && out.solve_residual <= 1e-10) {
        out.m = std::move(solved);
    } else if (out.power_residual <= 1e-10) {
        out.m = std::move(powered);
    } else {
        throw NumericalError("stationary_distribution: residual " + std::to_string(out.solve_residual) +
                             " (solve), " + std::to_string(out.power_residual) + " (power) exceeds 1e-10");
    }
    if (!((out.m.array() > 0.0).all())) {
        throw NumericalError("stationary_distribution: non-positive entry (matrix not regular?)");
    }
    return out;
}

Vector stationary_distribution(const Matrix& M)
{
    return stationary_check(M).m;
}

StationaryProfile stationary_profile(const MovementModel& movement)
{
    StationaryProfile p;
    for (Compartment c : kCompartments) {
        p.m[index_of(c)] = stationary_distribution(movement.matrix(c));
    }
    return p;
}

// ---------------------------------------------------------------------------

ReducedParams reduced_params(std::span<const EpidemicParams> patches, const StationaryProfile& profile)
{
    const std::size_t n = patches.size();
    if (n == 0 || profile.patches() != n) {
        throw ValidationError("profile", "stationary profile has " + std::to_string(profile.patches()) +
                                             " entries for " + std::to_string(n) + " patches");
    }
    ReducedParams rp;
    rp.profile = profile;
    rp.local.assign(patches.begin(), patches.end());
    rp.sigma_S.resize(static_cast<Eigen::Index>(n));
    rp.sigma_E.resize(static_cast<Eigen::Index>(n));
    rp.beta.resize(static_cast<Eigen::Index>(n));

    const Vector& mS = profile[Compartment::S];
    const Vector& mE = profile[Compartment::E];
    const Vector& mI = profile[Compartment::I];
    const Vector& mR = profile[Compartment::R];

    for (std::size_t j = 0; j < n; ++j) {
        const auto& p = patches[j];
        const auto* incidence = std::get_if<StandardIncidence>(&p.transmission());
        if (!incidence) {
            throw UnsupportedError("reduced model needs standard incidence; patch " + std::to_string(j) +
                                   " uses Poisson incidence");
        }
        const auto* recruitment = std::get_if<ConstantRecruitment>(&p.recruitment());
        if (!recruitment) {
            throw UnsupportedError("reduced model needs constant recruitment; patch " + std::to_string(j) +
                                   " uses density-dependent recruitment");
        }
        const auto i = static_cast<Eigen::Index>(j);
        const auto& s = p.sigma();
        const auto& g = p.gamma();
        const double beta = incidence->beta;

        rp.B_bar += recruitment->B;
        rp.delta_S_S += s.S * mS[i];
        rp.delta_R_S += s.S * g.R * mR[i];
        rp.delta_E_E += s.E * (1.0 - g.E) * mE[i];
        rp.delta_E_I += s.I * g.E * mE[i];
        rp.delta_I_I += s.I * (1.0 - g.I) * mI[i];
        rp.delta_I_R += s.R * g.I * mI[i];
        rp.delta_R_R += s.R * (1.0 - g.R) * mR[i];
        rp.beta_bar_I += s.E * beta * mI[i];

        rp.sigma_S[i] = s.S;
        rp.sigma_E[i] = s.E;
        rp.beta[i] = beta;
    }
    return rp;
}

ReducedParams reduced_params(const MetapopModel& model)
{
    return reduced_params(std::span<const EpidemicParams>(model.params()), stationary_profile(model.movement()));
}

namespace {

double weighted_incidence(const ReducedParams& rp, const Vector& sigma, const GlobalState& y)
{
    const auto& p = rp.profile;
    double total = 0.0;
    for (Eigen::Index j = 0; j < rp.beta.size(); ++j) {
        const double Nj = p[Compartment::S][j] * y.S + p[Compartment::E][j] * y.E + p[Compartment::I][j] * y.I +
                          p[Compartment::R][j] * y.R;
        if (Nj > 0.0) {
            total += sigma[j] * rp.beta[j] * p[Compartment::I][j] * p[Compartment::S][j] / Nj;
        }
    }
    return total;
}

} // namespace

double beta_bar_S(const ReducedParams& rp, const GlobalState& y)
{
    return weighted_incidence(rp, rp.sigma_S, y);
}

double beta_bar_E(const ReducedParams& rp, const GlobalState& y)
{
    return weighted_incidence(rp, rp.sigma_E, y);
}

GlobalState reduced_step(const ReducedParams& rp, const GlobalState& y)
{
    const auto& p = rp.profile;
    GlobalState out;
    for (std::size_t j = 0; j < rp.local.size(); ++j) {
        const auto i = static_cast<Eigen::Index>(j);
        const LocalState xj{p[Compartment::S][i] * y.S, p[Compartment::E][i] * y.E, p[Compartment::I][i] * y.I,
                            p[Compartment::R][i] * y.R};
        const LocalState next = seirs_step(rp.local[j], xj);
        out.S += next.S;
        out.E += next.E;
        out.I += next.I;
        out.R += next.R;
    }
    return out;
}

double r0_reduced(const ReducedParams& rp)
{
    return rp.delta_E_I * rp.beta_bar_I / ((1.0 - rp.delta_E_E) * (1.0 - rp.delta_I_I));
}

GlobalState dfe_reduced(const ReducedParams& rp)
{
    return {rp.B_bar / (1.0 - rp.delta_S_S), 0.0, 0.0, 0.0};
}

MetapopState distribute(const StationaryProfile& profile, const GlobalState& y)
{
    return MetapopState(profile[Compartment::S] * y.S, profile[Compartment::E] * y.E, profile[Compartment::I] * y.I,
                        profile[Compartment::R] * y.R);
}

GlobalState from_vector(const Vector& v)
{
    if (v.size() != 4) {
        throw std::invalid_argument("global state needs 4 entries");
    }
    return {v[0], v[1], v[2], v[3]};
}

Vector to_vector(const GlobalState& y)
{
    Vector v(4);
    v << y.S, y.E, y.I, y.R;
    return v;
}

double reduced_residual(const ReducedParams& rp, const GlobalState& y)
{
    return max_abs(to_vector(reduced_step(rp, y)) - to_vector(y));
}

MetapopState lift_equilibrium(const MetapopModel& model, const GlobalState& y_star)
{
    if (!y_star.is_nonnegative()) {
        throw PreconditionError("lift_equilibrium: y* must be nonnegative");
    }
    const ReducedParams rp = reduced_params(model);
    const double residual = reduced_residual(rp, y_star);
    const double allowed = 1e-10 * (1.0 + max_abs(to_vector(y_star)));
    if (!(residual < allowed)) {
        throw PreconditionError("lift_equilibrium: y* is not a fixed point of the reduced model (residual " +
                                std::to_string(residual) + ")");
    }
    return slow_map(model, distribute(rp.profile, y_star));
}

// ---------------------------------------------------------------------------

namespace {

VectorMap full_step_map(const MetapopModel& model)
{
    return [&model](const Vector& v) { return full_step(model, MetapopState::from_stacked(v)).stacked(); };
}

} // namespace

TimescaleReport timescale_convergence(const MetapopModel& model, const GlobalState& y_star, std::span<const unsigned> ks,
                                      const TimescaleOptions& options)
{
    if (ks.empty()) {
        throw std::invalid_argument("timescale_convergence: empty k list");
    }
    for (unsigned k : ks) {
        if (k == 0) {
            throw std::invalid_argument("timescale_convergence: k must be positive");
        }
    }

    TimescaleReport report;
    report.tolerance = options.tolerance;
    report.lifted = lift_equilibrium(model, y_star);

    const ReducedParams rp = reduced_params(model);
    const VectorMap reduced = [&rp](const Vector& v) { return to_vector(reduced_step(rp, from_vector(v))); };
    report.reduced_stability = check_hyperbolicity(reduced, to_vector(y_star));
    report.transfer_applies = report.reduced_stability.attracting;

    const Vector seed = report.lifted.stacked();
    const auto count = static_cast<std::ptrdiff_t>(ks.size());
    std::vector<std::optional<TimescaleEntry>> results(ks.size());
    std::vector<std::string> failures(ks.size());

#pragma omp parallel for schedule(dynamic) num_threads(std::max(1, options.workers))
    for (std::ptrdiff_t i = 0; i < count; ++i) {
        try {
            const MetapopModel mk = model.with_k(ks[static_cast<std::size_t>(i)]);
            const VectorMap step = full_step_map(mk);
            const FixedPointResult fp = find_fixed_point(step, seed, options.fixed_point);
            TimescaleEntry e;
            e.k = mk.movement().k();
            e.fixed_point = MetapopState::from_stacked(fp.x);
            e.distance = max_abs(fp.x - seed);
            e.residual = fp.residual;
            e.method = fp.method;
            e.iterations = fp.iterations;
            e.attracting = check_hyperbolicity(step, fp.x).attracting;
            results[static_cast<std::size_t>(i)] = std::move(e);
        } catch (const std::exception& ex) {
            failures[static_cast<std::size_t>(i)] = ex.what();
        }
    }

    std::vector<TimescaleEntry> completed;
    std::string failure;
    for (std::size_t i = 0; i < ks.size(); ++i) {
        if (results[i]) {
            completed.push_back(std::move(*results[i]));
        } else if (failure.empty()) {
            failure = "timescale_convergence: k=" + std::to_string(ks[i]) + ": " + failures[i];
        }
    }
    if (!failure.empty()) {
        throw TimescaleError(failure, std::move(completed));
    }

    report.entries = std::move(completed);
    const auto by_k = [](const TimescaleEntry& a, const TimescaleEntry& b) { return a.k < b.k; };
    const auto [lo, hi] = std::minmax_element(report.entries.begin(), report.entries.end(), by_k);
    report.passed = report.transfer_applies && hi->distance < options.tolerance && hi->distance <= lo->distance;
    return report;
}

} // namespace episcale

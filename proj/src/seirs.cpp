#include "episcale/seirs.hpp"

#include "episcale/errors.hpp"
#include "episcale/linalg.hpp"

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

namespace episcale {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_open_unit(double value, const char* field)
{
    if (!(value > 0.0 && value < 1.0)) {
        throw ValidationError(field, "must lie strictly inside (0,1), got " + std::to_string(value));
    }
}

void require_positive(double value, const char* field)
{
    if (!(value > 0.0) || !std::isfinite(value)) {
        throw ValidationError(field, "must be a positive finite number, got " + std::to_string(value));
    }
}

void require_nonnegative_state(const LocalState& x)
{
    if (!x.is_nonnegative()) {
        throw std::domain_error("local state must be componentwise nonnegative");
    }
}

} // namespace

// ---------------------------------------------------------------------------

void validate(const TransmissionSpec& spec)
{
    std::visit(overloaded{
                   [](const StandardIncidence& s) {
                       if (!(s.beta > 0.0 && s.beta <= 1.0)) {
                           throw ValidationError("beta", "standard incidence needs beta in (0,1], got " +
                                                             std::to_string(s.beta));
                       }
                   },
                   [](const PoissonIncidence& s) { require_positive(s.beta, "beta"); },
               },
               spec);
}

double eval_transmission(const TransmissionSpec& spec, double x)
{
    if (!(x >= 0.0 && x <= 1.0)) {
        throw std::domain_error("transmission argument must lie in [0,1], got " + std::to_string(x));
    }
    return std::visit(overloaded{
                          [x](const StandardIncidence& s) { return s.beta * x; },
                          [x](const PoissonIncidence& s) { return -std::expm1(-s.beta * x); },
                      },
                      spec);
}

double transmission_slope_at_zero(const TransmissionSpec& spec)
{
    return transmission_beta(spec);
}

bool is_concave(const TransmissionSpec&)
{
    // beta x is linear and 1 - exp(-beta x) has second derivative -beta^2 exp(-beta x)
    return true;
}

double transmission_beta(const TransmissionSpec& spec)
{
    return std::visit([](const auto& s) { return s.beta; }, spec);
}

// ---------------------------------------------------------------------------

void validate(const RecruitmentSpec& spec)
{
    std::visit(overloaded{
                   [](const ConstantRecruitment& s) { require_positive(s.B, "B"); },
                   [](const BevertonHoltRecruitment& s) {
                       require_positive(s.r, "r");
                       require_positive(s.K, "K");
                   },
                   [](const RickerRecruitment& s) {
                       require_positive(s.r, "r");
                       require_positive(s.K, "K");
                   },
                   [](const GeometricRecruitment& s) { require_positive(s.r, "r"); },
               },
               spec);
}

double eval_recruitment(const RecruitmentSpec& spec, double N)
{
    if (!(N >= 0.0)) {
        throw std::domain_error("recruitment needs a nonnegative population, got " + std::to_string(N));
    }
    return std::visit(overloaded{
                          [](const ConstantRecruitment& s) { return s.B; },
                          [N](const BevertonHoltRecruitment& s) { return s.r * N / (1.0 + N / s.K); },
                          [N](const RickerRecruitment& s) { return s.r * N * std::exp(-N / s.K); },
                          [N](const GeometricRecruitment& s) { return s.r * N; },
                      },
                      spec);
}

double recruitment_derivative(const RecruitmentSpec& spec, double N)
{
    if (!(N >= 0.0)) {
        throw std::domain_error("recruitment needs a nonnegative population, got " + std::to_string(N));
    }
    return std::visit(overloaded{
                          [](const ConstantRecruitment&) { return 0.0; },
                          [N](const BevertonHoltRecruitment& s) {
                              const double d = 1.0 + N / s.K;
                              return s.r / (d * d);
                          },
                          [N](const RickerRecruitment& s) { return s.r * (1.0 - N / s.K) * std::exp(-N / s.K); },
                          [](const GeometricRecruitment& s) { return s.r; },
                      },
                      spec);
}

bool is_bounded(const RecruitmentSpec& spec)
{
    return recruitment_bound(spec).has_value();
}

std::optional<double> recruitment_bound(const RecruitmentSpec& spec)
{
    return std::visit(overloaded{
                          [](const ConstantRecruitment& s) -> std::optional<double> { return s.B; },
                          // increasing, tends to rK
                          [](const BevertonHoltRecruitment& s) -> std::optional<double> { return s.r * s.K; },
                          // maximum at N = K
                          [](const RickerRecruitment& s) -> std::optional<double> {
                              return s.r * s.K * std::exp(-1.0);
                          },
                          [](const GeometricRecruitment&) -> std::optional<double> { return std::nullopt; },
                      },
                      spec);
}

// ---------------------------------------------------------------------------

EpidemicParams::EpidemicParams(Survival sigma, Transitions gamma, TransmissionSpec transmission,
                               RecruitmentSpec recruitment)
    : sigma_(sigma), gamma_(gamma), transmission_(transmission), recruitment_(recruitment)
{
    require_open_unit(sigma_.S, "sigma_S");
    require_open_unit(sigma_.E, "sigma_E");
    require_open_unit(sigma_.I, "sigma_I");
    require_open_unit(sigma_.R, "sigma_R");
    require_open_unit(gamma_.E, "gamma_E");
    require_open_unit(gamma_.I, "gamma_I");
    require_open_unit(gamma_.R, "gamma_R");
    try {
        validate(transmission_);
    } catch (const ValidationError& e) {
        throw ValidationError("transmission." + e.field(), e.detail());
    }
    try {
        validate(recruitment_);
    } catch (const ValidationError& e) {
        throw ValidationError("recruitment." + e.field(), e.detail());
    }
}

LocalState disease_map(const EpidemicParams& p, const LocalState& x)
{
    require_nonnegative_state(x);
    const double N = x.total();
    const double incidence = N > 0.0 ? eval_transmission(p.transmission(), x.I / N) * x.S : 0.0;
    const auto& g = p.gamma();
    return {
        x.S - incidence + g.R * x.R,
        x.E + incidence - g.E * x.E,
        x.I + g.E * x.E - g.I * x.I,
        x.R + g.I * x.I - g.R * x.R,
    };
}

LocalState demography_map(const EpidemicParams& p, const LocalState& x)
{
    require_nonnegative_state(x);
    const auto& s = p.sigma();
    return {
        eval_recruitment(p.recruitment(), x.total()) + s.S * x.S,
        s.E * x.E,
        s.I * x.I,
        s.R * x.R,
    };
}

LocalState seirs_step(const EpidemicParams& p, const LocalState& x)
{
    LocalState moved = disease_map(p, x);
    // S - Phi S and I - gamma_I I are nonnegative in exact arithmetic; keep
    // rounding from leaking below zero
    moved.S = std::max(moved.S, 0.0);
    moved.E = std::max(moved.E, 0.0);
    moved.I = std::max(moved.I, 0.0);
    moved.R = std::max(moved.R, 0.0);
    return demography_map(p, moved);
}

LocalDfe dfe_local(const EpidemicParams& p)
{
    const double sigma_S = p.sigma().S;
    const auto& rec = p.recruitment();

    double s_star = 0.0;
    if (const auto* c = std::get_if<ConstantRecruitment>(&rec)) {
        s_star = c->B / (1.0 - sigma_S);
    } else {
        const auto bound = recruitment_bound(rec);
        if (!bound) {
            throw HypothesisError("dfe_local: unbounded recruitment has no unique positive equilibrium");
        }
        const double s_max = 2.0 * *bound / (1.0 - sigma_S);
        const auto excess = [&](double S) { return S - sigma_S * S - eval_recruitment(rec, S); };

        // excess(S)/S -> 1 - sigma_S - B'(0) as S -> 0; a positive root needs
        // that limit to be negative
        const double lo = s_max * 1e-12;
        if (!(excess(lo) < 0.0)) {
            throw HypothesisError("dfe_local: no positive equilibrium (recruitment too weak at low density)");
        }
        if (!(excess(s_max) > 0.0)) {
            throw HypothesisError("dfe_local: equilibrium not bracketed below 2 B^/(1 - sigma_S)");
        }
        std::uintmax_t max_iter = 500;
        const auto tol = [](double a, double b) { return std::abs(b - a) <= 1e-12 * std::max(1.0, std::abs(a)); };
        const auto [a, b] = boost::math::tools::toms748_solve(excess, lo, s_max, tol, max_iter);
        if (!tol(a, b)) {
            throw HypothesisError("dfe_local: root search did not reach tolerance");
        }
        s_star = 0.5 * (a + b);
    }

    const double multiplier = sigma_S + recruitment_derivative(rec, s_star);
    if (std::abs(std::abs(multiplier) - 1.0) < 1e-8) {
        throw HypothesisError("dfe_local: demographic equilibrium is not hyperbolic (multiplier " +
                              std::to_string(multiplier) + ")");
    }
    return LocalDfe{LocalState{s_star, 0.0, 0.0, 0.0}, multiplier, std::abs(multiplier) < 1.0};
}

double r0_local_closed(const EpidemicParams& p)
{
    const auto& s = p.sigma();
    const auto& g = p.gamma();
    const double slope = transmission_slope_at_zero(p.transmission());
    return s.E * s.I * g.E * slope / ((1.0 - s.E * (1.0 - g.E)) * (1.0 - s.I * (1.0 - g.I)));
}

double r0_next_generation(const EpidemicParams& p)
{
    const auto& s = p.sigma();
    const auto& g = p.gamma();
    const double slope = transmission_slope_at_zero(p.transmission());

    Eigen::Matrix2d F;
    F << 0.0, s.E * slope, 0.0, 0.0;
    Eigen::Matrix2d T;
    T << s.E * (1.0 - g.E), 0.0, s.I * g.E, s.I * (1.0 - g.I);

    const Eigen::Matrix2d fundamental = Eigen::Matrix2d::Identity() - T;
    if (std::abs(fundamental.determinant()) < 1e-300) {
        throw NumericalError("r0_next_generation: Id - T is singular");
    }
    const Eigen::Matrix2d Q = F * fundamental.inverse();
    return spectral_radius_2x2(Q(0, 0), Q(0, 1), Q(1, 0), Q(1, 1));
}

double linear_recurrence_solution(double a, double b, double x0, unsigned long t)
{
    if (!(a > 0.0 && a < 1.0)) {
        throw std::domain_error("linear recurrence needs 0 < a < 1");
    }
    if (!(b >= 0.0)) {
        throw std::domain_error("linear recurrence needs b >= 0");
    }
    const double fixed = b / (1.0 - a);
    return (x0 - fixed) * std::pow(a, static_cast<double>(t)) + fixed;
}

} // namespace episcale

#pragma once

// Single-patch discrete-time SEIRS model. One time step applies the
// epidemiological transitions T first and the demographic map D second:
//
//   X(t+1) = D(T(X(t)))
//
// with T moving mass between S, E, I, R and D adding recruits B(N) to S and
// applying the per-class survival fractions sigma^C.

#include <optional>
#include <variant>

namespace episcale {

// ---------------------------------------------------------------------------
// Transmission functions Phi : [0,1] -> [0,1]

/// Proportional (standard) incidence, Phi(x) = beta x, beta in (0,1].
struct StandardIncidence {
    double beta = 0;
    bool operator==(const StandardIncidence&) const = default;
};

/// Poisson incidence, Phi(x) = 1 - exp(-beta x), beta > 0.
struct PoissonIncidence {
    double beta = 0;
    bool operator==(const PoissonIncidence&) const = default;
};

using TransmissionSpec = std::variant<StandardIncidence, PoissonIncidence>;

/// Throws ValidationError("beta") if beta is out of range for the variant.
void validate(const TransmissionSpec& spec);

double eval_transmission(const TransmissionSpec& spec, double x);

/// Phi'(0); equals beta for both families.
double transmission_slope_at_zero(const TransmissionSpec& spec);

/// Phi'' <= 0 on [0,1]. Holds for both shipped families.
bool is_concave(const TransmissionSpec& spec);

double transmission_beta(const TransmissionSpec& spec);

// ---------------------------------------------------------------------------
// Recruitment functions B : [0,inf) -> [0,inf)

struct ConstantRecruitment {
    double B = 0;
    bool operator==(const ConstantRecruitment&) const = default;
};

/// B(N) = r N / (1 + N/K)
struct BevertonHoltRecruitment {
    double r = 0;
    double K = 0;
    bool operator==(const BevertonHoltRecruitment&) const = default;
};

/// B(N) = r N exp(-N/K)
struct RickerRecruitment {
    double r = 0;
    double K = 0;
    bool operator==(const RickerRecruitment&) const = default;
};

/// B(N) = r N. Unbounded.
struct GeometricRecruitment {
    double r = 0;
    bool operator==(const GeometricRecruitment&) const = default;
};

using RecruitmentSpec =
    std::variant<ConstantRecruitment, BevertonHoltRecruitment, RickerRecruitment, GeometricRecruitment>;

void validate(const RecruitmentSpec& spec);

double eval_recruitment(const RecruitmentSpec& spec, double N);
double recruitment_derivative(const RecruitmentSpec& spec, double N);

bool is_bounded(const RecruitmentSpec& spec);

/// Least upper bound of B over [0,inf), or nullopt when B is unbounded.
std::optional<double> recruitment_bound(const RecruitmentSpec& spec);

// ---------------------------------------------------------------------------

/// Per-class survival fractions, each in (0,1).
struct Survival {
    double S = 0, E = 0, I = 0, R = 0;
    bool operator==(const Survival&) const = default;
};

/// Fractions leaving E, I and R for the next class per step, each in (0,1).
struct Transitions {
    double E = 0, I = 0, R = 0;
    bool operator==(const Transitions&) const = default;
};

/// Validated parameter set of one patch. Boundary values 0 and 1 are
/// rejected for every sigma and gamma.
class EpidemicParams {
public:
    EpidemicParams(Survival sigma, Transitions gamma, TransmissionSpec transmission,
                   RecruitmentSpec recruitment);

    const Survival& sigma() const noexcept { return sigma_; }
    const Transitions& gamma() const noexcept { return gamma_; }
    const TransmissionSpec& transmission() const noexcept { return transmission_; }
    const RecruitmentSpec& recruitment() const noexcept { return recruitment_; }

    bool operator==(const EpidemicParams&) const = default;

private:
    Survival sigma_;
    Transitions gamma_;
    TransmissionSpec transmission_;
    RecruitmentSpec recruitment_;
};

/// Densities of one patch. Total N is derived, never stored.
struct LocalState {
    double S = 0, E = 0, I = 0, R = 0;

    double total() const noexcept { return S + E + I + R; }
    bool is_nonnegative() const noexcept { return S >= 0 && E >= 0 && I >= 0 && R >= 0; }
    bool operator==(const LocalState&) const = default;
};

/// Epidemiological transitions T. Preserves the total. The incidence term
/// Phi(I/N) S is taken as 0 when N = 0.
LocalState disease_map(const EpidemicParams& p, const LocalState& x);

/// Demography D: (B(N) + sigma_S S, sigma_E E, sigma_I I, sigma_R R).
LocalState demography_map(const EpidemicParams& p, const LocalState& x);

/// D(T(x)).
LocalState seirs_step(const EpidemicParams& p, const LocalState& x);

struct LocalDfe {
    LocalState state;
    /// sigma_S + B'(S*), the linearisation of the demographic map at S*.
    double multiplier = 0;
    bool attracting = false;
};

/// Disease-free equilibrium (S*, 0, 0, 0) with S* = sigma_S S* + B(S*).
/// Throws HypothesisError when no positive root exists, the recruitment is
/// unbounded, or the root is non-hyperbolic.
LocalDfe dfe_local(const EpidemicParams& p);

/// sigma_E sigma_I gamma_E Phi'(0) / ((1 - sigma_E(1-gamma_E)) (1 - sigma_I(1-gamma_I)))
double r0_local_closed(const EpidemicParams& p);

/// Spectral radius of F (Id - T)^-1 built from the linearisation at the DFE.
double r0_next_generation(const EpidemicParams& p);

/// Solution of x(t+1) = a x(t) + b: (x0 - b/(1-a)) a^t + b/(1-a).
double linear_recurrence_solution(double a, double b, double x0, unsigned long t);

} // namespace episcale

#pragma once

#include "episcale/metapop.hpp"
#include "episcale/reduction.hpp"

#include <algorithm>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string_view>
#include <utility>

namespace episcale {

enum class Verdict { Eradication, Persistence, Undetermined };

std::string_view to_string(Verdict v);

struct ClassifyOptions {
    std::size_t horizon = 10000;
    /// the last tail_fraction of the orbit enters the persistence test
    double tail_fraction = 0.5;
    double eps_eradicate = 1e-8;
    double eps_persist = 1e-4;

    bool operator==(const ClassifyOptions&) const = default;
};

/// Throws ValidationError on eps_eradicate >= eps_persist, non-positive
/// thresholds, tail_fraction outside (0,1], or horizon 0.
void validate(const ClassifyOptions& options);

struct ClassifyResult {
    Verdict verdict = Verdict::Undetermined;
    /// E + I at t = horizon
    double final_infected = 0;
    /// min of E + I over t in [tail_start, horizon]
    double tail_min = 0;
    std::size_t tail_start = 0;
};

/// First step of the tail window: horizon - floor(tail_fraction * horizon).
std::size_t tail_start(const ClassifyOptions& options);

/// Eradication if E + I < eps_eradicate at the horizon; Persistence if the
/// minimum of E + I over the tail window exceeds eps_persist; Undetermined
/// otherwise. `step` maps a state to its successor; infected_mass(state)
/// must be defined for the state type.
template <class State, class Step>
ClassifyResult classify_asymptotics(Step&& step, State x0, const ClassifyOptions& options = {})
{
    validate(options);
    ClassifyResult out;
    out.tail_start = tail_start(options);
    out.tail_min = std::numeric_limits<double>::infinity();
    State x = std::move(x0);
    for (std::size_t t = 0;; ++t) {
        const double mass = infected_mass(x);
        if (t >= out.tail_start) {
            out.tail_min = std::min(out.tail_min, mass);
        }
        if (t == options.horizon) {
            out.final_infected = mass;
            break;
        }
        x = step(x);
    }
    if (out.final_infected < options.eps_eradicate) {
        out.verdict = Verdict::Eradication;
    } else if (out.tail_min > options.eps_persist) {
        out.verdict = Verdict::Persistence;
    } else {
        out.verdict = Verdict::Undetermined;
    }
    return out;
}

ClassifyResult classify_local(const EpidemicParams& p, const LocalState& x0, const ClassifyOptions& options = {});
ClassifyResult classify_full(const MetapopModel& model, const MetapopState& x0, const ClassifyOptions& options = {});
ClassifyResult classify_reduced(const ReducedParams& rp, const GlobalState& y0, const ClassifyOptions& options = {});

} // namespace episcale

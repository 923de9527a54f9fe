#include "episcale/classify.hpp"

#include "episcale/errors.hpp"

#include <cmath>
#include <string>

namespace episcale {

std::string_view to_string(Verdict v)
{
    switch (v) {
    case Verdict::Eradication: return "eradication";
    case Verdict::Persistence: return "persistence";
    case Verdict::Undetermined: return "undetermined";
    }
    return "?";
}

void validate(const ClassifyOptions& o)
{
    if (o.horizon == 0) {
        throw ValidationError("classify.horizon", "must be at least 1");
    }
    if (!(o.tail_fraction > 0.0 && o.tail_fraction <= 1.0)) {
        throw ValidationError("classify.tail_fraction", "must lie in (0,1], got " + std::to_string(o.tail_fraction));
    }
    if (!(o.eps_eradicate > 0.0) || !std::isfinite(o.eps_eradicate)) {
        throw ValidationError("classify.eps_eradicate", "must be a positive finite number");
    }
    if (!(o.eps_persist > o.eps_eradicate) || !std::isfinite(o.eps_persist)) {
        throw ValidationError("classify.eps_persist", "must be finite and greater than eps_eradicate");
    }
}

std::size_t tail_start(const ClassifyOptions& o)
{
    const auto span = static_cast<std::size_t>(std::floor(o.tail_fraction * static_cast<double>(o.horizon)));
    return o.horizon - std::min(span, o.horizon);
}

ClassifyResult classify_local(const EpidemicParams& p, const LocalState& x0, const ClassifyOptions& options)
{
    return classify_asymptotics([&p](const LocalState& x) { return seirs_step(p, x); }, x0, options);
}

ClassifyResult classify_full(const MetapopModel& model, const MetapopState& x0, const ClassifyOptions& options)
{
    return classify_asymptotics([&model](const MetapopState& x) { return full_step(model, x); }, x0, options);
}

ClassifyResult classify_reduced(const ReducedParams& rp, const GlobalState& y0, const ClassifyOptions& options)
{
    return classify_asymptotics([&rp](const GlobalState& y) { return reduced_step(rp, y); }, y0, options);
}

} // namespace episcale

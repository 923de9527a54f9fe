#include "episcale/scenario.hpp"

#include "episcale/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <cstdint>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace episcale {

using nlohmann::json;

std::string_view to_string(Severity s)
{
    return s == Severity::Warning ? "warning" : "error";
}

std::string Diagnostic::format() const
{
    std::string out(to_string(severity));
    out += ": ";
    if (!path.empty()) {
        out += path + ": ";
    }
    return out + message;
}

namespace {

std::string join_diagnostics(const std::vector<Diagnostic>& ds)
{
    std::string out;
    for (const auto& d : ds) {
        if (!out.empty()) {
            out += "\n";
        }
        out += d.format();
    }
    return out;
}

} // namespace

ScenarioError::ScenarioError(std::vector<Diagnostic> diagnostics)
    : std::invalid_argument(join_diagnostics(diagnostics)), diagnostics_(std::move(diagnostics))
{
}

bool has_errors(const std::vector<Diagnostic>& diagnostics)
{
    return std::any_of(diagnostics.begin(), diagnostics.end(),
                       [](const Diagnostic& d) { return d.severity == Severity::Error; });
}

bool Scenario::operator==(const Scenario& other) const
{
    return name == other.name && patches == other.patches && movement == other.movement &&
           initial_state == other.initial_state && horizon == other.horizon && classify == other.classify;
}

// ---------------------------------------------------------------------------

namespace {

constexpr std::array<const char*, 4> kBlockNames{"S", "E", "I", "R"};

std::string join_path(const std::string& base, const std::string& key)
{
    return base.empty() ? key : base + "." + key;
}

std::string index_path(const std::string& base, std::size_t i)
{
    return base + "[" + std::to_string(i) + "]";
}

std::string type_name(const json& j)
{
    return j.type_name();
}

class Reader {
public:
    std::vector<Diagnostic> diagnostics;

    void error(const std::string& path, const std::string& message)
    {
        diagnostics.push_back({Severity::Error, path, message});
    }

    bool ok() const { return !has_errors(diagnostics); }

    bool expect_object(const json& j, const std::string& path)
    {
        if (!j.is_object()) {
            error(path, "expected an object, got " + type_name(j));
            return false;
        }
        return true;
    }

    void reject_unknown(const json& obj, const std::string& path, std::initializer_list<const char*> allowed)
    {
        for (const auto& [key, value] : obj.items()) {
            const bool known =
                std::any_of(allowed.begin(), allowed.end(), [&key = key](const char* a) { return key == a; });
            if (!known) {
                error(join_path(path, key), "unknown field");
            }
        }
    }

    const json* required(const json& obj, const std::string& path, const char* key)
    {
        const auto it = obj.find(key);
        if (it == obj.end()) {
            error(join_path(path, key), "required field is missing");
            return nullptr;
        }
        return &*it;
    }

    std::optional<double> number(const json& j, const std::string& path)
    {
        if (!j.is_number()) {
            error(path, "expected a number, got " + type_name(j));
            return std::nullopt;
        }
        const double v = j.get<double>();
        if (!std::isfinite(v)) {
            error(path, "must be finite");
            return std::nullopt;
        }
        return v;
    }

    std::optional<double> number_field(const json& obj, const std::string& path, const char* key)
    {
        const json* j = required(obj, path, key);
        return j ? number(*j, join_path(path, key)) : std::nullopt;
    }

    std::optional<std::uint64_t> count(const json& j, const std::string& path, std::uint64_t min)
    {
        // nonnegative integers parse as unsigned
        if (!j.is_number_unsigned()) {
            error(path, "expected a nonnegative integer, got " + (j.is_number() ? j.dump() : type_name(j)));
            return std::nullopt;
        }
        const auto v = j.get<std::uint64_t>();
        if (v < min) {
            error(path, "must be at least " + std::to_string(min));
            return std::nullopt;
        }
        return v;
    }

    std::optional<std::string> string_field(const json& obj, const std::string& path, const char* key)
    {
        const json* j = required(obj, path, key);
        if (!j) {
            return std::nullopt;
        }
        if (!j->is_string()) {
            error(join_path(path, key), "expected a string, got " + type_name(*j));
            return std::nullopt;
        }
        return j->get<std::string>();
    }

    std::optional<double> open_unit(const json& obj, const std::string& path, const char* key)
    {
        auto v = number_field(obj, path, key);
        if (v && !(*v > 0.0 && *v < 1.0)) {
            error(join_path(path, key), "must lie strictly inside (0,1), got " + json(*v).dump());
            return std::nullopt;
        }
        return v;
    }

    std::optional<double> positive(const json& obj, const std::string& path, const char* key)
    {
        auto v = number_field(obj, path, key);
        if (v && !(*v > 0.0)) {
            error(join_path(path, key), "must be positive, got " + json(*v).dump());
            return std::nullopt;
        }
        return v;
    }

    std::optional<TransmissionSpec> transmission(const json& j, const std::string& path)
    {
        if (!expect_object(j, path)) {
            return std::nullopt;
        }
        reject_unknown(j, path, {"kind", "beta"});
        const auto kind = string_field(j, path, "kind");
        auto beta = number_field(j, path, "beta");
        if (!kind) {
            return std::nullopt;
        }
        if (*kind == "standard") {
            if (beta && !(*beta > 0.0 && *beta <= 1.0)) {
                error(join_path(path, "beta"), "standard incidence needs beta in (0,1], got " + json(*beta).dump());
                return std::nullopt;
            }
            return beta ? std::optional<TransmissionSpec>(StandardIncidence{*beta}) : std::nullopt;
        }
        if (*kind == "poisson") {
            if (beta && !(*beta > 0.0)) {
                error(join_path(path, "beta"), "must be positive, got " + json(*beta).dump());
                return std::nullopt;
            }
            return beta ? std::optional<TransmissionSpec>(PoissonIncidence{*beta}) : std::nullopt;
        }
        error(join_path(path, "kind"), "expected \"standard\" or \"poisson\", got \"" + *kind + "\"");
        return std::nullopt;
    }

    std::optional<RecruitmentSpec> recruitment(const json& j, const std::string& path)
    {
        if (!expect_object(j, path)) {
            return std::nullopt;
        }
        reject_unknown(j, path, {"kind", "params"});
        const auto kind = string_field(j, path, "kind");
        const json* params = required(j, path, "params");
        if (!kind || !params) {
            return std::nullopt;
        }
        const std::string ppath = join_path(path, "params");
        if (!expect_object(*params, ppath)) {
            return std::nullopt;
        }
        if (*kind == "constant") {
            reject_unknown(*params, ppath, {"B"});
            const auto B = positive(*params, ppath, "B");
            return B ? std::optional<RecruitmentSpec>(ConstantRecruitment{*B}) : std::nullopt;
        }
        if (*kind == "beverton-holt" || *kind == "ricker") {
            reject_unknown(*params, ppath, {"r", "K"});
            const auto r = positive(*params, ppath, "r");
            const auto K = positive(*params, ppath, "K");
            if (!r || !K) {
                return std::nullopt;
            }
            if (*kind == "ricker") {
                return RickerRecruitment{*r, *K};
            }
            return BevertonHoltRecruitment{*r, *K};
        }
        if (*kind == "geometric") {
            reject_unknown(*params, ppath, {"r"});
            const auto r = positive(*params, ppath, "r");
            return r ? std::optional<RecruitmentSpec>(GeometricRecruitment{*r}) : std::nullopt;
        }
        error(join_path(path, "kind"),
              "expected one of \"constant\", \"beverton-holt\", \"ricker\", \"geometric\", got \"" + *kind + "\"");
        return std::nullopt;
    }

    std::optional<EpidemicParams> patch(const json& j, const std::string& path)
    {
        if (!expect_object(j, path)) {
            return std::nullopt;
        }
        reject_unknown(j, path,
                       {"sigma_S", "sigma_E", "sigma_I", "sigma_R", "gamma_E", "gamma_I", "gamma_R", "transmission",
                        "recruitment"});
        const auto sS = open_unit(j, path, "sigma_S");
        const auto sE = open_unit(j, path, "sigma_E");
        const auto sI = open_unit(j, path, "sigma_I");
        const auto sR = open_unit(j, path, "sigma_R");
        const auto gE = open_unit(j, path, "gamma_E");
        const auto gI = open_unit(j, path, "gamma_I");
        const auto gR = open_unit(j, path, "gamma_R");
        std::optional<TransmissionSpec> tr;
        if (const json* t = required(j, path, "transmission")) {
            tr = transmission(*t, join_path(path, "transmission"));
        }
        std::optional<RecruitmentSpec> rc;
        if (const json* r = required(j, path, "recruitment")) {
            rc = recruitment(*r, join_path(path, "recruitment"));
        }
        if (!(sS && sE && sI && sR && gE && gI && gR && tr && rc)) {
            return std::nullopt;
        }
        try {
            return EpidemicParams(Survival{*sS, *sE, *sI, *sR}, Transitions{*gE, *gI, *gR}, *tr, *rc);
        } catch (const ValidationError& e) {
            error(join_path(path, e.field()), e.detail());
            return std::nullopt;
        }
    }

    std::optional<Matrix> matrix(const json& j, const std::string& path, std::size_t n)
    {
        if (!j.is_array()) {
            error(path, "expected an array of rows, got " + type_name(j));
            return std::nullopt;
        }
        if (j.size() != n) {
            error(path, "expected " + std::to_string(n) + " rows, got " + std::to_string(j.size()));
            return std::nullopt;
        }
        Matrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
        bool good = true;
        for (std::size_t r = 0; r < n; ++r) {
            const json& row = j[r];
            const std::string rpath = index_path(path, r);
            if (!row.is_array() || row.size() != n) {
                error(rpath, "expected a row of " + std::to_string(n) + " numbers");
                good = false;
                continue;
            }
            for (std::size_t c = 0; c < n; ++c) {
                const auto v = number(row[c], index_path(rpath, c));
                if (!v) {
                    good = false;
                } else if (*v < 0.0) {
                    error(index_path(rpath, c), "movement fractions must be nonnegative");
                    good = false;
                } else {
                    m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = *v;
                }
            }
        }
        if (!good) {
            return std::nullopt;
        }
        // column sums and regularity, reported per matrix
        try {
            MovementModel({m, m, m, m}, 1);
        } catch (const ValidationError& e) {
            error(path, e.detail());
            return std::nullopt;
        }
        return m;
    }

    std::optional<MovementModel> movement(const json& j, const std::string& path, std::size_t n)
    {
        if (!expect_object(j, path)) {
            return std::nullopt;
        }
        reject_unknown(j, path, {"convention", "k", "S", "E", "I", "R"});
        if (const auto conv = string_field(j, path, "convention")) {
            if (*conv != "column-stochastic") {
                error(join_path(path, "convention"),
                      "must be \"column-stochastic\" (columns sum to 1; entry [i][j] moves from patch j to patch i)");
            }
        }
        unsigned k = 0;
        if (const json* kj = required(j, path, "k")) {
            const auto v = count(*kj, join_path(path, "k"), 1);
            if (v && *v > std::numeric_limits<unsigned>::max()) {
                error(join_path(path, "k"), "too large");
            } else if (v) {
                k = static_cast<unsigned>(*v);
            }
        }
        std::array<Matrix, 4> ms;
        bool good = true;
        for (std::size_t c = 0; c < 4; ++c) {
            const json* mj = required(j, path, kBlockNames[c]);
            if (!mj || n == 0) {
                good = false;
                continue;
            }
            auto m = matrix(*mj, join_path(path, kBlockNames[c]), n);
            if (m) {
                ms[c] = std::move(*m);
            } else {
                good = false;
            }
        }
        if (!good || k == 0 || !ok()) {
            return std::nullopt;
        }
        return MovementModel(std::move(ms), k);
    }

    std::optional<MetapopState> state(const json& j, const std::string& path, std::size_t n)
    {
        if (!expect_object(j, path)) {
            return std::nullopt;
        }
        reject_unknown(j, path, {"S", "E", "I", "R"});
        std::array<Vector, 4> blocks;
        bool good = true;
        for (std::size_t c = 0; c < 4; ++c) {
            const json* bj = required(j, path, kBlockNames[c]);
            const std::string bpath = join_path(path, kBlockNames[c]);
            if (!bj) {
                good = false;
                continue;
            }
            if (!bj->is_array() || bj->size() != n) {
                error(bpath, "expected an array of " + std::to_string(n) + " densities");
                good = false;
                continue;
            }
            blocks[c].resize(static_cast<Eigen::Index>(n));
            for (std::size_t i = 0; i < n; ++i) {
                const auto v = number((*bj)[i], index_path(bpath, i));
                if (!v) {
                    good = false;
                } else if (*v < 0.0) {
                    error(index_path(bpath, i), "densities must be nonnegative");
                    good = false;
                } else {
                    blocks[c][static_cast<Eigen::Index>(i)] = *v;
                }
            }
        }
        if (!good || n == 0) {
            return std::nullopt;
        }
        return MetapopState(blocks[0], blocks[1], blocks[2], blocks[3]);
    }

    std::optional<ClassifyOptions> classify(const json& j, const std::string& path)
    {
        if (!expect_object(j, path)) {
            return std::nullopt;
        }
        reject_unknown(j, path, {"horizon", "tail_fraction", "eps_eradicate", "eps_persist"});
        ClassifyOptions o;
        bool good = true;
        if (const auto it = j.find("horizon"); it != j.end()) {
            const auto h = count(*it, join_path(path, "horizon"), 1);
            good = good && h.has_value();
            o.horizon = h.value_or(o.horizon);
        }
        for (auto [key, slot] : {std::pair{"tail_fraction", &o.tail_fraction}, std::pair{"eps_eradicate", &o.eps_eradicate},
                                 std::pair{"eps_persist", &o.eps_persist}}) {
            if (const auto it = j.find(key); it != j.end()) {
                const auto v = number(*it, join_path(path, key));
                good = good && v.has_value();
                *slot = v.value_or(*slot);
            }
        }
        if (!good) {
            return std::nullopt;
        }
        try {
            validate(o);
        } catch (const ValidationError& e) {
            error(e.field(), e.detail());
            return std::nullopt;
        }
        return o;
    }
};

// 1-based line and column of a byte offset.
std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t offset)
{
    offset = std::min(offset, text.size());
    std::size_t line = 1, column = 1;
    for (std::size_t i = 0; i < offset; ++i) {
        if (text[i] == '\n') {
            ++line;
            column = 1;
        } else {
            ++column;
        }
    }
    return {line, column};
}

} // namespace

Scenario parse_scenario(std::string_view text)
{
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        // the reported byte is one past the offending character
        const auto [line, column] = line_column(text, e.byte == 0 ? 0 : e.byte - 1);
        std::string what = e.what();
        if (const auto pos = what.find("syntax error"); pos != std::string::npos) {
            what = what.substr(pos);
        }
        throw ScenarioError({{Severity::Error, "",
                              "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what}});
    }

    Reader rd;
    if (!rd.expect_object(doc, "")) {
        throw ScenarioError(rd.diagnostics);
    }
    rd.reject_unknown(doc, "", {"name", "patches", "movement", "initial_state", "horizon", "classify"});

    const auto name = rd.string_field(doc, "", "name");

    std::vector<EpidemicParams> patches;
    std::size_t n = 0;
    bool patches_ok = false;
    if (const json* pj = rd.required(doc, "", "patches")) {
        if (!pj->is_array() || pj->empty()) {
            rd.error("patches", "expected a nonempty array of patch records");
        } else {
            n = pj->size();
            patches_ok = true;
            for (std::size_t j = 0; j < n; ++j) {
                auto p = rd.patch((*pj)[j], index_path("patches", j));
                if (p) {
                    patches.push_back(std::move(*p));
                } else {
                    patches_ok = false;
                }
            }
        }
    }

    std::optional<MovementModel> movement;
    if (const json* mj = rd.required(doc, "", "movement"); mj && n > 0) {
        movement = rd.movement(*mj, "movement", n);
    }
    std::optional<MetapopState> initial;
    if (const json* sj = rd.required(doc, "", "initial_state"); sj && n > 0) {
        initial = rd.state(*sj, "initial_state", n);
    }
    std::optional<std::uint64_t> horizon;
    if (const json* hj = rd.required(doc, "", "horizon")) {
        horizon = rd.count(*hj, "horizon", 0);
    }
    std::optional<ClassifyOptions> classify;
    if (const auto it = doc.find("classify"); it != doc.end()) {
        classify = rd.classify(*it, "classify");
    }

    if (!rd.ok() || !name || !patches_ok || !movement || !initial || !horizon) {
        if (rd.ok()) {
            rd.error("", "incomplete scenario");
        }
        throw ScenarioError(rd.diagnostics);
    }
    return Scenario{*name, std::move(patches), std::move(*movement), std::move(*initial),
                    static_cast<std::size_t>(*horizon), classify};
}

Scenario load_scenario(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ScenarioError({{Severity::Error, "", "cannot open scenario file '" + path + "'"}});
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_scenario(buffer.str());
}

// ---------------------------------------------------------------------------

namespace {

json to_json(const TransmissionSpec& t)
{
    if (const auto* s = std::get_if<StandardIncidence>(&t)) {
        return {{"kind", "standard"}, {"beta", s->beta}};
    }
    return {{"kind", "poisson"}, {"beta", std::get<PoissonIncidence>(t).beta}};
}

json to_json(const RecruitmentSpec& r)
{
    if (const auto* c = std::get_if<ConstantRecruitment>(&r)) {
        return {{"kind", "constant"}, {"params", {{"B", c->B}}}};
    }
    if (const auto* b = std::get_if<BevertonHoltRecruitment>(&r)) {
        return {{"kind", "beverton-holt"}, {"params", {{"r", b->r}, {"K", b->K}}}};
    }
    if (const auto* k = std::get_if<RickerRecruitment>(&r)) {
        return {{"kind", "ricker"}, {"params", {{"r", k->r}, {"K", k->K}}}};
    }
    return {{"kind", "geometric"}, {"params", {{"r", std::get<GeometricRecruitment>(r).r}}}};
}

json rows(const Matrix& m)
{
    json out = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            row.push_back(m(r, c));
        }
        out.push_back(std::move(row));
    }
    return out;
}

json values(const Vector& v)
{
    return json(std::vector<double>(v.begin(), v.end()));
}

} // namespace

std::string serialize_scenario(const Scenario& s)
{
    json doc;
    doc["name"] = s.name;
    json patches = json::array();
    for (const auto& p : s.patches) {
        patches.push_back({
            {"sigma_S", p.sigma().S},
            {"sigma_E", p.sigma().E},
            {"sigma_I", p.sigma().I},
            {"sigma_R", p.sigma().R},
            {"gamma_E", p.gamma().E},
            {"gamma_I", p.gamma().I},
            {"gamma_R", p.gamma().R},
            {"transmission", to_json(p.transmission())},
            {"recruitment", to_json(p.recruitment())},
        });
    }
    doc["patches"] = std::move(patches);
    json movement{{"convention", "column-stochastic"}, {"k", s.movement.k()}};
    json state;
    for (Compartment c : kCompartments) {
        movement[kBlockNames[index_of(c)]] = rows(s.movement.matrix(c));
        state[kBlockNames[index_of(c)]] = values(s.initial_state.block(c));
    }
    doc["movement"] = std::move(movement);
    doc["initial_state"] = std::move(state);
    doc["horizon"] = s.horizon;
    if (s.classify) {
        doc["classify"] = {
            {"horizon", s.classify->horizon},
            {"tail_fraction", s.classify->tail_fraction},
            {"eps_eradicate", s.classify->eps_eradicate},
            {"eps_persist", s.classify->eps_persist},
        };
    }
    return doc.dump(2) + "\n";
}

// ---------------------------------------------------------------------------

std::string_view to_string(Request r)
{
    switch (r) {
    case Request::Validate: return "validate";
    case Request::Simulate: return "simulate";
    case Request::R0: return "r0";
    case Request::Reduce: return "reduce";
    case Request::VerifyK: return "verify-k";
    case Request::Region: return "region";
    case Request::Classify: return "classify";
    }
    return "?";
}

namespace {

void reduced_model_rules(const Scenario& s, Severity severity, const std::string& prefix, std::vector<Diagnostic>& out)
{
    for (std::size_t j = 0; j < s.patches.size(); ++j) {
        const auto& p = s.patches[j];
        const std::string path = index_path("patches", j);
        if (!std::holds_alternative<StandardIncidence>(p.transmission())) {
            out.push_back({severity, join_path(path, "transmission"),
                           prefix + "the reduced model is derived for standard incidence only"});
        }
        if (!std::holds_alternative<ConstantRecruitment>(p.recruitment())) {
            out.push_back({severity, join_path(path, "recruitment"),
                           prefix + "the reduced model is derived for constant recruitment only"});
        }
    }
}

void region_rules(const Scenario& s, Severity severity, const std::string& prefix, std::vector<Diagnostic>& out)
{
    if (s.patches.size() != 2) {
        out.push_back({severity, "patches", prefix + "region analysis needs exactly 2 patches, got " +
                                                std::to_string(s.patches.size())});
        return;
    }
    const auto& a = s.patches[0];
    const auto& b = s.patches[1];
    if (!std::holds_alternative<StandardIncidence>(a.transmission()) ||
        !std::holds_alternative<StandardIncidence>(b.transmission())) {
        out.push_back({severity, "patches", prefix + "region analysis needs standard incidence in both patches"});
        return;
    }
    if (a.sigma().E != b.sigma().E) {
        out.push_back({severity, "patches[1].sigma_E", prefix + "region analysis needs sigma_E shared by both patches"});
    }
    if (a.gamma().E != b.gamma().E) {
        out.push_back({severity, "patches[1].gamma_E", prefix + "region analysis needs gamma_E shared by both patches"});
    }
    if (transmission_beta(a.transmission()) != transmission_beta(b.transmission())) {
        out.push_back(
            {severity, "patches[1].transmission.beta", prefix + "region analysis needs beta shared by both patches"});
    }
}

void dissipativity_rules(const Scenario& s, std::vector<Diagnostic>& out)
{
    for (std::size_t j = 0; j < s.patches.size(); ++j) {
        if (!is_bounded(s.patches[j].recruitment())) {
            out.push_back({Severity::Warning, join_path(index_path("patches", j), "recruitment"),
                           "geometric recruitment is unbounded; no dissipativity bound is reported"});
        }
    }
}

} // namespace

std::vector<Diagnostic> validate_scenario(const Scenario& s, Request request)
{
    std::vector<Diagnostic> out;
    // structural invariants are enforced by the constructors; recheck the
    // cross-object ones
    if (s.patches.size() != s.movement.patches() || s.patches.size() != s.initial_state.patches()) {
        out.push_back({Severity::Error, "patches", "patch count does not match movement or initial_state"});
        return out;
    }
    switch (request) {
    case Request::Simulate:
        dissipativity_rules(s, out);
        break;
    case Request::R0:
        reduced_model_rules(s, Severity::Warning, "reduced reproduction number omitted: ", out);
        break;
    case Request::Reduce:
    case Request::VerifyK:
    case Request::Classify:
        reduced_model_rules(s, Severity::Error, "", out);
        break;
    case Request::Region:
        region_rules(s, Severity::Error, "", out);
        break;
    case Request::Validate:
        dissipativity_rules(s, out);
        reduced_model_rules(s, Severity::Warning, "reduce, verify-k and classify unavailable: ", out);
        region_rules(s, Severity::Warning, "region unavailable: ", out);
        break;
    }
    return out;
}

} // namespace episcale

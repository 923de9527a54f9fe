#include "episcale/cli.hpp"

#include "episcale/classify.hpp"
#include "episcale/errors.hpp"
#include "episcale/reduction.hpp"
#include "episcale/region.hpp"
#include "episcale/scenario.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace episcale {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string num(double v)
{
    return fmt::format("{:.17g}", v);
}

class Table {
public:
    Table(std::string name, std::vector<std::string> header) : name_(std::move(name))
    {
        add_row(header);
    }

    template <class... Cells>
    void row(const Cells&... cells)
    {
        add_row({cell(cells)...});
    }

    void add_row(const std::vector<std::string>& cells)
    {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) {
                text_ += ',';
            }
            text_ += cells[i];
        }
        text_ += '\n';
    }

    const std::string& name() const { return name_; }
    const std::string& text() const { return text_; }

private:
    static std::string cell(double v) { return num(v); }
    static std::string cell(const std::string& s) { return s; }
    static std::string cell(std::string_view s) { return std::string(s); }
    static std::string cell(const char* s) { return s; }
    template <class I>
        requires std::is_integral_v<I>
    static std::string cell(I v)
    {
        return std::to_string(v);
    }

    std::string name_;
    std::string text_;
};

struct Sink {
    std::optional<fs::path> dir;
    std::ostream& out;

    void write(const std::vector<Table>& tables, const json& summary) const
    {
        if (dir) {
            fs::create_directories(*dir);
            for (const auto& t : tables) {
                write_file(*dir / (t.name() + ".csv"), t.text());
            }
            write_file(*dir / "summary.json", summary.dump(2) + "\n");
            return;
        }
        for (const auto& t : tables) {
            out << "# " << t.name() << '\n' << t.text();
        }
        out << "# summary\n" << summary.dump(2) << '\n';
    }

    static void write_file(const fs::path& path, const std::string& text)
    {
        std::ofstream f(path, std::ios::binary);
        f << text;
        if (!f) {
            throw std::ios_base::failure("cannot write " + path.string());
        }
    }
};

struct Options {
    std::string scenario_path;
    std::string out_dir;
    int workers = 1;
    std::vector<unsigned> ks{1, 2, 4, 8, 16, 32, 64};
    std::size_t resolution = 201;
};

constexpr double kBoundaryTol = 1e-9;

json to_json(const GlobalState& y)
{
    return {{"S", y.S}, {"E", y.E}, {"I", y.I}, {"R", y.R}};
}

json to_json(const MetapopState& x)
{
    json out;
    for (Compartment c : kCompartments) {
        const auto b = x.block(c);
        out[std::string(to_string(c))] = std::vector<double>(b.begin(), b.end());
    }
    return out;
}

json to_json(const ClassifyOptions& o)
{
    return {{"horizon", o.horizon},
            {"tail_fraction", o.tail_fraction},
            {"eps_eradicate", o.eps_eradicate},
            {"eps_persist", o.eps_persist}};
}

json to_json(const ClassifyResult& r)
{
    return {{"verdict", to_string(r.verdict)},
            {"final_infected", r.final_infected},
            {"tail_min", r.tail_min},
            {"tail_start", r.tail_start}};
}

json to_json(const std::vector<Diagnostic>& ds)
{
    json out = json::array();
    for (const auto& d : ds) {
        out.push_back({{"severity", to_string(d.severity)}, {"path", d.path}, {"message", d.message}});
    }
    return out;
}

bool outside_proven_scope(const Scenario& s)
{
    for (const auto& p : s.patches) {
        if (!std::holds_alternative<StandardIncidence>(p.transmission()) ||
            !std::holds_alternative<ConstantRecruitment>(p.recruitment())) {
            return true;
        }
    }
    return false;
}

json header(const Scenario& s, Request request)
{
    return {{"command", to_string(request)},
            {"scenario", s.name},
            {"patches", s.patches.size()},
            {"k", s.movement.k()}};
}

// ---------------------------------------------------------------------------

void run_simulate(const Scenario& s, const Sink& sink)
{
    const MetapopModel model = s.model();
    const std::size_t n = s.patches.size();

    std::vector<std::string> head{"t"};
    for (Compartment c : kCompartments) {
        for (std::size_t j = 0; j < n; ++j) {
            head.push_back(fmt::format("{}_{}", to_string(c), j + 1));
        }
    }
    for (const char* g : {"S", "E", "I", "R", "N"}) {
        head.emplace_back(g);
    }
    Table table("trajectory", head);

    MetapopState x = s.initial_state;
    for (std::size_t t = 0;; ++t) {
        std::vector<std::string> cells{std::to_string(t)};
        for (double v : x.stacked()) {
            cells.push_back(num(v));
        }
        const GlobalState y = aggregate(x);
        for (double v : {y.S, y.E, y.I, y.R, y.total()}) {
            cells.push_back(num(v));
        }
        table.add_row(cells);
        if (t == s.horizon) {
            break;
        }
        x = full_step(model, x);
        if (!x.stacked().allFinite()) {
            throw NumericalError(fmt::format("state overflowed to a non-finite value at t = {}", t + 1));
        }
    }

    json summary = header(s, Request::Simulate);
    summary["horizon"] = s.horizon;
    summary["final_state"] = {{"patches", to_json(x)}, {"global", to_json(aggregate(x))}};
    try {
        const DissipativityBound b = dissipativity_bound(model);
        summary["dissipativity"] = {{"sigma_max", b.sigma_max},
                                    {"recruitment_sum", b.recruitment_sum},
                                    {"attractor_radius", b.attractor_radius},
                                    {"envelope", b.envelope(s.initial_state.stacked().sum())}};
    } catch (const UnsupportedError&) {
        summary["dissipativity"] = nullptr;
    }
    const ClassifyOptions opts = s.classify_options();
    json cls = to_json(classify_full(model, s.initial_state, opts));
    cls["options"] = to_json(opts);
    cls["outside_proven_scope"] = outside_proven_scope(s);
    cls["empirical"] = n > 1;
    summary["classification"] = std::move(cls);
    sink.write({table}, summary);
}

void run_r0(const Scenario& s, const Sink& sink)
{
    Table table("r0", {"scope", "r0_closed", "r0_spectral", "abs_difference"});
    json summary = header(s, Request::R0);
    json local = json::array();
    for (std::size_t j = 0; j < s.patches.size(); ++j) {
        const double closed = r0_local_closed(s.patches[j]);
        const double spectral = r0_next_generation(s.patches[j]);
        table.row(fmt::format("patch_{}", j + 1), closed, spectral, std::abs(closed - spectral));
        local.push_back({{"patch", j + 1}, {"r0", closed}, {"spectral", spectral}});
    }
    summary["local"] = std::move(local);

    if (has_errors(validate_scenario(s, Request::Reduce))) {
        summary["reduced"] = nullptr;
    } else {
        const ReducedParams rp = reduced_params(s.model());
        const double closed = r0_reduced(rp);
        // next-generation matrix of the reduced E-I subsystem
        Matrix F = Matrix::Zero(2, 2);
        F(0, 1) = rp.beta_bar_I;
        Matrix T(2, 2);
        T << rp.delta_E_E, 0.0, rp.delta_E_I, rp.delta_I_I;
        const double spectral = spectral_radius(F * (Matrix::Identity(2, 2) - T).inverse());
        table.row("reduced", closed, spectral, std::abs(closed - spectral));
        summary["reduced"] = {{"r0", closed}, {"spectral", spectral}};
    }
    sink.write({table}, summary);
}

void run_reduce(const Scenario& s, const Sink& sink)
{
    Table profiles("profiles", {"patch", "m_S", "m_E", "m_I", "m_R"});
    const StationaryProfile profile = stationary_profile(s.movement);
    for (std::size_t j = 0; j < profile.patches(); ++j) {
        const auto i = static_cast<Eigen::Index>(j);
        profiles.row(j + 1, profile[Compartment::S][i], profile[Compartment::E][i], profile[Compartment::I][i],
                     profile[Compartment::R][i]);
    }
    const ReducedParams rp = reduced_params(std::span<const EpidemicParams>(s.patches), profile);
    Table coefficients("coefficients", {"name", "value"});
    const std::pair<const char*, double> named[] = {
        {"B_bar", rp.B_bar},         {"delta_S_S", rp.delta_S_S}, {"delta_R_S", rp.delta_R_S},
        {"delta_E_E", rp.delta_E_E}, {"delta_E_I", rp.delta_E_I}, {"delta_I_I", rp.delta_I_I},
        {"delta_I_R", rp.delta_I_R}, {"delta_R_R", rp.delta_R_R}, {"beta_bar_I", rp.beta_bar_I},
        {"r0_bar", r0_reduced(rp)},
    };
    json coeffs;
    for (const auto& [name, value] : named) {
        coefficients.row(name, value);
        coeffs[name] = value;
    }

    json residuals;
    for (Compartment c : kCompartments) {
        const StationaryCheck check = stationary_check(s.movement.matrix(c));
        residuals[std::string(to_string(c))] = {{"solve_residual", check.solve_residual},
                                                {"power_residual", check.power_residual},
                                                {"discrepancy", check.discrepancy}};
    }
    json summary = header(s, Request::Reduce);
    summary["coefficients"] = std::move(coeffs);
    summary["dfe_reduced"] = to_json(dfe_reduced(rp));
    summary["stationary_checks"] = std::move(residuals);
    sink.write({profiles, coefficients}, summary);
}

void run_verify_k(const Scenario& s, const Options& opt, const Sink& sink)
{
    const MetapopModel model = s.model();
    const ReducedParams rp = reduced_params(model);
    const double r0 = r0_reduced(rp);
    const ClassifyOptions copts = s.classify_options();

    GlobalState y_star = dfe_reduced(rp);
    std::string kind = "dfe";
    if (r0 >= 1.0) {
        // approach the endemic equilibrium along the reduced orbit, then polish
        GlobalState y = aggregate(s.initial_state);
        for (std::size_t t = 0; t < copts.horizon; ++t) {
            y = reduced_step(rp, y);
        }
        const VectorMap step = [&rp](const Vector& v) { return to_vector(reduced_step(rp, from_vector(v))); };
        y_star = from_vector(find_fixed_point(step, to_vector(y)).x);
        kind = infected_mass(y_star) > 0.0 ? "endemic" : "dfe";
    }

    TimescaleOptions topts;
    topts.workers = opt.workers;
    const TimescaleReport report = timescale_convergence(model, y_star, opt.ks, topts);

    Table table("convergence", {"k", "distance", "residual", "method", "iterations", "attracting"});
    for (const auto& e : report.entries) {
        table.row(e.k, e.distance, e.residual, to_string(e.method), e.iterations, e.attracting ? 1 : 0);
    }
    json eig = json::array();
    for (const auto& l : report.reduced_stability.eigenvalues) {
        eig.push_back({l.real(), l.imag()});
    }
    json summary = header(s, Request::VerifyK);
    summary["ks"] = opt.ks;
    summary["r0_reduced"] = r0;
    summary["equilibrium"] = {{"kind", kind}, {"state", to_json(y_star)}};
    summary["lifted"] = to_json(report.lifted);
    summary["reduced_stability"] = {{"eigenvalues", std::move(eig)},
                                    {"spectral_radius", report.reduced_stability.spectral_radius},
                                    {"distance_to_unit_circle", report.reduced_stability.distance_to_unit_circle},
                                    {"hyperbolic", report.reduced_stability.hyperbolic}};
    summary["transfer_applies"] = report.transfer_applies;
    summary["tolerance"] = report.tolerance;
    summary["fixed_point_tol"] = topts.fixed_point.tol;
    summary["hyperbolicity_margin"] = 1e-6;
    summary["passed"] = report.passed;
    sink.write({table}, summary);
}

void run_region(const Scenario& s, const Options& opt, const Sink& sink)
{
    const auto& a = s.patches[0];
    const auto& b = s.patches[1];
    const TwoPatchSharedParams shared{a.sigma().E, a.gamma().E, transmission_beta(a.transmission())};
    const TwoPatchInfectiousParams ip{a.sigma().I, a.gamma().I, b.sigma().I, b.gamma().I};
    RegionOptions ropts;
    ropts.resolution = opt.resolution;
    ropts.boundary_tol = kBoundaryTol;
    ropts.workers = opt.workers;
    const RegionReport report = region_sweep(shared, ip, ropts);

    Table grid("grid", {"x", "y", "r0_bar", "region"});
    for (std::size_t i = 0; i < report.resolution; ++i) {
        for (std::size_t j = 0; j < report.resolution; ++j) {
            const double r = report.grid(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            grid.row(report.x_at(i), report.x_at(j), r, r < 1.0 ? "eradication" : "endemic");
        }
    }
    Table boundary("boundary", {"x", "y", "r0_bar"});
    for (const auto& v : report.boundary) {
        boundary.row(v.x, v.y, v.r0_bar);
    }

    json summary = header(s, Request::Region);
    summary["A"] = report.A;
    summary["r0_local"] = report.r0;
    if (report.feasibility) {
        const auto& f = *report.feasibility;
        summary["feasibility"] = {{"verdict", to_string(f.verdict)},
                                  {"relabeled", f.relabeled},
                                  {"under_line_condition", f.under_line_condition},
                                  {"over_line_condition", f.over_line_condition},
                                  {"inverse_A", 1.0 / f.A}};
    } else {
        summary["feasibility"] = nullptr;
    }
    summary["corners"] = {{"g_00", two_patch_g(0, 0, ip)},
                          {"g_10", two_patch_g(1, 0, ip)},
                          {"g_01", two_patch_g(0, 1, ip)},
                          {"g_11", two_patch_g(1, 1, ip)}};
    summary["line"] = {{"a", report.line.a}, {"b", report.line.b}, {"c", report.line.c}};
    const StationaryProfile profile = stationary_profile(s.movement);
    const double x = profile[Compartment::E][0];
    const double y = profile[Compartment::I][0];
    summary["scenario_point"] = {{"x", x}, {"y", y}, {"r0_bar", report.A * two_patch_g(x, y, ip)}};
    summary["resolution"] = report.resolution;
    summary["boundary_tol"] = kBoundaryTol;
    summary["boundary_vertices"] = report.boundary.size();
    summary["max_boundary_residual"] = report.max_boundary_residual;
    summary["eradication_nodes"] = report.eradication_nodes;
    sink.write({grid, boundary}, summary);
}

void run_classify(const Scenario& s, const Sink& sink)
{
    const MetapopModel model = s.model();
    const ReducedParams rp = reduced_params(model);
    const ClassifyOptions opts = s.classify_options();
    const ClassifyResult full = classify_full(model, s.initial_state, opts);
    const ClassifyResult reduced = classify_reduced(rp, aggregate(s.initial_state), opts);

    Table table("classification", {"model", "verdict", "final_infected", "tail_min"});
    table.row("full", to_string(full.verdict), full.final_infected, full.tail_min);
    table.row("reduced", to_string(reduced.verdict), reduced.final_infected, reduced.tail_min);

    json summary = header(s, Request::Classify);
    summary["full"] = to_json(full);
    summary["full"]["empirical"] = s.patches.size() > 1;
    summary["reduced"] = to_json(reduced);
    summary["agree"] = full.verdict == reduced.verdict;
    summary["r0_reduced"] = r0_reduced(rp);
    summary["options"] = to_json(opts);
    summary["outside_proven_scope"] = outside_proven_scope(s);
    sink.write({table}, summary);
}

void run_validate(const Scenario& s, const std::vector<Diagnostic>& diagnostics, const Sink& sink)
{
    json summary = header(s, Request::Validate);
    summary["horizon"] = s.horizon;
    summary["valid"] = !has_errors(diagnostics);
    summary["diagnostics"] = to_json(diagnostics);
    summary["classify"] = to_json(s.classify_options());
    sink.write({}, summary);
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Two-time-scale discrete SEIRS metapopulation models", "episcale"};
    app.require_subcommand(1);
    Options opt;

    const auto add_common = [&opt](CLI::App* sub) {
        sub->add_option("scenario", opt.scenario_path, "Scenario file (JSON)")->required();
        sub->add_option("--out", opt.out_dir, "Write tables and summary.json into this directory");
        sub->add_option("--workers", opt.workers, "Worker threads for parallel kernels")
            ->check(CLI::PositiveNumber);
    };

    struct Entry {
        Request request;
        CLI::App* app;
    };
    std::vector<Entry> subs;
    const std::pair<Request, const char*> commands[] = {
        {Request::Simulate, "Simulate the full model and write the trajectory"},
        {Request::R0, "Local and reduced basic reproduction numbers"},
        {Request::Reduce, "Stationary profiles and reduced-model coefficients"},
        {Request::VerifyK, "Distance of full-model equilibria to the lifted reduced equilibrium over k"},
        {Request::Region, "Two-patch eradication region over the stationary shares"},
        {Request::Classify, "Eradication or persistence for the full and reduced models"},
        {Request::Validate, "Parse and check a scenario file"},
    };
    for (const auto& [request, help] : commands) {
        CLI::App* sub = app.add_subcommand(std::string(to_string(request)), help);
        add_common(sub);
        if (request == Request::VerifyK) {
            sub->add_option("--ks", opt.ks, "Comma-separated list of k values")->delimiter(',')->check(
                CLI::PositiveNumber);
        }
        if (request == Request::Region) {
            sub->add_option("--resolution", opt.resolution, "Grid nodes per axis")->check(CLI::Range(2, 100000));
        }
        subs.push_back({request, sub});
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        std::ostringstream o, e2;
        const int code = app.exit(e, o, e2);
        out << o.str();
        err << e2.str();
        return code == 0 ? kExitOk : kExitInvalid;
    }

    Request request = Request::Validate;
    for (const auto& e : subs) {
        if (e.app->parsed()) {
            request = e.request;
        }
    }

    try {
        const Scenario s = load_scenario(opt.scenario_path);
        const std::vector<Diagnostic> diagnostics = validate_scenario(s, request);
        for (const auto& d : diagnostics) {
            err << d.format() << '\n';
        }
        if (has_errors(diagnostics)) {
            return kExitInvalid;
        }
        Sink sink{opt.out_dir.empty() ? std::nullopt : std::optional<fs::path>(opt.out_dir), out};
        switch (request) {
        case Request::Simulate: run_simulate(s, sink); break;
        case Request::R0: run_r0(s, sink); break;
        case Request::Reduce: run_reduce(s, sink); break;
        case Request::VerifyK: run_verify_k(s, opt, sink); break;
        case Request::Region: run_region(s, opt, sink); break;
        case Request::Classify: run_classify(s, sink); break;
        case Request::Validate: run_validate(s, diagnostics, sink); break;
        }
        return kExitOk;
    } catch (const ScenarioError& e) {
        for (const auto& d : e.diagnostics()) {
            err << d.format() << '\n';
        }
        return kExitInvalid;
    } catch (const TimescaleError& e) {
        err << "error: " << e.what() << '\n';
        for (const auto& entry : e.completed()) {
            err << "  completed k=" << entry.k << " distance=" << num(entry.distance) << '\n';
        }
        return kExitNumerical;
    } catch (const NumericalError& e) {
        err << "error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const HypothesisError& e) {
        err << "error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::invalid_argument& e) {
        // validation, unsupported and precondition errors
        err << "error: " << e.what() << '\n';
        return kExitInvalid;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kExitInvalid;
    } catch (const std::ios_base::failure& e) {
        err << "error: " << e.what() << '\n';
        return kExitInvalid;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitNumerical;
    }
}

} // namespace episcale

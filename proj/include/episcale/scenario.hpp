#pragma once

// Scenario files: a JSON description of one complete run. The format is
// documented in docs/scenario-format.md.

#include "episcale/classify.hpp"
#include "episcale/metapop.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace episcale {

struct Scenario {
    std::string name;
    std::vector<EpidemicParams> patches;
    MovementModel movement;
    MetapopState initial_state;
    std::size_t horizon = 0;
    /// Overrides from the optional "classify" block.
    std::optional<ClassifyOptions> classify;

    MetapopModel model() const { return MetapopModel(patches, movement); }
    ClassifyOptions classify_options() const { return classify.value_or(ClassifyOptions{}); }

    bool operator==(const Scenario& other) const;
};

enum class Severity { Warning, Error };

std::string_view to_string(Severity s);

struct Diagnostic {
    Severity severity = Severity::Error;
    /// e.g. "patches[1].sigma_I", "movement.E"; empty for document-level problems
    std::string path;
    std::string message;

    std::string format() const;
};

/// Parse or schema failure. Carries every problem found, not just the first.
class ScenarioError : public std::invalid_argument {
public:
    explicit ScenarioError(std::vector<Diagnostic> diagnostics);
    const std::vector<Diagnostic>& diagnostics() const noexcept { return diagnostics_; }

private:
    std::vector<Diagnostic> diagnostics_;
};

/// Throws ScenarioError. Syntax errors report line and column.
Scenario parse_scenario(std::string_view text);

/// Reads the file; an unreadable file is a ScenarioError.
Scenario load_scenario(const std::string& path);

/// Canonical JSON text: sorted keys, round-trip double formatting.
std::string serialize_scenario(const Scenario& s);

enum class Request { Validate, Simulate, R0, Reduce, VerifyK, Region, Classify };

std::string_view to_string(Request r);

/// Cross-field rules for a subcommand. Empty output means runnable; any
/// Error entry means the subcommand cannot run on this scenario.
std::vector<Diagnostic> validate_scenario(const Scenario& s, Request request);

bool has_errors(const std::vector<Diagnostic>& diagnostics);

} // namespace episcale

#pragma once

#include "ezb/core/clock.hpp"
#include "ezb/core/model.hpp"
#include "ezb/core/serialize.hpp"
#include "ezb/llm/gateway.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ezb::planner {

// Structured reply of the combined disentangle + decompose call.
struct PlannerOutput {
    std::map<Domain, std::string> factors;
    std::map<Domain, std::string> directives;
    std::optional<std::string> rationale;

    bool operator==(const PlannerOutput&) const = default;
};

// Accepts an optional Markdown fence around the JSON object. Strings are
// trimmed; unknown top-level keys are ignored. Throws Error(schema_violation).
PlannerOutput parse_planner_output(std::string_view text);
json to_json(const PlannerOutput& out);

// Planner log, in the order the stages completed.
struct TraceEvent {
    std::string stage; // "image" | "factors" | "directives" | "rationale" | "bypass"
    json data;
    bool operator==(const TraceEvent&) const = default;
};

struct PlannerConfig {
    std::string template_text;       // carries a {{user_prompt}} slot
    std::string image_template_text; // carries {{media_type}}, {{size}}, {{digest}}
    double temperature = 0.0;
    int max_tokens = 1024;
    bool no_reasoning = false;
};

struct PlanResult {
    Plan plan;
    SemanticFactorSet factors;
    std::vector<TraceEvent> trace;
    UsageLedger usage; // planner calls only
};

class Planner {
public:
    Planner(llm::Gateway& gateway, PlannerConfig config, Clock& clock);

    // One gateway round trip (plus at most one schema-repair retry). The
    // directives from the same reply are kept for the matching decompose().
    SemanticFactorSet disentangle(const UserIntent& intent);

    // Routes each factor to one directive: the model's directive text when the
    // last disentangle produced one for that domain, the factor text otherwise.
    Plan decompose(const SemanticFactorSet& factors, const UserIntent& intent);

    Plan plan(const UserIntent& intent) { return plan_with_trace(intent).plan; }
    PlanResult plan_with_trace(const UserIntent& intent);

    [[nodiscard]] const std::vector<TraceEvent>& trace() const { return trace_; }
    [[nodiscard]] const UsageLedger& usage() const { return usage_; }

private:
    std::string prompt_text(const UserIntent& intent);
    PlannerOutput request_output(const std::string& prompt);

    llm::Gateway& gateway_;
    PlannerConfig config_;
    Clock& clock_;
    std::vector<TraceEvent> trace_;
    UsageLedger usage_;
    std::optional<PlannerOutput> last_;
};

// Plan id derived from the plan content, so replays produce identical provenance.
std::string plan_provenance(const UserIntent& intent, const std::map<Domain, std::string>& directives);

} // namespace ezb::planner

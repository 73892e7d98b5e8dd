#pragma once

#include "ezb/agents/debug_agent.hpp"
#include "ezb/core/clock.hpp"
#include "ezb/core/model.hpp"
#include "ezb/core/serialize.hpp"
#include "ezb/exec/executor.hpp"
#include "ezb/llm/gateway.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ezb::agents {

double default_temperature(Domain d);
inline constexpr int kDefaultRefineBudget = 5;

struct SubAgentProfile {
    Domain domain = Domain::geo;
    // Carries {{stage}}, {{directive}}, {{constraints}}, {{manifest}} and {{missing}} slots.
    std::string system_prompt;
    double temperature = 0.0;
    int refine_budget = kDefaultRefineBudget;
    int max_tokens = 1024;

    static SubAgentProfile defaults(Domain d, std::string system_prompt = {});
    void validate() const;
};

enum class RefineStatus { in_progress, succeeded, failed };
std::string_view to_string(RefineStatus s);

struct Attempt {
    CodeSnippet snippet;
    ValidationReport report;
};

struct RefineState {
    Directive directive;
    ConstraintSet constraints;
    CodeSnippet current;
    std::vector<Attempt> attempts;
    RefineStatus status = RefineStatus::in_progress;
    int debug_calls = 0;
    std::vector<std::string> strategies;
};

struct SubResult {
    Domain domain = Domain::geo;
    RefineStatus status = RefineStatus::failed;
    std::optional<ConstraintSet> constraints;
    std::optional<CodeSnippet> final_snippet;
    std::vector<ValidationReport> reports;
    int debug_calls = 0;
    std::vector<std::string> strategies;
    bool applied = false;
    // Why the domain failed outside of validation (error kind name and message).
    std::optional<std::string> failure_kind;
    std::optional<std::string> failure_message;
    LatencyLedger latency;
    UsageLedger usage;

    [[nodiscard]] int validations() const { return static_cast<int>(reports.size()); }
};

enum class OverallStatus { all_succeeded, partial, all_failed };
std::string_view to_string(OverallStatus s);

struct PlanOutcome {
    std::vector<SubResult> results; // canonical domain order
    LatencyLedger latency;
    UsageLedger usage;
    OverallStatus status = OverallStatus::all_failed;
    std::vector<Diagnostic> warnings;
    std::int64_t state_version = 0;

    [[nodiscard]] const SubResult* find(Domain d) const;
};

json to_json(const SubResult& r);
json to_json(const PlanOutcome& o);

struct RuntimeOptions {
    bool sequential = false;
    // Off: refine budget forced to 1 and the debug agent is never consulted.
    bool autonomy = true;
};

// Parses a grounding reply: {"constraints": [{"path": p, "value": v}, ...]} or
// {"constraints": {p: v, ...}}. Throws Error(schema_violation).
ConstraintSet parse_constraints(Domain domain, std::string_view text);

// Appends canonical set-commands for every constraint the body does not
// already enforce. Throws Error(constraint_unsatisfiable) when a constraint
// cannot be written in the command grammar.
std::string inject_constraints(const std::string& body, const ConstraintSet& constraints,
                               const exec::AttributeSchema& schema = exec::AttributeSchema::builtin());

class SubAgentRuntime {
public:
    SubAgentRuntime(llm::Gateway& gateway, exec::Executor& executor, const DebugAgent& debug, Clock& clock,
                    const exec::AttributeSchema& schema = exec::AttributeSchema::builtin());

    ConstraintSet ground_constraints(const Directive& directive, const SubAgentProfile& profile,
                                     UsageLedger* lane = nullptr);

    CodeSnippet generate_snippet(const Directive& directive, const ConstraintSet& constraints,
                                 const SubAgentProfile& profile, const exec::SceneManifest& manifest,
                                 UsageLedger* lane = nullptr);

    // Propose-verify-refine. Executor loss ends the cycle as failed and rethrows.
    RefineState refine(const Directive& directive, const ConstraintSet& constraints, CodeSnippet first,
                       const SubAgentProfile& profile, const exec::SceneManifest& manifest, bool autonomy,
                       UsageLedger* lane = nullptr);

    // Grounding, generation and refinement for one domain; never throws.
    SubResult run_domain(const Directive& directive, const SubAgentProfile& profile,
                         const exec::SceneManifest& manifest, bool autonomy);

    // Runs every domain (concurrently unless sequential), then applies the
    // validated snippets in canonical order.
    PlanOutcome execute_plan(const Plan& plan, const std::map<Domain, SubAgentProfile>& profiles,
                             RuntimeOptions options = {});

private:
    llm::CompletionRequest request_for(const SubAgentProfile& profile, const std::string& stage,
                                       const std::map<std::string, std::string>& slots, std::string payload) const;

    llm::Gateway& gateway_;
    exec::Executor& executor_;
    const DebugAgent& debug_;
    Clock& clock_;
    const exec::AttributeSchema& schema_;
};

} // namespace ezb::agents

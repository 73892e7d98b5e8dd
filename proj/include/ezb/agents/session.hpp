#pragma once

#include "ezb/agents/runtime.hpp"
#include "ezb/planner/planner.hpp"

namespace ezb::agents {

struct SessionConfig {
    planner::PlannerConfig planner;
    std::map<Domain, SubAgentProfile> profiles;
    bool no_autonomy = false;
    bool sequential = false;
    // Renders taken after application (view indices).
    std::vector<int> views{0, 1};
    int render_width = 512;
    int render_height = 512;
};

struct RenderRecord {
    int view_index = 0;
    std::optional<exec::RenderImage> image;
    std::optional<std::string> error;
};

struct SessionReport {
    UserIntent intent;
    Plan plan;
    SemanticFactorSet factors;
    std::vector<planner::TraceEvent> trace;
    PlanOutcome outcome;
    std::vector<RenderRecord> renders;
    UsageLedger usage;     // planner lane, then domain lanes in canonical order
    LatencyLedger latency; // planner + outcome + renders
};

json to_json(const SessionReport& r);

// plan -> execute_plan -> renders. Planner failures propagate; everything after
// the plan is reported per domain.
SessionReport run_session(const UserIntent& intent, const SessionConfig& config, llm::Gateway& gateway,
                          exec::Executor& executor, const DebugAgent& debug, Clock& clock,
                          const exec::AttributeSchema& schema = exec::AttributeSchema::builtin());

} // namespace ezb::agents

#pragma once

#include "ezb/core/model.hpp"
#include "ezb/exec/scene.hpp"
#include "ezb/llm/gateway.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ezb::agents {

struct RepairStrategy {
    std::string id;
    std::string matches; // diagnostic codes the strategy fires on
    std::string action;
};

// Rule table in application order; the last entry is the model-backed fallback.
const std::vector<RepairStrategy>& repair_strategies();

// Case-insensitive edit distance.
std::size_t levenshtein_ci(std::string_view a, std::string_view b);

// Closest manifest name within `max_distance`; ties go to the earlier name. Never returns `name` itself.
std::optional<std::string> nearest_name(std::string_view name, const std::vector<std::string>& names,
                                        std::size_t max_distance = 2);

struct RepairOutcome {
    CodeSnippet snippet;
    // Ids of the strategies that fired, in order.
    std::vector<std::string> strategies;
};

// Stateless; one instance serves every domain concurrently.
class DebugAgent {
public:
    // `gateway` may be null, in which case rule misses are Unrepairable.
    DebugAgent(llm::Gateway* gateway, std::string system_prompt,
               const exec::AttributeSchema& schema = exec::AttributeSchema::builtin(), int max_tokens = 1024);

    // Precondition: report failed. Output generation is input + 1 and its body differs from the input.
    RepairOutcome repair(const CodeSnippet& snippet, const ValidationReport& report, const exec::SceneManifest& manifest,
                         UsageLedger* lane = nullptr) const;

    // Rule pass only; nullopt when no rule changed the body.
    [[nodiscard]] std::optional<RepairOutcome> apply_rules(const CodeSnippet& snippet, const ValidationReport& report,
                                                           const exec::SceneManifest& manifest) const;

private:
    llm::Gateway* gateway_;
    std::string system_prompt_;
    const exec::AttributeSchema& schema_;
    int max_tokens_;
};

} // namespace ezb::agents

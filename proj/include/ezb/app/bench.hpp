#pragma once

#include "ezb/agents/session.hpp"
#include "ezb/app/config.hpp"
#include "ezb/core/errors.hpp"
#include "ezb/eval/report.hpp"
#include "ezb/exec/executor.hpp"

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace ezb::app {

struct EpisodeSpec {
    std::string id;
    std::string scenario;
    std::string scene;      // SimScene fixture (mock) or .blend path (bridge); resolved
    std::string transcript; // replay transcript for this episode, resolved; empty = config default
    std::optional<std::string> prompt; // generated from the sub-tasks when absent
    std::vector<eval::SubTaskSpec> subtasks;
    int trials = 1;

    void validate() const;
};

// {"episodes": [{"id", "scenario", "scene", "transcript"?, "prompt"?, "trials"?, "subtasks": [...]}]}
// Relative paths resolve against `base_dir`. Malformed JSON raises
// Error(parse_error) naming line and column.
std::vector<EpisodeSpec> parse_episodes(std::string_view text, const std::string& base_dir = ".");
std::vector<EpisodeSpec> load_episodes(const std::string& path);

// Seeded template grammar over the sub-task target labels.
std::string generate_prompt(const std::vector<eval::SubTaskSpec>& subtasks, std::uint64_t seed);
std::uint64_t trial_seed(std::uint64_t seed, const std::string& episode_id, int trial);

// Session plumbing built from a RunConfig.
std::unique_ptr<Clock> make_clock(const RunConfig& config);
exec::AttributeSchema load_schema(const RunConfig& config);
std::unique_ptr<exec::Executor> make_executor(const RunConfig& config, const std::string& scene_override = {});
agents::SessionConfig make_session_config(const RunConfig& config);
std::unique_ptr<eval::EmbeddingProvider> make_embedder(const RunConfig& config);
std::shared_ptr<llm::ChatProvider> make_chat_provider(const RunConfig& config, const std::string& transcript_override = {});
std::optional<llm::PriceTable> load_prices(const RunConfig& config);

// Every episode x trial, sequentially. Trial failures become misses.
eval::BenchResults run_bench(const std::vector<EpisodeSpec>& episodes, const RunConfig& config, std::uint64_t seed,
                             std::ostream* progress = nullptr);

// Exit-code taxonomy shared by the CLI.
namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int generic = 1;
inline constexpr int config = 2;
inline constexpr int provider = 3;
inline constexpr int executor = 4;
inline constexpr int partial = 5;
} // namespace exit_code

int exit_code_for(ErrorKind kind);
int exit_code_for(const agents::PlanOutcome& outcome);

} // namespace ezb::app

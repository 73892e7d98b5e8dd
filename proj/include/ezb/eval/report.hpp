#pragma once

#include "ezb/eval/metrics.hpp"
#include "ezb/llm/gateway.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace ezb::eval {

struct SubTaskRecord {
    SubTaskSpec spec;
    Outcome outcome = Outcome::miss;
    std::optional<std::string> predicted;
    // Raw (unscaled) score of the target label.
    std::optional<double> target_score;
    std::optional<std::string> error;
};

struct TrialRecord {
    std::string episode_id;
    std::string scenario;
    int trial = 0;
    std::string prompt;
    std::string status; // overall plan status, or "error"
    std::optional<std::string> failure;
    std::vector<SubTaskRecord> subtasks;
    LatencyLedger latency;
    UsageLedger usage;

    [[nodiscard]] double tcr() const;
};

struct BenchResults {
    std::string model;
    std::uint64_t seed = 0;
    double display_scale = 100.0;
    std::vector<TrialRecord> trials;
};

std::string_view to_string(Outcome o);
Outcome outcome_from_string(std::string_view s);

json to_json(const SubTaskRecord& r);
json to_json(const TrialRecord& r);
json to_json(const BenchResults& r);
BenchResults bench_results_from_json(const json& j);

// Seconds with two decimals, rounded half-up from integer microseconds.
std::string format_seconds(std::int64_t micros);
// "llm / render / other / total" in seconds.
std::string format_latency_row(const LatencyLedger& ledger);

// Prompt-editing column order and labels.
inline constexpr std::array<Domain, 5> kScoreColumns = {Domain::geo, Domain::mat, Domain::bg, Domain::light, Domain::cam};
std::string_view score_column_label(Domain d);

struct Report {
    json document;
    std::string text;
};

// Tables: prompt editing (mean display-scaled target score per domain),
// TCR per scenario, latency and tokens per trial (means, half-up). Scenarios
// appear in first-seen order followed by an "all" row when there is any trial.
Report build_report(const BenchResults& results, const llm::PriceTable* prices = nullptr);

} // namespace ezb::eval

#pragma once

#include "ezb/agents/runtime.hpp"
#include "ezb/llm/gateway.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <variant>

namespace ezb::app {

// Subset of TOML used by ezblender.toml:
//
//   # comment
//   [section]            or [section.sub]
//   key = "string"       basic strings with \" \\ \n \t escapes
//   key = 42             integers
//   key = 0.4            floats (an integer is accepted where a float is expected)
//   key = true | false
//
// Keys are bare (`[A-Za-z0-9_-]+`). No arrays, inline tables or multi-line strings.
using TomlValue = std::variant<bool, std::int64_t, double, std::string>;

struct TomlDocument {
    std::map<std::string, std::map<std::string, TomlValue>> sections;
};

// Throws Error(config_error) naming the offending line.
TomlDocument parse_toml(std::string_view text);
std::string dump_toml(const TomlDocument& doc);

struct BackendConfig {
    std::string kind = "mock"; // mock | bridge
    std::string scene;         // mock: SimScene JSON fixture
    std::string endpoint = "127.0.0.1:7045";
    std::string schema;        // attribute schema JSON; builtin when empty
    std::int64_t render_cost_micros = 0;
};

struct PlannerSection {
    std::string template_path;
    std::string image_template_path;
    double temperature = 0.0;
    int max_tokens = 1024;
};

struct SubAgentSection {
    std::string template_path;
    double temperature = 0.0;
    int refine_budget = agents::kDefaultRefineBudget;
    int max_tokens = 1024;
};

struct AblationConfig {
    bool no_reasoning = false;
    bool no_autonomy = false;
    bool sequential = false;
};

struct EvaluationConfig {
    bool enabled = true;
    std::string embedder = "lookup"; // lookup | http
    std::string table;
    std::string endpoint;
    double display_scale = 100.0;
    bool average_views = false;
};

struct RunSection {
    std::string clock = "virtual"; // virtual | wall
    std::string output_dir = "out";
};

struct RunConfig {
    // Relative paths resolve against this directory (the config file's).
    std::string base_dir = ".";

    llm::ProviderConfig provider;
    BackendConfig backend;
    PlannerSection planner;
    std::map<Domain, SubAgentSection> subagents;
    std::string debug_template_path;
    AblationConfig ablation;
    EvaluationConfig evaluation;
    RunSection run;

    RunConfig();

    static RunConfig from_toml(const TomlDocument& doc, std::string base_dir = ".");
    // Parses, validates and checks that every referenced template exists.
    static RunConfig load(const std::string& path);

    [[nodiscard]] TomlDocument to_toml() const;
    [[nodiscard]] std::string dump() const { return dump_toml(to_toml()); }

    [[nodiscard]] std::string resolve(const std::string& path) const;
    void validate(bool check_files) const;
};

} // namespace ezb::app

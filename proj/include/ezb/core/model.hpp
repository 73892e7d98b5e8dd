#pragma once

#include "ezb/core/domain.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ezb {

// Header line of the mock executor's command grammar. Directives must never carry it.
inline constexpr std::string_view kCommandSentinel = "#ezcmd v1";
inline constexpr std::string_view kCommandSentinelPrefix = "#ezcmd";

std::string trim(std::string_view s);

struct ImageBlob {
    std::vector<std::uint8_t> bytes;
    std::string media_type;

    bool operator==(const ImageBlob&) const = default;
};

class UserIntent {
public:
    explicit UserIntent(std::string text, std::optional<ImageBlob> image = std::nullopt);

    [[nodiscard]] const std::string& text() const { return text_; }
    [[nodiscard]] const std::optional<ImageBlob>& image() const { return image_; }

    bool operator==(const UserIntent&) const = default;

private:
    std::string text_;
    std::optional<ImageBlob> image_;
};

class SemanticFactorSet {
public:
    SemanticFactorSet() = default;
    explicit SemanticFactorSet(std::map<Domain, std::string> entries);

    [[nodiscard]] const std::map<Domain, std::string>& entries() const { return entries_; }
    [[nodiscard]] bool empty() const { return entries_.empty(); }
    [[nodiscard]] std::size_t size() const { return entries_.size(); }
    [[nodiscard]] std::vector<Domain> domains() const;

    bool operator==(const SemanticFactorSet&) const = default;

private:
    std::map<Domain, std::string> entries_;
};

class Directive {
public:
    Directive(Domain domain, std::string specification, std::string provenance);

    [[nodiscard]] Domain domain() const { return domain_; }
    [[nodiscard]] const std::string& specification() const { return specification_; }
    [[nodiscard]] const std::string& provenance() const { return provenance_; }

    bool operator==(const Directive&) const = default;

private:
    Domain domain_;
    std::string specification_;
    std::string provenance_;
};

class Plan {
public:
    // Sorts directives canonically; rejects duplicates and sizes outside 1..5.
    Plan(UserIntent intent, std::vector<Directive> directives, std::int64_t created_at_micros);

    [[nodiscard]] const UserIntent& intent() const { return intent_; }
    [[nodiscard]] const std::vector<Directive>& directives() const { return directives_; }
    [[nodiscard]] std::int64_t created_at() const { return created_at_; }
    [[nodiscard]] std::vector<Domain> domains() const;

    // Copy of this plan without the directive for `domain`. Throws if that would empty it.
    [[nodiscard]] Plan without(Domain domain) const;

    bool operator==(const Plan&) const = default;

private:
    UserIntent intent_;
    std::vector<Directive> directives_;
    std::int64_t created_at_;
};

class ConstraintValue {
public:
    enum class Kind { scalar, unit, rgb };

    static ConstraintValue scalar(double v);
    static ConstraintValue unit(double v);
    static ConstraintValue rgb(double r, double g, double b);

    [[nodiscard]] Kind kind() const { return kind_; }
    [[nodiscard]] double scalar_value() const { return c_[0]; }
    [[nodiscard]] const std::array<double, 3>& rgb_value() const { return c_; }
    [[nodiscard]] std::vector<double> components() const;

    bool operator==(const ConstraintValue&) const = default;

private:
    ConstraintValue(Kind k, std::array<double, 3> c) : kind_(k), c_(c) {}
    Kind kind_;
    std::array<double, 3> c_;
};

std::string_view to_string(ConstraintValue::Kind k);

// `segment(.segment)+` with segments `[a-z_][a-z0-9_]*`.
bool is_constraint_path(std::string_view path);

class HardConstraint {
public:
    HardConstraint(std::string path, ConstraintValue value);

    [[nodiscard]] const std::string& path() const { return path_; }
    [[nodiscard]] const ConstraintValue& value() const { return value_; }

    bool operator==(const HardConstraint&) const = default;

private:
    std::string path_;
    ConstraintValue value_;
};

class ConstraintSet {
public:
    explicit ConstraintSet(Domain domain, std::vector<HardConstraint> constraints = {});

    [[nodiscard]] Domain domain() const { return domain_; }
    [[nodiscard]] const std::vector<HardConstraint>& constraints() const { return constraints_; }
    [[nodiscard]] bool empty() const { return constraints_.empty(); }

    bool operator==(const ConstraintSet&) const = default;

private:
    Domain domain_;
    std::vector<HardConstraint> constraints_;
};

class CodeSnippet {
public:
    CodeSnippet(Domain domain, std::string body, int generation_index, double temperature);

    [[nodiscard]] Domain domain() const { return domain_; }
    [[nodiscard]] const std::string& body() const { return body_; }
    [[nodiscard]] int generation_index() const { return generation_index_; }
    [[nodiscard]] double temperature() const { return temperature_; }

    // Next generation in the repair chain.
    [[nodiscard]] CodeSnippet repaired(std::string body) const;
    // Same generation, different body (constraint injection, regeneration).
    [[nodiscard]] CodeSnippet with_body(std::string body) const;

    bool operator==(const CodeSnippet&) const = default;

private:
    Domain domain_;
    std::string body_;
    int generation_index_;
    double temperature_;
};

// Machine-readable diagnostic codes shared by every validator backend.
namespace diag {
inline constexpr std::string_view kSyntax = "syntax";
inline constexpr std::string_view kUnknownIdentifier = "unknown-identifier";
inline constexpr std::string_view kOutOfRange = "out-of-range";
inline constexpr std::string_view kMissingReference = "missing-reference";
inline constexpr std::string_view kTypeMismatch = "type-mismatch";
inline constexpr std::string_view kRuntime = "runtime";
inline constexpr std::string_view kExecutorUnreachable = "executor-unreachable";
inline constexpr std::string_view kConstraintConflict = "constraint-conflict";
std::vector<std::string_view> vocabulary();
} // namespace diag

struct Diagnostic {
    std::string code;
    std::string message;
    std::optional<int> line;
    // Offending token (identifier or path), when the validator can name it.
    std::optional<std::string> subject;
    std::vector<std::string> candidates;

    bool operator==(const Diagnostic&) const = default;
};

enum class Verdict { pass, fail };

class ValidationReport {
public:
    static ValidationReport pass();
    static ValidationReport fail(std::vector<Diagnostic> diagnostics);

    [[nodiscard]] Verdict verdict() const { return verdict_; }
    [[nodiscard]] bool passed() const { return verdict_ == Verdict::pass; }
    [[nodiscard]] const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }

    bool operator==(const ValidationReport&) const = default;

private:
    ValidationReport(Verdict v, std::vector<Diagnostic> d) : verdict_(v), diagnostics_(std::move(d)) {}
    Verdict verdict_;
    std::vector<Diagnostic> diagnostics_;
};

struct LatencyLedger {
    std::int64_t llm_micros = 0;
    std::int64_t render_micros = 0;
    std::int64_t other_micros = 0;

    // Throws Error(overflow) instead of wrapping.
    [[nodiscard]] std::int64_t total() const;
    LatencyLedger& operator+=(const LatencyLedger& o);

    bool operator==(const LatencyLedger&) const = default;
};

std::int64_t ledger_total(const LatencyLedger& ledger);

struct UsageEntry {
    std::string role;
    std::int64_t prompt_tokens = 0;
    std::int64_t completion_tokens = 0;
    std::int64_t wall_micros = 0;
    // False for calls that failed or were rejected by the token ceiling.
    bool accepted = true;

    [[nodiscard]] std::int64_t tokens() const { return prompt_tokens + completion_tokens; }
    bool operator==(const UsageEntry&) const = default;
};

// Totals are always derived from the per-call entries.
class UsageLedger {
public:
    void add(UsageEntry entry);
    void merge(const UsageLedger& other);

    [[nodiscard]] const std::vector<UsageEntry>& entries() const { return entries_; }
    [[nodiscard]] std::int64_t prompt_tokens() const;
    [[nodiscard]] std::int64_t completion_tokens() const;
    [[nodiscard]] std::int64_t total_tokens() const { return prompt_tokens() + completion_tokens(); }
    [[nodiscard]] std::int64_t llm_micros() const;
    // Per-role token totals; debug lanes ("debug:<domain>") roll up under "debug".
    [[nodiscard]] std::map<std::string, std::int64_t> tokens_by_role() const;

    bool operator==(const UsageLedger&) const = default;

private:
    std::vector<UsageEntry> entries_;
};

std::string role_family(std::string_view role);

std::string subagent_role(Domain d);
std::string debug_role(Domain d);
inline constexpr std::string_view kPlannerRole = "planner";

} // namespace ezb

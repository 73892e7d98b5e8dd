#include "ezb/core/model.hpp"

#include "ezb/core/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

namespace ezb {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::invalid_argument: return "InvalidArgument";
    case ErrorKind::precondition: return "PreconditionViolation";
    case ErrorKind::overflow: return "Overflow";
    case ErrorKind::parse_error: return "ParseError";
    case ErrorKind::config_error: return "ConfigError";
    case ErrorKind::empty_intent: return "EmptyIntent";
    case ErrorKind::empty_factor_set: return "EmptyFactorSet";
    case ErrorKind::schema_violation: return "SchemaViolation";
    case ErrorKind::provider_unreachable: return "ProviderUnreachable";
    case ErrorKind::transcript_exhausted: return "TranscriptExhausted";
    case ErrorKind::budget_exceeded: return "BudgetExceeded";
    case ErrorKind::unknown_model: return "UnknownModel";
    case ErrorKind::constraint_unsatisfiable: return "ConstraintUnsatisfiable";
    case ErrorKind::unrepairable: return "Unrepairable";
    case ErrorKind::executor_unreachable: return "ExecutorUnreachable";
    case ErrorKind::protocol_error: return "ProtocolError";
    case ErrorKind::render_failed: return "RenderFailed";
    case ErrorKind::port_in_use: return "PortInUse";
    case ErrorKind::dimension_mismatch: return "DimensionMismatch";
    case ErrorKind::zero_vector: return "ZeroVector";
    case ErrorKind::provider_error: return "ProviderError";
    case ErrorKind::empty_trial_set: return "EmptyTrialSet";
    }
    return "Unknown";
}

namespace {

constexpr std::array<std::string_view, 5> kDomainTags = {"geo", "mat", "light", "cam", "bg"};

bool in_unit(double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; }

} // namespace

std::string_view to_string(Domain d) { return kDomainTags[domain_index(d)]; }

std::optional<Domain> parse_domain(std::string_view tag) {
    for (std::size_t i = 0; i < kDomainTags.size(); ++i) {
        if (kDomainTags[i] == tag) return kAllDomains[i];
    }
    return std::nullopt;
}

Domain domain_from_string(std::string_view tag) {
    if (auto d = parse_domain(tag)) return *d;
    throw Error(ErrorKind::invalid_argument, "unknown domain tag '" + std::string(tag) + "'");
}

std::vector<Domain> canonical_domain_order(std::span<const Domain> domains) {
    std::vector<Domain> out(domains.begin(), domains.end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::string trim(std::string_view s) {
    auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return std::string(s);
}

UserIntent::UserIntent(std::string text, std::optional<ImageBlob> image)
    : text_(std::move(text)), image_(std::move(image)) {
    if (trim(text_).empty()) throw Error(ErrorKind::empty_intent, "prompt text is empty");
    if (image_ && image_->bytes.empty())
        throw Error(ErrorKind::invalid_argument, "reference image has zero length");
}

SemanticFactorSet::SemanticFactorSet(std::map<Domain, std::string> entries) : entries_(std::move(entries)) {
    for (const auto& [d, text] : entries_) {
        if (trim(text).empty())
            throw Error(ErrorKind::invalid_argument,
                        "empty semantic factor for domain " + std::string(to_string(d)));
    }
}

std::vector<Domain> SemanticFactorSet::domains() const {
    std::vector<Domain> out;
    for (const auto& [d, _] : entries_) out.push_back(d);
    return out;
}

Directive::Directive(Domain domain, std::string specification, std::string provenance)
    : domain_(domain), specification_(std::move(specification)), provenance_(std::move(provenance)) {
    if (trim(specification_).empty())
        throw Error(ErrorKind::invalid_argument, "directive specification is empty");
    if (specification_.find(kCommandSentinelPrefix) != std::string::npos)
        throw Error(ErrorKind::invalid_argument, "directive carries executor command text");
}

Plan::Plan(UserIntent intent, std::vector<Directive> directives, std::int64_t created_at_micros)
    : intent_(std::move(intent)), directives_(std::move(directives)), created_at_(created_at_micros) {
    if (directives_.empty() || directives_.size() > kAllDomains.size())
        throw Error(ErrorKind::invalid_argument, "plan must hold between 1 and 5 directives");
    std::stable_sort(directives_.begin(), directives_.end(),
                     [](const Directive& a, const Directive& b) { return a.domain() < b.domain(); });
    for (std::size_t i = 1; i < directives_.size(); ++i) {
        if (directives_[i].domain() == directives_[i - 1].domain())
            throw Error(ErrorKind::invalid_argument,
                        "duplicate directive for domain " + std::string(to_string(directives_[i].domain())));
    }
}

std::vector<Domain> Plan::domains() const {
    std::vector<Domain> out;
    for (const auto& d : directives_) out.push_back(d.domain());
    return out;
}

Plan Plan::without(Domain domain) const {
    std::vector<Directive> kept;
    for (const auto& d : directives_)
        if (d.domain() != domain) kept.push_back(d);
    return Plan(intent_, std::move(kept), created_at_);
}

ConstraintValue ConstraintValue::scalar(double v) {
    if (!std::isfinite(v)) throw Error(ErrorKind::invalid_argument, "scalar constraint must be finite");
    return ConstraintValue(Kind::scalar, {v, 0.0, 0.0});
}

ConstraintValue ConstraintValue::unit(double v) {
    if (!in_unit(v)) throw Error(ErrorKind::invalid_argument, "unit-interval constraint outside [0,1]");
    return ConstraintValue(Kind::unit, {v, 0.0, 0.0});
}

ConstraintValue ConstraintValue::rgb(double r, double g, double b) {
    if (!in_unit(r) || !in_unit(g) || !in_unit(b))
        throw Error(ErrorKind::invalid_argument, "RGB channel outside [0,1]");
    return ConstraintValue(Kind::rgb, {r, g, b});
}

std::vector<double> ConstraintValue::components() const {
    if (kind_ == Kind::rgb) return {c_[0], c_[1], c_[2]};
    return {c_[0]};
}

std::string_view to_string(ConstraintValue::Kind k) {
    switch (k) {
    case ConstraintValue::Kind::scalar: return "scalar";
    case ConstraintValue::Kind::unit: return "unit";
    case ConstraintValue::Kind::rgb: return "rgb";
    }
    return "scalar";
}

bool is_constraint_path(std::string_view path) {
    std::size_t segments = 0;
    std::size_t pos = 0;
    while (true) {
        auto dot = path.find('.', pos);
        auto seg = path.substr(pos, dot == std::string_view::npos ? std::string_view::npos : dot - pos);
        if (seg.empty()) return false;
        if (!(std::islower(static_cast<unsigned char>(seg[0])) || seg[0] == '_')) return false;
        for (char c : seg) {
            auto u = static_cast<unsigned char>(c);
            if (!(std::islower(u) || std::isdigit(u) || c == '_')) return false;
        }
        ++segments;
        if (dot == std::string_view::npos) break;
        pos = dot + 1;
    }
    return segments >= 2;
}

HardConstraint::HardConstraint(std::string path, ConstraintValue value)
    : path_(std::move(path)), value_(value) {
    if (!is_constraint_path(path_))
        throw Error(ErrorKind::invalid_argument, "malformed constraint path '" + path_ + "'");
    if (path_.starts_with("shapekey.")) {
        if (value_.kind() == ConstraintValue::Kind::rgb || !in_unit(value_.scalar_value()))
            throw Error(ErrorKind::invalid_argument, "shape-key constraint must be a value in [0,1]");
    }
}

ConstraintSet::ConstraintSet(Domain domain, std::vector<HardConstraint> constraints)
    : domain_(domain), constraints_(std::move(constraints)) {
    std::set<std::string> seen;
    for (const auto& c : constraints_) {
        if (!seen.insert(c.path()).second)
            throw Error(ErrorKind::invalid_argument, "duplicate constraint path '" + c.path() + "'");
    }
}

CodeSnippet::CodeSnippet(Domain domain, std::string body, int generation_index, double temperature)
    : domain_(domain), body_(std::move(body)), generation_index_(generation_index), temperature_(temperature) {
    if (trim(body_).empty()) throw Error(ErrorKind::invalid_argument, "snippet body is empty");
    if (generation_index_ < 0) throw Error(ErrorKind::invalid_argument, "negative generation index");
    if (!(temperature_ >= 0.0)) throw Error(ErrorKind::invalid_argument, "negative temperature");
}

CodeSnippet CodeSnippet::repaired(std::string body) const {
    return CodeSnippet(domain_, std::move(body), generation_index_ + 1, temperature_);
}

CodeSnippet CodeSnippet::with_body(std::string body) const {
    return CodeSnippet(domain_, std::move(body), generation_index_, temperature_);
}

std::vector<std::string_view> diag::vocabulary() {
    return {kSyntax,       kUnknownIdentifier, kOutOfRange,          kMissingReference,
            kTypeMismatch, kRuntime,           kExecutorUnreachable, kConstraintConflict};
}

ValidationReport ValidationReport::pass() { return ValidationReport(Verdict::pass, {}); }

ValidationReport ValidationReport::fail(std::vector<Diagnostic> diagnostics) {
    if (diagnostics.empty())
        throw Error(ErrorKind::invalid_argument, "failing report needs at least one diagnostic");
    return ValidationReport(Verdict::fail, std::move(diagnostics));
}

std::int64_t LatencyLedger::total() const {
    if (llm_micros < 0 || render_micros < 0 || other_micros < 0)
        throw Error(ErrorKind::invalid_argument, "negative latency component");
    std::int64_t partial = 0;
    std::int64_t sum = 0;
    if (__builtin_add_overflow(llm_micros, render_micros, &partial) ||
        __builtin_add_overflow(partial, other_micros, &sum))
        throw Error(ErrorKind::overflow, "latency total exceeds 64-bit range");
    return sum;
}

LatencyLedger& LatencyLedger::operator+=(const LatencyLedger& o) {
    if (__builtin_add_overflow(llm_micros, o.llm_micros, &llm_micros) ||
        __builtin_add_overflow(render_micros, o.render_micros, &render_micros) ||
        __builtin_add_overflow(other_micros, o.other_micros, &other_micros))
        throw Error(ErrorKind::overflow, "latency ledger merge overflow");
    return *this;
}

std::int64_t ledger_total(const LatencyLedger& ledger) { return ledger.total(); }

void UsageLedger::add(UsageEntry entry) {
    if (entry.prompt_tokens < 0 || entry.completion_tokens < 0)
        throw Error(ErrorKind::invalid_argument, "negative token count");
    entries_.push_back(std::move(entry));
}

void UsageLedger::merge(const UsageLedger& other) {
    entries_.insert(entries_.end(), other.entries_.begin(), other.entries_.end());
}

std::int64_t UsageLedger::prompt_tokens() const {
    std::int64_t n = 0;
    for (const auto& e : entries_) n += e.prompt_tokens;
    return n;
}

std::int64_t UsageLedger::completion_tokens() const {
    std::int64_t n = 0;
    for (const auto& e : entries_) n += e.completion_tokens;
    return n;
}

std::int64_t UsageLedger::llm_micros() const {
    std::int64_t n = 0;
    for (const auto& e : entries_) n += e.wall_micros;
    return n;
}

std::map<std::string, std::int64_t> UsageLedger::tokens_by_role() const {
    std::map<std::string, std::int64_t> out;
    for (const auto& e : entries_) out[role_family(e.role)] += e.tokens();
    return out;
}

std::string role_family(std::string_view role) {
    if (role.starts_with("debug")) return "debug";
    return std::string(role);
}

std::string subagent_role(Domain d) { return "subagent:" + std::string(to_string(d)); }
std::string debug_role(Domain d) { return "debug:" + std::string(to_string(d)); }

} // namespace ezb

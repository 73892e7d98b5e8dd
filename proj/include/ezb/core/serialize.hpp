#pragma once

#include "ezb/core/model.hpp"

#include <nlohmann/json.hpp>

// Canonical JSON forms. Keys are snake_case field names; nlohmann::json keeps
// object keys sorted, which makes every dump canonical.
namespace ezb {

using json = nlohmann::json;

void to_json(json& j, Domain d);
void from_json(const json& j, Domain& d);

json to_json(const UserIntent& v);
json to_json(const SemanticFactorSet& v);
json to_json(const Directive& v);
json to_json(const Plan& v);
json to_json(const ConstraintValue& v);
json to_json(const HardConstraint& v);
json to_json(const ConstraintSet& v);
json to_json(const CodeSnippet& v);
json to_json(const Diagnostic& v);
json to_json(const ValidationReport& v);
json to_json(const LatencyLedger& v);
json to_json(const UsageEntry& v);
json to_json(const UsageLedger& v);

UserIntent intent_from_json(const json& j);
SemanticFactorSet factors_from_json(const json& j);
Directive directive_from_json(const json& j);
Plan plan_from_json(const json& j);
// Arrays of three become rgb; numbers become unit when `unit_hint` is set, scalar otherwise.
ConstraintValue constraint_value_from_json(const json& j, bool unit_hint = false);
HardConstraint constraint_from_json(const json& j);
ConstraintSet constraint_set_from_json(const json& j);
CodeSnippet snippet_from_json(const json& j);
Diagnostic diagnostic_from_json(const json& j);
ValidationReport report_from_json(const json& j);
LatencyLedger latency_from_json(const json& j);
UsageLedger usage_from_json(const json& j);

// Shortest decimal form that round-trips the double.
std::string format_number(double v);

} // namespace ezb

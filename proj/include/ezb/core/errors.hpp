#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ezb {

enum class ErrorKind {
    invalid_argument,
    precondition,
    overflow,
    parse_error,
    config_error,
    // planner / gateway
    empty_intent,
    empty_factor_set,
    schema_violation,
    provider_unreachable,
    transcript_exhausted,
    budget_exceeded,
    unknown_model,
    // sub-agents / debug
    constraint_unsatisfiable,
    unrepairable,
    // executor
    executor_unreachable,
    protocol_error,
    render_failed,
    port_in_use,
    // evaluator
    dimension_mismatch,
    zero_vector,
    provider_error,
    empty_trial_set,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

// Provider-side failures that callers treat uniformly (transport loss, replay exhaustion).
inline bool is_provider_failure(ErrorKind k) {
    return k == ErrorKind::provider_unreachable || k == ErrorKind::transcript_exhausted ||
           k == ErrorKind::budget_exceeded;
}

} // namespace ezb

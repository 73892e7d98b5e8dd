#include "ezb/agents/runtime.hpp"

#include "ezb/core/errors.hpp"
#include "ezb/core/text.hpp"
#include "ezb/exec/script.hpp"

#include <algorithm>
#include <cmath>
#include <future>

namespace ezb::agents {

double default_temperature(Domain d) {
    switch (d) {
    case Domain::geo: return 0.2;
    case Domain::mat: return 0.4;
    case Domain::light: return 0.4;
    case Domain::cam: return 0.1;
    case Domain::bg: return 0.5;
    }
    return 0.0;
}

SubAgentProfile SubAgentProfile::defaults(Domain d, std::string system_prompt) {
    SubAgentProfile p;
    p.domain = d;
    p.system_prompt = std::move(system_prompt);
    p.temperature = default_temperature(d);
    return p;
}

void SubAgentProfile::validate() const {
    if (refine_budget < 1) throw Error(ErrorKind::invalid_argument, "refine_budget must be >= 1");
    if (!(temperature >= 0.0)) throw Error(ErrorKind::invalid_argument, "temperature must be >= 0");
    if (max_tokens < 1) throw Error(ErrorKind::invalid_argument, "max_tokens must be >= 1");
}

std::string_view to_string(RefineStatus s) {
    switch (s) {
    case RefineStatus::in_progress: return "in-progress";
    case RefineStatus::succeeded: return "succeeded";
    case RefineStatus::failed: return "failed";
    }
    return "failed";
}

std::string_view to_string(OverallStatus s) {
    switch (s) {
    case OverallStatus::all_succeeded: return "all-succeeded";
    case OverallStatus::partial: return "partial";
    case OverallStatus::all_failed: return "all-failed";
    }
    return "all-failed";
}

const SubResult* PlanOutcome::find(Domain d) const {
    for (const auto& r : results)
        if (r.domain == d) return &r;
    return nullptr;
}

json to_json(const SubResult& r) {
    json reports = json::array();
    for (const auto& rep : r.reports) reports.push_back(ezb::to_json(rep));
    json j{{"domain", r.domain},
           {"status", to_string(r.status)},
           {"reports", std::move(reports)},
           {"validations", r.validations()},
           {"debug_calls", r.debug_calls},
           {"strategies", r.strategies},
           {"applied", r.applied},
           {"latency", ezb::to_json(r.latency)},
           {"usage", ezb::to_json(r.usage)}};
    j["constraints"] = r.constraints ? ezb::to_json(*r.constraints) : json(nullptr);
    j["final_snippet"] = r.final_snippet ? ezb::to_json(*r.final_snippet) : json(nullptr);
    if (r.failure_kind) j["failure"] = {{"kind", *r.failure_kind}, {"message", r.failure_message.value_or("")}};
    return j;
}

json to_json(const PlanOutcome& o) {
    json results = json::array();
    for (const auto& r : o.results) results.push_back(to_json(r));
    json warnings = json::array();
    for (const auto& w : o.warnings) warnings.push_back(ezb::to_json(w));
    return {{"results", std::move(results)},
            {"latency", ezb::to_json(o.latency)},
            {"usage", ezb::to_json(o.usage)},
            {"status", to_string(o.status)},
            {"warnings", std::move(warnings)},
            {"state_version", o.state_version}};
}

ConstraintSet parse_constraints(Domain domain, std::string_view text) {
    json j;
    try {
        j = json::parse(trim(strip_code_fence(text)));
    } catch (const json::exception& e) {
        throw Error(ErrorKind::schema_violation, std::string("grounding reply is not JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("constraints"))
        throw Error(ErrorKind::schema_violation, "grounding reply needs a 'constraints' field");
    std::vector<std::pair<std::string, json>> raw;
    const auto& c = j["constraints"];
    if (c.is_array()) {
        for (const auto& e : c) {
            if (!e.is_object() || !e.contains("path") || !e.contains("value") || !e["path"].is_string())
                throw Error(ErrorKind::schema_violation, "each constraint needs a string path and a value");
            raw.emplace_back(e["path"].get<std::string>(), e["value"]);
        }
    } else if (c.is_object()) {
        for (const auto& [p, v] : c.items()) raw.emplace_back(p, v);
    } else {
        throw Error(ErrorKind::schema_violation, "'constraints' must be an array or an object");
    }
    std::vector<HardConstraint> out;
    try {
        for (auto& [path, v] : raw) {
            const auto* spec = exec::spec_for_path(path, exec::AttributeSchema::builtin());
            bool unit = spec && spec->type == exec::ValueType::unit;
            out.emplace_back(path, constraint_value_from_json(v, unit));
        }
        return ConstraintSet(domain, std::move(out));
    } catch (const Error& e) {
        throw Error(ErrorKind::schema_violation, std::string("bad constraint: ") + e.what());
    }
}

std::string inject_constraints(const std::string& body, const ConstraintSet& constraints,
                               const exec::AttributeSchema& schema) {
    std::string out = body;
    if (!out.empty() && out.back() != '\n') out += '\n';
    for (const auto& c : constraints.constraints()) {
        if (exec::script_enforces(out, c)) continue;
        const auto* spec = exec::spec_for_path(c.path(), schema);
        auto values = c.value().components();
        if (!spec || exec::arity(spec->type) != values.size())
            throw Error(ErrorKind::constraint_unsatisfiable,
                        "cannot express " + c.path() + " as a set-command");
        out += exec::format_set_command(c.path(), values) + "\n";
        if (!exec::script_enforces(out, c))
            throw Error(ErrorKind::constraint_unsatisfiable, "injected command does not enforce " + c.path());
    }
    return out;
}

SubAgentRuntime::SubAgentRuntime(llm::Gateway& gateway, exec::Executor& executor, const DebugAgent& debug,
                                 Clock& clock, const exec::AttributeSchema& schema)
    : gateway_(gateway), executor_(executor), debug_(debug), clock_(clock), schema_(schema) {}

llm::CompletionRequest SubAgentRuntime::request_for(const SubAgentProfile& profile, const std::string& stage,
                                                    const std::map<std::string, std::string>& slots,
                                                    std::string payload) const {
    auto all = slots;
    all["stage"] = stage;
    all["domain"] = std::string(to_string(profile.domain));
    llm::CompletionRequest req;
    req.role_id = subagent_role(profile.domain);
    req.system_prompt = render_template(profile.system_prompt, all);
    req.user_payload = std::move(payload);
    req.temperature = profile.temperature;
    req.max_tokens = profile.max_tokens;
    return req;
}

ConstraintSet SubAgentRuntime::ground_constraints(const Directive& directive, const SubAgentProfile& profile,
                                                  UsageLedger* lane) {
    if (directive.domain() != profile.domain)
        throw Error(ErrorKind::precondition, "directive for " + std::string(to_string(directive.domain())) +
                                                 " sent to the " + std::string(to_string(profile.domain)) + " sub-agent");
    auto req = request_for(profile, "ground", {{"directive", directive.specification()}},
                           "stage: ground\ndirective: " + directive.specification());
    auto resp = gateway_.complete(req, lane);
    return parse_constraints(directive.domain(), resp.text);
}

CodeSnippet SubAgentRuntime::generate_snippet(const Directive& directive, const ConstraintSet& constraints,
                                              const SubAgentProfile& profile, const exec::SceneManifest& manifest,
                                              UsageLedger* lane) {
    std::string paths;
    for (const auto& e : manifest.entries()) paths += e.path + "\n";
    auto constraints_json = ezb::to_json(constraints)["constraints"].dump();
    auto payload = "stage: generate\ndirective: " + directive.specification() + "\nconstraints: " + constraints_json;

    auto generate = [&](const std::string& missing) {
        auto req = request_for(profile, "generate",
                               {{"directive", directive.specification()},
                                {"constraints", constraints_json},
                                {"manifest", paths},
                                {"missing", missing}},
                               missing.empty() ? payload : payload + "\nmissing constraints: " + missing);
        auto text = trim(strip_code_fence(gateway_.complete(req, lane).text));
        if (text.empty()) text = std::string(kCommandSentinel);
        return text + "\n";
    };
    auto missing_paths = [&](const std::string& body) {
        std::string out;
        for (const auto& c : constraints.constraints())
            if (!exec::script_enforces(body, c)) out += (out.empty() ? "" : " ") + c.path();
        return out;
    };

    auto body = generate("");
    if (auto missing = missing_paths(body); !missing.empty()) {
        body = generate(missing);
        if (!missing_paths(body).empty()) body = inject_constraints(body, constraints, schema_);
    }
    return CodeSnippet(directive.domain(), std::move(body), 0, profile.temperature);
}

RefineState SubAgentRuntime::refine(const Directive& directive, const ConstraintSet& constraints, CodeSnippet first,
                                    const SubAgentProfile& profile, const exec::SceneManifest& manifest, bool autonomy,
                                    UsageLedger* lane) {
    RefineState st{directive, constraints, std::move(first), {}, RefineStatus::in_progress, 0, {}};
    const int budget = autonomy ? profile.refine_budget : 1;
    while (st.status == RefineStatus::in_progress) {
        auto vr = executor_.validate(st.current);
        st.attempts.push_back({st.current, vr.report});
        if (vr.report.passed()) {
            st.status = RefineStatus::succeeded;
            break;
        }
        if (!autonomy) {
            st.status = RefineStatus::failed;
            break;
        }
        // Every observed failure gets exactly one repair, including the one that exhausts the budget.
        ++st.debug_calls;
        auto fixed = debug_.repair(st.current, vr.report, manifest, lane);
        st.strategies.insert(st.strategies.end(), fixed.strategies.begin(), fixed.strategies.end());
        st.current = fixed.snippet.with_body(inject_constraints(fixed.snippet.body(), constraints, schema_));
        if (static_cast<int>(st.attempts.size()) >= budget) st.status = RefineStatus::failed;
    }
    return st;
}

SubResult SubAgentRuntime::run_domain(const Directive& directive, const SubAgentProfile& profile,
                                      const exec::SceneManifest& manifest, bool autonomy) {
    SubResult r;
    r.domain = directive.domain();
    auto start = clock_.now_micros();
    std::optional<RefineState> st;
    try {
        profile.validate();
        auto constraints = ground_constraints(directive, profile, &r.usage);
        r.constraints = constraints;
        auto first = generate_snippet(directive, constraints, profile, manifest, &r.usage);
        st = refine(directive, constraints, std::move(first), profile, manifest, autonomy, &r.usage);
    } catch (const Error& e) {
        r.failure_kind = std::string(to_string(e.kind()));
        r.failure_message = e.what();
    } catch (const std::exception& e) {
        r.failure_kind = "Internal";
        r.failure_message = e.what();
    }
    if (st) {
        for (const auto& a : st->attempts) r.reports.push_back(a.report);
        r.debug_calls = st->debug_calls;
        r.strategies = st->strategies;
        if (st->status == RefineStatus::succeeded) {
            r.status = RefineStatus::succeeded;
            r.final_snippet = st->attempts.back().snippet;
        }
    }
    r.latency.llm_micros = r.usage.llm_micros();
    r.latency.other_micros = std::max<std::int64_t>(0, clock_.now_micros() - start - r.latency.llm_micros);
    return r;
}

namespace {

void mark_failed(SubResult& r, std::string kind, std::string message) {
    r.status = RefineStatus::failed;
    r.applied = false;
    r.failure_kind = std::move(kind);
    r.failure_message = std::move(message);
}

} // namespace

PlanOutcome SubAgentRuntime::execute_plan(const Plan& plan, const std::map<Domain, SubAgentProfile>& profiles,
                                          RuntimeOptions options) {
    for (const auto& d : plan.directives()) {
        if (!profiles.count(d.domain()))
            throw Error(ErrorKind::precondition, "no profile for domain " + std::string(to_string(d.domain())));
    }
    PlanOutcome out;
    exec::SceneManifest manifest;
    bool executor_lost = false;
    std::string lost_message;
    try {
        manifest = executor_.introspect();
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::executor_unreachable) throw;
        executor_lost = true;
        lost_message = e.what();
    }

    if (executor_lost) {
        for (const auto& d : plan.directives()) {
            SubResult r;
            r.domain = d.domain();
            mark_failed(r, std::string(to_string(ErrorKind::executor_unreachable)), lost_message);
            out.results.push_back(std::move(r));
        }
    } else if (options.sequential) {
        for (const auto& d : plan.directives())
            out.results.push_back(run_domain(d, profiles.at(d.domain()), manifest, options.autonomy));
    } else {
        std::vector<std::future<SubResult>> lanes;
        for (const auto& d : plan.directives()) {
            lanes.push_back(std::async(std::launch::async, [this, &d, &profiles, &manifest, &options] {
                return run_domain(d, profiles.at(d.domain()), manifest, options.autonomy);
            }));
        }
        for (auto& f : lanes) out.results.push_back(f.get());
    }

    // Application: one serialized lane, canonical order, last writer wins.
    auto apply_start = clock_.now_micros();
    for (std::size_t i = 0; i < out.results.size(); ++i) {
        auto& ri = out.results[i];
        if (ri.status != RefineStatus::succeeded || !ri.constraints) continue;
        for (std::size_t j = i + 1; j < out.results.size(); ++j) {
            const auto& rj = out.results[j];
            if (rj.status != RefineStatus::succeeded || !rj.constraints) continue;
            for (const auto& ci : ri.constraints->constraints()) {
                for (const auto& cj : rj.constraints->constraints()) {
                    if (!exec::paths_overlap(ci.path(), cj.path())) continue;
                    out.warnings.push_back(Diagnostic{
                        std::string(diag::kConstraintConflict),
                        ci.path() + " (" + std::string(to_string(ri.domain)) + ") overlaps " + cj.path() + " (" +
                            std::string(to_string(rj.domain)) + "); " + std::string(to_string(rj.domain)) +
                            " is applied last",
                        std::nullopt, cj.path(), {}});
                }
            }
        }
    }
    for (auto& r : out.results) {
        if (r.status != RefineStatus::succeeded) continue;
        if (executor_lost) {
            mark_failed(r, std::string(to_string(ErrorKind::executor_unreachable)), lost_message);
            continue;
        }
        try {
            auto er = executor_.execute(*r.final_snippet);
            if (er.report.passed()) {
                r.applied = true;
                out.state_version = er.state_version;
            } else {
                std::string msg = "execute rejected the validated snippet";
                if (!er.report.diagnostics().empty()) msg += ": " + er.report.diagnostics().front().message;
                mark_failed(r, "ApplyFailed", msg);
            }
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::executor_unreachable) throw;
            executor_lost = true;
            lost_message = e.what();
            mark_failed(r, std::string(to_string(e.kind())), lost_message);
        }
    }

    std::size_t ok = 0;
    for (const auto& r : out.results) {
        out.usage.merge(r.usage);
        out.latency += r.latency;
        if (r.status == RefineStatus::succeeded) ++ok;
    }
    out.latency.other_micros += std::max<std::int64_t>(0, clock_.now_micros() - apply_start);
    out.status = ok == out.results.size() ? OverallStatus::all_succeeded
                 : ok == 0                ? OverallStatus::all_failed
                                          : OverallStatus::partial;
    return out;
}

} // namespace ezb::agents

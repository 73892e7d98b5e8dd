#include "ezb/agents/session.hpp"

#include "ezb/core/errors.hpp"

namespace ezb::agents {

json to_json(const SessionReport& r) {
    json trace = json::array();
    for (const auto& t : r.trace) trace.push_back({{"stage", t.stage}, {"data", t.data}});
    json renders = json::array();
    for (const auto& rr : r.renders) {
        json e{{"view_index", rr.view_index}};
        if (rr.image) {
            e["digest"] = rr.image->digest;
            e["width"] = rr.image->width;
            e["height"] = rr.image->height;
            e["render_micros"] = rr.image->render_micros;
        }
        if (rr.error) e["error"] = *rr.error;
        renders.push_back(std::move(e));
    }
    return {{"intent", ezb::to_json(r.intent)},
            {"plan", ezb::to_json(r.plan)},
            {"factors", ezb::to_json(r.factors)},
            {"trace", std::move(trace)},
            {"outcome", to_json(r.outcome)},
            {"renders", std::move(renders)},
            {"usage", ezb::to_json(r.usage)},
            {"latency", ezb::to_json(r.latency)}};
}

SessionReport run_session(const UserIntent& intent, const SessionConfig& config, llm::Gateway& gateway,
                          exec::Executor& executor, const DebugAgent& debug, Clock& clock,
                          const exec::AttributeSchema& schema) {
    auto start = clock.now_micros();
    auto pcfg = config.planner;
    planner::Planner planner(gateway, pcfg, clock);
    auto planned = planner.plan_with_trace(intent);
    auto planner_other = std::max<std::int64_t>(0, clock.now_micros() - start - planned.usage.llm_micros());

    SubAgentRuntime runtime(gateway, executor, debug, clock, schema);
    auto outcome = runtime.execute_plan(planned.plan, config.profiles,
                                        RuntimeOptions{config.sequential, !config.no_autonomy});

    SessionReport rep{intent, planned.plan, planned.factors, planned.trace, std::move(outcome), {}, {}, {}};
    for (int v : config.views) {
        RenderRecord rec;
        rec.view_index = v;
        try {
            rec.image = executor.render(exec::RenderSpec{v, config.render_width, config.render_height, std::nullopt});
            rep.latency.render_micros += rec.image->render_micros;
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::render_failed && e.kind() != ErrorKind::executor_unreachable) throw;
            rec.error = e.what();
        }
        rep.renders.push_back(std::move(rec));
    }
    rep.usage = planned.usage;
    rep.usage.merge(rep.outcome.usage);
    rep.latency.llm_micros += planned.usage.llm_micros();
    rep.latency.other_micros += planner_other;
    rep.latency += rep.outcome.latency;
    return rep;
}

} // namespace ezb::agents

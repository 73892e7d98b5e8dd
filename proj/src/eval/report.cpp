#include "ezb/eval/report.hpp"

#include "ezb/core/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

namespace ezb::eval {

double TrialRecord::tcr() const {
    std::vector<Outcome> o;
    for (const auto& s : subtasks) o.push_back(s.outcome);
    return eval::tcr(o);
}

std::string_view to_string(Outcome o) {
    switch (o) {
    case Outcome::hit: return "hit";
    case Outcome::miss: return "miss";
    case Outcome::render_failed: return "render-failed";
    }
    return "miss";
}

Outcome outcome_from_string(std::string_view s) {
    if (s == "hit") return Outcome::hit;
    if (s == "miss") return Outcome::miss;
    if (s == "render-failed") return Outcome::render_failed;
    throw Error(ErrorKind::parse_error, "unknown outcome '" + std::string(s) + "'");
}

std::string_view score_column_label(Domain d) {
    switch (d) {
    case Domain::geo: return "shapekey";
    case Domain::mat: return "material";
    case Domain::bg: return "background";
    case Domain::light: return "lighting";
    case Domain::cam: return "camera";
    }
    return "";
}

json to_json(const SubTaskRecord& r) {
    json j{{"spec", to_json(r.spec)}, {"outcome", to_string(r.outcome)}};
    j["predicted"] = r.predicted ? json(*r.predicted) : json(nullptr);
    j["target_score"] = r.target_score ? json(*r.target_score) : json(nullptr);
    if (r.error) j["error"] = *r.error;
    return j;
}

json to_json(const TrialRecord& r) {
    json subtasks = json::array();
    for (const auto& s : r.subtasks) subtasks.push_back(to_json(s));
    json j{{"episode_id", r.episode_id}, {"scenario", r.scenario}, {"trial", r.trial},
           {"prompt", r.prompt},         {"status", r.status},     {"subtasks", std::move(subtasks)},
           {"latency", ezb::to_json(r.latency)},
           {"usage", ezb::to_json(r.usage)}};
    if (r.failure) j["failure"] = *r.failure;
    return j;
}

json to_json(const BenchResults& r) {
    json trials = json::array();
    for (const auto& t : r.trials) trials.push_back(to_json(t));
    return {{"model", r.model}, {"seed", r.seed}, {"display_scale", r.display_scale}, {"trials", std::move(trials)}};
}

BenchResults bench_results_from_json(const json& j) {
    try {
        BenchResults r;
        r.model = j.at("model").get<std::string>();
        r.seed = j.at("seed").get<std::uint64_t>();
        r.display_scale = j.at("display_scale").get<double>();
        for (const auto& t : j.at("trials")) {
            TrialRecord tr;
            tr.episode_id = t.at("episode_id").get<std::string>();
            tr.scenario = t.at("scenario").get<std::string>();
            tr.trial = t.at("trial").get<int>();
            tr.prompt = t.at("prompt").get<std::string>();
            tr.status = t.at("status").get<std::string>();
            if (t.contains("failure")) tr.failure = t["failure"].get<std::string>();
            for (const auto& s : t.at("subtasks")) {
                SubTaskRecord sr;
                sr.spec = subtask_from_json(s.at("spec"));
                sr.outcome = outcome_from_string(s.at("outcome").get<std::string>());
                if (!s.at("predicted").is_null()) sr.predicted = s["predicted"].get<std::string>();
                if (!s.at("target_score").is_null()) sr.target_score = s["target_score"].get<double>();
                if (s.contains("error")) sr.error = s["error"].get<std::string>();
                tr.subtasks.push_back(std::move(sr));
            }
            tr.latency = latency_from_json(t.at("latency"));
            tr.usage = usage_from_json(t.at("usage"));
            r.trials.push_back(std::move(tr));
        }
        return r;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::parse_error, std::string("bad benchmark results: ") + e.what());
    }
}

std::string format_seconds(std::int64_t micros) {
    if (micros < 0) throw Error(ErrorKind::invalid_argument, "negative latency");
    std::int64_t centis = (micros + 5000) / 10000;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%lld.%02lld", static_cast<long long>(centis / 100),
                  static_cast<long long>(centis % 100));
    return buf;
}

std::string format_latency_row(const LatencyLedger& l) {
    return format_seconds(l.llm_micros) + " / " + format_seconds(l.render_micros) + " / " +
           format_seconds(l.other_micros) + " / " + format_seconds(l.total());
}

namespace {

std::int64_t mean_half_up(std::int64_t sum, std::int64_t n) { return n == 0 ? 0 : (sum + n / 2) / n; }

std::string fixed2(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string render_table(const std::string& title, const std::vector<std::string>& header,
                         const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> w(header.size());
    for (std::size_t c = 0; c < header.size(); ++c) w[c] = header[c].size();
    for (const auto& r : rows)
        for (std::size_t c = 0; c < r.size(); ++c) w[c] = std::max(w[c], r[c].size());
    auto line = [&](const std::vector<std::string>& cells) {
        std::string out;
        for (std::size_t c = 0; c < cells.size(); ++c) {
            std::string pad(w[c] - cells[c].size(), ' ');
            out += c == 0 ? cells[c] + pad : "  " + pad + cells[c];
        }
        while (!out.empty() && out.back() == ' ') out.pop_back();
        return out + "\n";
    };
    std::string out = title + "\n" + line(header);
    std::size_t total = 0;
    for (auto x : w) total += x;
    out += std::string(total + 2 * (w.size() - 1), '-') + "\n";
    for (const auto& r : rows) out += line(r);
    return out;
}

struct Group {
    std::string name;
    std::vector<const TrialRecord*> trials;
};

} // namespace

Report build_report(const BenchResults& results, const llm::PriceTable* prices) {
    std::vector<Group> groups;
    for (const auto& t : results.trials) {
        auto it = std::find_if(groups.begin(), groups.end(), [&](const Group& g) { return g.name == t.scenario; });
        if (it == groups.end()) groups.push_back({t.scenario, {&t}});
        else it->trials.push_back(&t);
    }
    if (!results.trials.empty()) {
        Group all{"all", {}};
        for (const auto& t : results.trials) all.trials.push_back(&t);
        groups.push_back(std::move(all));
    }

    json score_cols = json::array({"scenario"});
    for (auto d : kScoreColumns) score_cols.push_back(score_column_label(d));
    json prompt_rows = json::array(), tcr_rows = json::array(), latency_rows = json::array(), token_rows = json::array();
    std::vector<std::vector<std::string>> prompt_txt, tcr_txt, latency_txt, token_txt;

    for (const auto& g : groups) {
        // Prompt editing.
        json prow{{"scenario", g.name}};
        std::vector<std::string> ptxt{g.name};
        for (auto d : kScoreColumns) {
            double sum = 0.0;
            int n = 0;
            for (const auto* t : g.trials)
                for (const auto& s : t->subtasks)
                    if (s.spec.domain == d && s.target_score) {
                        sum += *s.target_score;
                        ++n;
                    }
            auto label = std::string(score_column_label(d));
            if (n == 0) {
                prow[label] = nullptr;
                ptxt.push_back("-");
            } else {
                double v = sum / n * results.display_scale;
                // Six decimals keep the document free of binary-fraction noise.
                prow[label] = std::round(v * 1e6) / 1e6;
                ptxt.push_back(fixed2(v));
            }
        }
        prompt_rows.push_back(std::move(prow));
        prompt_txt.push_back(std::move(ptxt));

        // TCR.
        std::vector<Outcome> outcomes;
        for (const auto* t : g.trials)
            for (const auto& s : t->subtasks) outcomes.push_back(s.outcome);
        std::int64_t hits = std::count(outcomes.begin(), outcomes.end(), Outcome::hit);
        json trow{{"scenario", g.name},
                  {"trials", g.trials.size()},
                  {"subtasks", outcomes.size()},
                  {"hits", hits}};
        trow["tcr"] = outcomes.empty() ? json(nullptr) : json(tcr(outcomes));
        tcr_rows.push_back(trow);
        tcr_txt.push_back({g.name, std::to_string(g.trials.size()), std::to_string(outcomes.size()), std::to_string(hits),
                           outcomes.empty() ? "-" : fixed2(tcr(outcomes))});

        // Latency, mean per trial; the total is the sum of the rounded components.
        LatencyLedger sum;
        for (const auto* t : g.trials) sum += t->latency;
        auto n = static_cast<std::int64_t>(g.trials.size());
        LatencyLedger mean{mean_half_up(sum.llm_micros, n), mean_half_up(sum.render_micros, n),
                           mean_half_up(sum.other_micros, n)};
        latency_rows.push_back({{"scenario", g.name},
                                {"llm_micros", mean.llm_micros},
                                {"render_micros", mean.render_micros},
                                {"other_micros", mean.other_micros},
                                {"total_micros", mean.total()},
                                {"seconds", format_latency_row(mean)}});
        latency_txt.push_back({g.name, format_seconds(mean.llm_micros), format_seconds(mean.render_micros),
                               format_seconds(mean.other_micros), format_seconds(mean.total())});

        // Tokens, mean per trial.
        std::int64_t pt = 0, ct = 0;
        for (const auto* t : g.trials) {
            pt += t->usage.prompt_tokens();
            ct += t->usage.completion_tokens();
        }
        auto mp = mean_half_up(pt, n), mc = mean_half_up(ct, n);
        json krow{{"scenario", g.name}, {"prompt_tokens", mp}, {"completion_tokens", mc}, {"total_tokens", mp + mc}};
        std::string cost_txt = "-";
        krow["est_cost"] = nullptr;
        if (prices && prices->count(results.model)) {
            auto cost = llm::estimate_cost(mp, mc, *prices, results.model);
            krow["est_cost"] = cost.str();
            cost_txt = cost.str();
        }
        token_rows.push_back(std::move(krow));
        token_txt.push_back({g.name, std::to_string(mp), std::to_string(mc), std::to_string(mp + mc), cost_txt});
    }

    Report rep;
    rep.document = {
        {"model", results.model},
        {"seed", results.seed},
        {"display_scale", results.display_scale},
        {"prompt_editing", {{"columns", score_cols}, {"rows", prompt_rows}}},
        {"tcr", {{"columns", {"scenario", "trials", "subtasks", "hits", "tcr"}}, {"rows", tcr_rows}}},
        {"latency",
         {{"columns", {"scenario", "llm_s", "render_s", "other_s", "total_s"}}, {"unit", "seconds per trial"}, {"rows", latency_rows}}},
        {"tokens",
         {{"columns", {"scenario", "prompt", "completion", "total", "est_cost_usd"}}, {"unit", "tokens per trial"}, {"rows", token_rows}}},
    };
    std::vector<std::string> score_header{"scenario"};
    for (auto d : kScoreColumns) score_header.emplace_back(score_column_label(d));
    rep.text = "model: " + results.model + "  seed: " + std::to_string(results.seed) + "\n\n" +
               render_table("Prompt editing (score x " + fixed2(results.display_scale) + ")", score_header, prompt_txt) +
               "\n" + render_table("Task completion rate", {"scenario", "trials", "subtasks", "hits", "tcr"}, tcr_txt) +
               "\n" +
               render_table("Latency per trial (s)", {"scenario", "llm", "render", "other", "total"}, latency_txt) + "\n" +
               render_table("Tokens per trial", {"scenario", "prompt", "completion", "total", "est. cost ($)"}, token_txt);
    return rep;
}

} // namespace ezb::eval

#include "ezb/app/bench.hpp"

#include "ezb/core/errors.hpp"
#include "ezb/core/text.hpp"
#include "ezb/exec/mock_executor.hpp"
#include "ezb/exec/png.hpp"
#include "ezb/exec/protocol.hpp"

#include <filesystem>
#include <ostream>
#include <random>
#include <set>

namespace ezb::app {

namespace fs = std::filesystem;

namespace {

std::string resolve_against(const std::string& base, const std::string& p) {
    if (p.empty() || fs::path(p).is_absolute()) return p;
    return (fs::path(base) / p).lexically_normal().string();
}

// nlohmann reports a byte offset; turn it into line:column.
std::string position_of(std::string_view text, std::size_t byte) {
    int line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

} // namespace

void EpisodeSpec::validate() const {
    if (id.empty()) throw Error(ErrorKind::parse_error, "episode without id");
    if (trials < 1) throw Error(ErrorKind::parse_error, "episode " + id + ": trials must be >= 1");
    if (subtasks.empty()) throw Error(ErrorKind::parse_error, "episode " + id + ": no sub-tasks");
    std::set<Domain> seen;
    for (const auto& s : subtasks) {
        if (!seen.insert(s.domain).second)
            throw Error(ErrorKind::parse_error, "episode " + id + ": two sub-tasks for domain " + std::string(to_string(s.domain)));
        try {
            s.validate();
        } catch (const Error& e) {
            throw Error(ErrorKind::parse_error, "episode " + id + ": " + e.what());
        }
    }
}

std::vector<EpisodeSpec> parse_episodes(std::string_view text, const std::string& base_dir) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::parse_error, "episode file, " + position_of(text, e.byte > 0 ? e.byte - 1 : 0) + ": " + e.what());
    }
    std::vector<EpisodeSpec> out;
    try {
        for (const auto& e : j.at("episodes")) {
            EpisodeSpec ep;
            ep.id = e.at("id").get<std::string>();
            ep.scenario = e.value("scenario", ep.id);
            ep.scene = resolve_against(base_dir, e.value("scene", std::string()));
            ep.transcript = resolve_against(base_dir, e.value("transcript", std::string()));
            if (e.contains("prompt") && !e["prompt"].is_null()) ep.prompt = e["prompt"].get<std::string>();
            ep.trials = e.value("trials", 1);
            for (const auto& s : e.at("subtasks")) ep.subtasks.push_back(eval::subtask_from_json(s));
            ep.validate();
            out.push_back(std::move(ep));
        }
    } catch (const json::exception& e) {
        throw Error(ErrorKind::parse_error, std::string("episode file: ") + e.what());
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::parse_error) throw;
        throw Error(ErrorKind::parse_error, std::string("episode file: ") + e.what());
    }
    return out;
}

std::vector<EpisodeSpec> load_episodes(const std::string& path) {
    auto dir = fs::path(path).parent_path().string();
    return parse_episodes(read_text_file(path), dir.empty() ? "." : dir);
}

std::uint64_t trial_seed(std::uint64_t seed, const std::string& episode_id, int trial) {
    return seed ^ (exec::fnv1a64(episode_id) + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(trial + 1));
}

std::string generate_prompt(const std::vector<eval::SubTaskSpec>& subtasks, std::uint64_t seed) {
    static const std::vector<std::string> openers = {
        "Edit the scene so it has", "Make the scene feature", "Give the scene", "Change the scene to show",
        "Update the scene with"};
    static const std::vector<std::string> closers = {".", " please.", ", all at once.", "."};
    // mt19937_64 output is fixed by the standard; distributions are not, so pick by modulo.
    std::mt19937_64 rng(seed);
    std::vector<std::string> labels;
    for (const auto& s : subtasks) labels.push_back(s.target);
    for (std::size_t i = labels.size(); i > 1; --i) std::swap(labels[i - 1], labels[rng() % i]);
    std::string out = openers[rng() % openers.size()] + " ";
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (i > 0) out += i + 1 == labels.size() ? (labels.size() > 2 ? ", and " : " and ") : ", ";
        out += labels[i];
    }
    return out + closers[rng() % closers.size()];
}

std::unique_ptr<Clock> make_clock(const RunConfig& config) {
    if (config.run.clock == "wall") return std::make_unique<SteadyClock>();
    return std::make_unique<VirtualClock>();
}

exec::AttributeSchema load_schema(const RunConfig& config) {
    if (config.backend.schema.empty()) return exec::AttributeSchema::builtin();
    return exec::AttributeSchema::load(config.resolve(config.backend.schema));
}

std::unique_ptr<exec::Executor> make_executor(const RunConfig& config, const std::string& scene_override) {
    if (config.backend.kind == "bridge") {
        auto ep = config.backend.endpoint;
        auto colon = ep.rfind(':');
        if (colon == std::string::npos) throw Error(ErrorKind::config_error, "[backend] endpoint must be host:port");
        int port = 0;
        try {
            port = std::stoi(ep.substr(colon + 1));
        } catch (const std::exception&) {
            throw Error(ErrorKind::config_error, "[backend] endpoint must be host:port");
        }
        return exec::RemoteExecutor::connect(std::make_unique<exec::TcpLineTransport>(ep.substr(0, colon), port));
    }
    auto scene_path = scene_override.empty() ? config.resolve(config.backend.scene) : scene_override;
    exec::SimScene scene;
    if (!scene_path.empty()) scene = exec::SimScene::load(scene_path);
    exec::MockTiming timing;
    timing.virtual_clock = config.run.clock == "virtual";
    timing.render_cost_micros = config.backend.render_cost_micros;
    return std::make_unique<exec::MockExecutor>(std::move(scene), load_schema(config), timing);
}

agents::SessionConfig make_session_config(const RunConfig& config) {
    agents::SessionConfig s;
    s.planner.template_text = read_text_file(config.resolve(config.planner.template_path));
    if (!config.planner.image_template_path.empty())
        s.planner.image_template_text = read_text_file(config.resolve(config.planner.image_template_path));
    s.planner.temperature = config.planner.temperature;
    s.planner.max_tokens = config.planner.max_tokens;
    s.planner.no_reasoning = config.ablation.no_reasoning;
    for (const auto& [d, sec] : config.subagents) {
        agents::SubAgentProfile p;
        p.domain = d;
        p.system_prompt = read_text_file(config.resolve(sec.template_path));
        p.temperature = sec.temperature;
        p.refine_budget = sec.refine_budget;
        p.max_tokens = sec.max_tokens;
        s.profiles[d] = p;
    }
    s.no_autonomy = config.ablation.no_autonomy;
    s.sequential = config.ablation.sequential;
    return s;
}

std::unique_ptr<eval::EmbeddingProvider> make_embedder(const RunConfig& config) {
    if (config.evaluation.embedder == "http") {
        if (config.evaluation.endpoint.empty()) throw Error(ErrorKind::config_error, "[evaluation] http embedder needs an endpoint");
        return std::make_unique<eval::HttpEmbedder>(config.evaluation.endpoint);
    }
    return std::make_unique<eval::LookupTableEmbedder>(eval::LookupTableEmbedder::load(config.resolve(config.evaluation.table)));
}

std::shared_ptr<llm::ChatProvider> make_chat_provider(const RunConfig& config, const std::string& transcript_override) {
    auto pc = config.provider;
    pc.transcript_path = transcript_override.empty() ? config.resolve(pc.transcript_path) : transcript_override;
    return llm::make_provider(pc);
}

std::optional<llm::PriceTable> load_prices(const RunConfig& config) {
    if (config.provider.price_table_path.empty()) return std::nullopt;
    return llm::load_price_table(config.resolve(config.provider.price_table_path));
}

namespace {

eval::TrialRecord run_trial(const EpisodeSpec& ep, int trial, const RunConfig& config,
                            const agents::SessionConfig& session_cfg, std::shared_ptr<llm::ChatProvider> shared_provider,
                            eval::EmbeddingProvider& embedder, std::uint64_t seed) {
    eval::TrialRecord rec;
    rec.episode_id = ep.id;
    rec.scenario = ep.scenario;
    rec.trial = trial;
    rec.prompt = ep.prompt ? *ep.prompt : generate_prompt(ep.subtasks, trial_seed(seed, ep.id, trial));
    for (const auto& s : ep.subtasks) rec.subtasks.push_back({s, eval::Outcome::miss, {}, {}, {}});

    try {
        // Replay transcripts are consumed per trial, so every trial gets a fresh provider.
        auto provider = shared_provider ? shared_provider : make_chat_provider(config, ep.transcript);
        llm::Gateway gateway(provider, config.provider.token_ceiling);
        auto executor = make_executor(config, config.backend.kind == "mock" ? ep.scene : std::string());
        auto clock = make_clock(config);
        auto schema = load_schema(config);
        std::string debug_prompt = read_text_file(config.resolve(config.debug_template_path));
        agents::DebugAgent debug(&gateway, debug_prompt, schema);

        auto cfg = session_cfg;
        cfg.views.clear(); // the evaluator takes its own focused renders below
        auto report = agents::run_session(UserIntent(rec.prompt), cfg, gateway, *executor, debug, *clock, schema);
        rec.status = std::string(agents::to_string(report.outcome.status));
        rec.latency = report.latency;
        rec.usage = report.usage;

        std::vector<int> views{0};
        if (config.evaluation.average_views) views.push_back(1);
        for (auto& st : rec.subtasks) {
            try {
                double score_sum = 0.0;
                std::vector<double> cand_sum(st.spec.candidates.size(), 0.0);
                for (int v : views) {
                    auto img = executor->render(exec::RenderSpec{v, 512, 512, st.spec.domain});
                    rec.latency.render_micros += img.render_micros;
                    auto c = eval::classify(eval::ImageInput{img.png, "image/png"}, st.spec, embedder);
                    for (std::size_t i = 0; i < cand_sum.size(); ++i) cand_sum[i] += c.scores[i];
                    score_sum += c.target_score;
                }
                auto best = eval::argmax_first(cand_sum);
                st.predicted = st.spec.candidates[best];
                st.target_score = score_sum / static_cast<double>(views.size());
                st.outcome = *st.predicted == st.spec.target ? eval::Outcome::hit : eval::Outcome::miss;
            } catch (const Error& e) {
                if (e.kind() == ErrorKind::render_failed) st.outcome = eval::Outcome::render_failed;
                else st.outcome = eval::Outcome::miss;
                st.error = e.what();
            }
        }
    } catch (const Error& e) {
        rec.status = "error";
        rec.failure = e.what();
    }
    return rec;
}

} // namespace

eval::BenchResults run_bench(const std::vector<EpisodeSpec>& episodes, const RunConfig& config, std::uint64_t seed,
                             std::ostream* progress) {
    eval::BenchResults out;
    out.model = config.provider.model;
    out.seed = seed;
    out.display_scale = config.evaluation.display_scale;
    auto session_cfg = make_session_config(config);
    auto embedder = make_embedder(config);
    std::shared_ptr<llm::ChatProvider> shared;
    if (config.provider.kind == llm::ProviderConfig::Kind::live) shared = make_chat_provider(config);
    for (const auto& ep : episodes) {
        for (int t = 0; t < ep.trials; ++t) {
            auto rec = run_trial(ep, t, config, session_cfg, shared, *embedder, seed);
            if (progress) {
                int hits = 0;
                for (const auto& s : rec.subtasks) hits += s.outcome == eval::Outcome::hit;
                *progress << ep.id << " trial " << t << ": " << rec.status << ", " << hits << "/" << rec.subtasks.size()
                          << " sub-tasks completed\n";
            }
            out.trials.push_back(std::move(rec));
        }
    }
    return out;
}

int exit_code_for(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::config_error:
    case ErrorKind::parse_error:
    case ErrorKind::invalid_argument:
    case ErrorKind::empty_intent:
        return exit_code::config;
    case ErrorKind::provider_unreachable:
    case ErrorKind::transcript_exhausted:
    case ErrorKind::budget_exceeded:
    case ErrorKind::unknown_model:
    case ErrorKind::schema_violation:
    case ErrorKind::empty_factor_set:
        return exit_code::provider;
    case ErrorKind::executor_unreachable:
    case ErrorKind::protocol_error:
    case ErrorKind::port_in_use:
        return exit_code::executor;
    default:
        return exit_code::generic;
    }
}

int exit_code_for(const agents::PlanOutcome& outcome) {
    if (outcome.status == agents::OverallStatus::all_succeeded) return exit_code::ok;
    if (outcome.status == agents::OverallStatus::all_failed) {
        bool executor = true, provider = true;
        for (const auto& r : outcome.results) {
            auto k = r.failure_kind.value_or("");
            executor = executor && k == "ExecutorUnreachable";
            provider = provider && (k == "ProviderUnreachable" || k == "TranscriptExhausted" || k == "BudgetExceeded");
        }
        if (executor) return exit_code::executor;
        if (provider) return exit_code::provider;
    }
    return exit_code::partial;
}

} // namespace ezb::app

#include "ezb/app/cli.hpp"

#include "ezb/agents/debug_agent.hpp"
#include "ezb/agents/session.hpp"
#include "ezb/app/bench.hpp"
#include "ezb/core/errors.hpp"
#include "ezb/core/text.hpp"
#include "ezb/exec/mock_executor.hpp"
#include "ezb/exec/protocol.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace ezb::app {

namespace fs = std::filesystem;

namespace {

void write_file(const fs::path& path, const std::string& body) {
    std::error_code ec;
    if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorKind::config_error, "cannot write " + path.string());
    f << body;
}

std::vector<std::uint8_t> read_bytes(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorKind::config_error, "cannot read " + path);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

std::string media_type_for(const std::string& path) {
    auto ext = fs::path(path).extension().string();
    for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (ext == ".png") return "image/png";
    if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
    if (ext == ".webp") return "image/webp";
    throw Error(ErrorKind::config_error, "unsupported image type: " + path);
}

std::string output_dir(const std::string& flag, const RunConfig& config) {
    return flag.empty() ? config.run.output_dir : flag;
}

void print_usage_summary(std::ostream& out, const LatencyLedger& latency, const UsageLedger& usage,
                         const RunConfig& config) {
    out << "latency (s) llm / render / other / total: " << eval::format_latency_row(latency) << "\n";
    out << "tokens: prompt " << usage.prompt_tokens() << ", completion " << usage.completion_tokens() << ", total "
        << usage.total_tokens();
    if (auto prices = load_prices(config); prices && prices->count(config.provider.model))
        out << ", est. cost $" << llm::estimate_cost(usage, *prices, config.provider.model).str();
    out << "\n";
}

struct EditArgs {
    std::string prompt;
    std::string config = "ezblender.toml";
    std::string image;
    std::string out;
    bool no_reasoning = false;
    bool no_autonomy = false;
    bool sequential = false;
};

int cmd_edit(const EditArgs& a, std::ostream& out, std::ostream& err) {
    auto config = RunConfig::load(a.config);
    config.ablation.no_reasoning = config.ablation.no_reasoning || a.no_reasoning;
    config.ablation.no_autonomy = config.ablation.no_autonomy || a.no_autonomy;
    config.ablation.sequential = config.ablation.sequential || a.sequential;

    std::optional<ImageBlob> image;
    if (!a.image.empty()) image = ImageBlob{read_bytes(a.image), media_type_for(a.image)};
    UserIntent intent(a.prompt, std::move(image));

    auto session_cfg = make_session_config(config);
    auto schema = load_schema(config);
    llm::Gateway gateway(make_chat_provider(config), config.provider.token_ceiling);
    auto executor = make_executor(config);
    auto clock = make_clock(config);
    agents::DebugAgent debug(&gateway, read_text_file(config.resolve(config.debug_template_path)), schema);

    auto started = std::chrono::steady_clock::now();
    auto report = agents::run_session(intent, session_cfg, gateway, *executor, debug, *clock, schema);
    auto wall_ms =
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started).count();

    fs::path dir = output_dir(a.out, config);
    write_file(dir / "session_report.json", agents::to_json(report).dump(2) + "\n");
    for (const auto& r : report.renders)
        if (r.image) {
            const auto& png = r.image->png;
            write_file(dir / ("view" + std::to_string(r.view_index) + ".png"), std::string(png.begin(), png.end()));
        }

    for (const auto& r : report.outcome.results) {
        out << to_string(r.domain) << ": " << agents::to_string(r.status) << " (" << r.validations()
            << " validation" << (r.validations() == 1 ? "" : "s") << ", " << r.debug_calls << " repair"
            << (r.debug_calls == 1 ? "" : "s") << ")";
        if (r.failure_kind) out << " " << *r.failure_kind << ": " << r.failure_message.value_or("");
        out << "\n";
    }
    for (const auto& w : report.outcome.warnings) err << "warning: " << w.code << ": " << w.message << "\n";
    for (const auto& r : report.renders)
        if (r.error) err << "render view " << r.view_index << " failed: " << *r.error << "\n";
    out << "status: " << agents::to_string(report.outcome.status) << "\n";
    print_usage_summary(out, report.latency, report.usage, config);
    out << "wall: " << wall_ms << " ms\n";
    out << "report: " << (dir / "session_report.json").string() << "\n";
    return exit_code_for(report.outcome);
}

int cmd_bench_run(const std::string& episodes_path, const std::string& config_path, std::uint64_t seed,
                  const std::string& out_flag, std::ostream& out, std::ostream& err) {
    auto config = RunConfig::load(config_path);
    auto episodes = load_episodes(episodes_path);
    auto results = run_bench(episodes, config, seed, &err);
    auto prices = load_prices(config);
    auto report = eval::build_report(results, prices ? &*prices : nullptr);

    fs::path dir = output_dir(out_flag, config);
    write_file(dir / "results.json", eval::to_json(results).dump(2) + "\n");
    write_file(dir / "report.json", report.document.dump(2) + "\n");
    write_file(dir / "report.txt", report.text);
    out << report.text;
    return exit_code::ok;
}

int cmd_bench_report(const std::string& results_path, const std::string& prices_path, const std::string& out_flag,
                     std::ostream& out) {
    json j;
    try {
        j = json::parse(read_text_file(results_path));
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::parse_error, results_path + ": " + e.what());
    }
    auto results = eval::bench_results_from_json(j);
    std::optional<llm::PriceTable> prices;
    if (!prices_path.empty()) prices = llm::load_price_table(prices_path);
    auto report = eval::build_report(results, prices ? &*prices : nullptr);
    fs::path dir = out_flag.empty() ? fs::path(results_path).parent_path() : fs::path(out_flag);
    write_file(dir / "report.json", report.document.dump(2) + "\n");
    write_file(dir / "report.txt", report.text);
    out << report.text;
    return exit_code::ok;
}

int cmd_mock_exec(int port, const std::string& scene_path, const std::string& schema_path, bool stdio,
                  std::ostream& out, std::ostream& err) {
    exec::SimScene scene;
    if (!scene_path.empty()) {
        try {
            scene = exec::SimScene::load(scene_path);
        } catch (const Error& e) {
            throw Error(ErrorKind::config_error, "scene fixture " + scene_path + ": " + e.what());
        }
    }
    auto schema = schema_path.empty() ? exec::AttributeSchema::builtin() : exec::AttributeSchema::load(schema_path);
    exec::MockExecutor backend(std::move(scene), schema, exec::MockTiming{false, 0});
    if (stdio) {
        exec::ProtocolServer server(backend);
        exec::serve_stream(server, std::cin, out);
        return exit_code::ok;
    }
    exec::TcpServer server(backend, port);
    err << "mock executor serving " << exec::kProtocolVersion << " on 127.0.0.1:" << server.port() << "\n";
    server.serve_forever();
    return exit_code::ok;
}

int cmd_strategies(bool as_json, std::ostream& out) {
    const auto& rules = agents::repair_strategies();
    if (as_json) {
        json arr = json::array();
        for (const auto& r : rules) arr.push_back({{"id", r.id}, {"matches", r.matches}, {"action", r.action}});
        out << arr.dump(2) << "\n";
        return exit_code::ok;
    }
    std::size_t w = 0;
    for (const auto& r : rules) w = std::max(w, r.id.size());
    for (const auto& r : rules)
        out << r.id << std::string(w - r.id.size() + 2, ' ') << "[" << r.matches << "] " << r.action << "\n";
    return exit_code::ok;
}

} // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Plan-and-ReAct scene editing orchestrator", "ezblender"};
    app.require_subcommand(1);

    EditArgs edit;
    auto* edit_cmd = app.add_subcommand("edit", "Run one editing session");
    edit_cmd->add_option("prompt", edit.prompt, "Editing request")->required();
    edit_cmd->add_option("-c,--config", edit.config, "Run configuration");
    edit_cmd->add_option("--image", edit.image, "Reference image");
    edit_cmd->add_option("-o,--out", edit.out, "Output directory");
    edit_cmd->add_flag("--no-reasoning", edit.no_reasoning, "Skip planning; send the raw prompt to every domain");
    edit_cmd->add_flag("--no-autonomy", edit.no_autonomy, "One validation per domain, no repairs");
    edit_cmd->add_flag("--sequential", edit.sequential, "Run domain lanes one after another");

    auto* bench_cmd = app.add_subcommand("bench", "Benchmark runs and reports");
    bench_cmd->require_subcommand(1);
    std::string episodes, bench_config = "ezblender.toml", bench_out, results_path, prices_path;
    std::uint64_t seed = 0;
    auto* run_cmd = bench_cmd->add_subcommand("run", "Run every episode and trial");
    run_cmd->add_option("episodes", episodes, "Episode file")->required();
    run_cmd->add_option("-c,--config", bench_config, "Run configuration");
    run_cmd->add_option("--seed", seed, "Prompt generator seed");
    run_cmd->add_option("-o,--out", bench_out, "Output directory");
    auto* report_cmd = bench_cmd->add_subcommand("report", "Rebuild report files from results.json");
    report_cmd->add_option("results", results_path, "results.json from a bench run")->required();
    report_cmd->add_option("--prices", prices_path, "Price table for the cost column");
    report_cmd->add_option("-o,--out", bench_out, "Output directory");

    int port = exec::kDefaultPort;
    std::string scene_path, schema_path;
    bool stdio = false;
    auto* mock_cmd = app.add_subcommand("mock-exec", "Serve the mock executor");
    mock_cmd->add_option("--port", port, "TCP port (0 picks one)");
    mock_cmd->add_option("--scene", scene_path, "Initial scene fixture");
    mock_cmd->add_option("--schema", schema_path, "Attribute schema");
    mock_cmd->add_flag("--stdio", stdio, "Serve stdin/stdout instead of TCP");

    bool as_json = false;
    auto* debug_cmd = app.add_subcommand("debug", "Debug agent introspection");
    debug_cmd->require_subcommand(1);
    auto* strategies_cmd = debug_cmd->add_subcommand("strategies", "Repair strategies");
    strategies_cmd->require_subcommand(1);
    auto* list_cmd = strategies_cmd->add_subcommand("list", "List repair strategies in application order");
    list_cmd->add_flag("--json", as_json, "Machine-readable output");

    std::vector<std::string> rev(args.rbegin(), args.rend());
    if (!rev.empty()) rev.pop_back(); // program name
    try {
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return exit_code::ok;
        }
        err << "error: " << e.what() << "\n";
        return exit_code::config;
    }

    try {
        if (*edit_cmd) return cmd_edit(edit, out, err);
        if (*run_cmd) return cmd_bench_run(episodes, bench_config, seed, bench_out, out, err);
        if (*report_cmd) return cmd_bench_report(results_path, prices_path, bench_out, out);
        if (*mock_cmd) return cmd_mock_exec(port, scene_path, schema_path, stdio, out, err);
        if (*list_cmd) return cmd_strategies(as_json, out);
    } catch (const Error& e) {
        err << "error: " << to_string(e.kind()) << ": " << e.what() << "\n";
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_code::generic;
    }
    return exit_code::generic;
}

} // namespace ezb::app

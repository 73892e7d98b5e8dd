#include "ezb/app/config.hpp"

#include "ezb/core/errors.hpp"
#include "ezb/core/serialize.hpp"
#include "ezb/core/text.hpp"

#include <cctype>
#include <charconv>
#include <filesystem>
#include <set>
#include <sstream>

namespace ezb::app {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void fail(int line, const std::string& why) {
    throw Error(ErrorKind::config_error, "line " + std::to_string(line) + ": " + why);
}

bool bare_key(std::string_view k) {
    if (k.empty()) return false;
    for (char c : k)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) return false;
    return true;
}

std::string strip_comment(std::string_view line) {
    bool in_str = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (in_str && c == '\\') {
            ++i;
            continue;
        }
        if (c == '"') in_str = !in_str;
        if (c == '#' && !in_str) return std::string(line.substr(0, i));
    }
    return std::string(line);
}

TomlValue parse_value(std::string_view raw, int line) {
    auto v = trim(raw);
    if (v.empty()) fail(line, "missing value");
    if (v == "true") return true;
    if (v == "false") return false;
    if (v.front() == '"') {
        if (v.size() < 2 || v.back() != '"') fail(line, "unterminated string");
        std::string out;
        for (std::size_t i = 1; i + 1 < v.size(); ++i) {
            char c = v[i];
            if (c == '"') fail(line, "unescaped quote inside string");
            if (c != '\\') {
                out += c;
                continue;
            }
            if (i + 2 >= v.size()) fail(line, "dangling escape");
            switch (v[++i]) {
            case '"': out += '"'; break;
            case '\\': out += '\\'; break;
            case 'n': out += '\n'; break;
            case 't': out += '\t'; break;
            default: fail(line, std::string("unsupported escape \\") + v[i]);
            }
        }
        return out;
    }
    std::int64_t iv = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), iv);
    if (ec == std::errc{} && p == v.data() + v.size()) return iv;
    double dv = 0.0;
    auto [p2, ec2] = std::from_chars(v.data(), v.data() + v.size(), dv);
    if (ec2 == std::errc{} && p2 == v.data() + v.size()) return dv;
    fail(line, "cannot parse value '" + v + "'");
}

std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        switch (c) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        case '\t': out += "\\t"; break;
        default: out += c;
        }
    }
    return out + "\"";
}

std::string dump_value(const TomlValue& v) {
    if (auto b = std::get_if<bool>(&v)) return *b ? "true" : "false";
    if (auto i = std::get_if<std::int64_t>(&v)) return std::to_string(*i);
    if (auto d = std::get_if<double>(&v)) {
        auto s = format_number(*d);
        if (s.find_first_of(".eE") == std::string::npos) s += ".0";
        return s;
    }
    return quote(std::get<std::string>(v));
}

// Typed reader over one section that rejects keys nobody asked for.
class Section {
public:
    Section(const TomlDocument& doc, const std::string& name) : name_(name) {
        if (auto it = doc.sections.find(name); it != doc.sections.end()) kv_ = &it->second;
    }
    ~Section() noexcept(false) {
        if (!kv_ || std::uncaught_exceptions()) return;
        for (const auto& [k, _] : *kv_)
            if (!seen_.count(k)) throw Error(ErrorKind::config_error, "unknown key '" + k + "' in [" + name_ + "]");
    }

    void read(const std::string& key, std::string& out) {
        if (auto v = get(key)) {
            if (auto s = std::get_if<std::string>(v)) out = *s;
            else bad(key, "a string");
        }
    }
    void read(const std::string& key, bool& out) {
        if (auto v = get(key)) {
            if (auto b = std::get_if<bool>(v)) out = *b;
            else bad(key, "a boolean");
        }
    }
    void read(const std::string& key, double& out) {
        if (auto v = get(key)) {
            if (auto d = std::get_if<double>(v)) out = *d;
            else if (auto i = std::get_if<std::int64_t>(v)) out = static_cast<double>(*i);
            else bad(key, "a number");
        }
    }
    void read(const std::string& key, std::int64_t& out) {
        if (auto v = get(key)) {
            if (auto i = std::get_if<std::int64_t>(v)) out = *i;
            else bad(key, "an integer");
        }
    }
    void read(const std::string& key, int& out) {
        std::int64_t tmp = out;
        read(key, tmp);
        out = static_cast<int>(tmp);
    }

private:
    const TomlValue* get(const std::string& key) {
        seen_.insert(key);
        if (!kv_) return nullptr;
        auto it = kv_->find(key);
        return it == kv_->end() ? nullptr : &it->second;
    }
    [[noreturn]] void bad(const std::string& key, const char* want) {
        throw Error(ErrorKind::config_error, "[" + name_ + "] " + key + " must be " + want);
    }

    std::string name_;
    const std::map<std::string, TomlValue>* kv_ = nullptr;
    std::set<std::string> seen_;
};

} // namespace

TomlDocument parse_toml(std::string_view text) {
    TomlDocument doc;
    std::string current;
    std::istringstream in{std::string(text)};
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        auto l = trim(strip_comment(raw));
        if (l.empty()) continue;
        if (l.front() == '[') {
            if (l.back() != ']') fail(line, "unterminated section header");
            current = trim(std::string_view(l).substr(1, l.size() - 2));
            std::istringstream parts(current);
            std::string part;
            bool ok = !current.empty();
            while (std::getline(parts, part, '.')) ok = ok && bare_key(part);
            if (!ok) fail(line, "invalid section name '" + current + "'");
            if (doc.sections.count(current)) fail(line, "duplicate section [" + current + "]");
            doc.sections[current];
            continue;
        }
        auto eq = l.find('=');
        if (eq == std::string::npos) fail(line, "expected key = value");
        auto key = trim(std::string_view(l).substr(0, eq));
        if (!bare_key(key)) fail(line, "invalid key '" + key + "'");
        if (current.empty()) fail(line, "key outside of any section");
        auto& sec = doc.sections[current];
        if (sec.count(key)) fail(line, "duplicate key '" + key + "'");
        sec.emplace(key, parse_value(std::string_view(l).substr(eq + 1), line));
    }
    return doc;
}

std::string dump_toml(const TomlDocument& doc) {
    std::string out;
    for (const auto& [name, kv] : doc.sections) {
        if (!out.empty()) out += "\n";
        out += "[" + name + "]\n";
        for (const auto& [k, v] : kv) out += k + " = " + dump_value(v) + "\n";
    }
    return out;
}

RunConfig::RunConfig() {
    for (auto d : kAllDomains) {
        SubAgentSection s;
        s.temperature = agents::default_temperature(d);
        subagents[d] = s;
    }
}

RunConfig RunConfig::from_toml(const TomlDocument& doc, std::string base_dir) {
    RunConfig c;
    c.base_dir = std::move(base_dir);
    for (const auto& [name, _] : doc.sections) {
        static const std::set<std::string> known = {"provider", "backend", "planner", "debug",
                                                    "ablation", "evaluation", "run"};
        bool sub = name.rfind("subagent.", 0) == 0 && parse_domain(name.substr(9));
        if (!known.count(name) && !sub) throw Error(ErrorKind::config_error, "unknown section [" + name + "]");
    }
    {
        Section s(doc, "provider");
        std::string kind = "replay";
        s.read("kind", kind);
        if (kind == "replay") c.provider.kind = llm::ProviderConfig::Kind::replay;
        else if (kind == "live") c.provider.kind = llm::ProviderConfig::Kind::live;
        else throw Error(ErrorKind::config_error, "[provider] kind must be live or replay");
        s.read("endpoint", c.provider.endpoint);
        s.read("credentials_env", c.provider.credentials_env);
        s.read("model", c.provider.model);
        s.read("transcript", c.provider.transcript_path);
        s.read("price_table", c.provider.price_table_path);
        s.read("token_ceiling", c.provider.token_ceiling);
        s.read("artificial_delay_ms", c.provider.artificial_delay_ms);
    }
    {
        Section s(doc, "backend");
        s.read("kind", c.backend.kind);
        s.read("scene", c.backend.scene);
        s.read("endpoint", c.backend.endpoint);
        s.read("schema", c.backend.schema);
        s.read("render_cost_micros", c.backend.render_cost_micros);
    }
    {
        Section s(doc, "planner");
        s.read("template", c.planner.template_path);
        s.read("image_template", c.planner.image_template_path);
        s.read("temperature", c.planner.temperature);
        s.read("max_tokens", c.planner.max_tokens);
    }
    for (auto d : kAllDomains) {
        Section s(doc, "subagent." + std::string(to_string(d)));
        auto& p = c.subagents[d];
        s.read("template", p.template_path);
        s.read("temperature", p.temperature);
        s.read("refine_budget", p.refine_budget);
        s.read("max_tokens", p.max_tokens);
    }
    {
        Section s(doc, "debug");
        s.read("template", c.debug_template_path);
    }
    {
        Section s(doc, "ablation");
        s.read("no_reasoning", c.ablation.no_reasoning);
        s.read("no_autonomy", c.ablation.no_autonomy);
        s.read("sequential", c.ablation.sequential);
    }
    {
        Section s(doc, "evaluation");
        s.read("enabled", c.evaluation.enabled);
        s.read("embedder", c.evaluation.embedder);
        s.read("table", c.evaluation.table);
        s.read("endpoint", c.evaluation.endpoint);
        s.read("display_scale", c.evaluation.display_scale);
        s.read("average_views", c.evaluation.average_views);
    }
    {
        Section s(doc, "run");
        s.read("clock", c.run.clock);
        s.read("output_dir", c.run.output_dir);
    }
    c.validate(false);
    return c;
}

RunConfig RunConfig::load(const std::string& path) {
    auto text = read_text_file(path);
    auto dir = fs::path(path).parent_path().string();
    auto c = from_toml(parse_toml(text), dir.empty() ? "." : dir);
    c.validate(true);
    return c;
}

TomlDocument RunConfig::to_toml() const {
    TomlDocument d;
    auto& p = d.sections["provider"];
    p["kind"] = std::string(provider.kind == llm::ProviderConfig::Kind::live ? "live" : "replay");
    p["endpoint"] = provider.endpoint;
    p["credentials_env"] = provider.credentials_env;
    p["model"] = provider.model;
    p["transcript"] = provider.transcript_path;
    p["price_table"] = provider.price_table_path;
    p["token_ceiling"] = provider.token_ceiling;
    p["artificial_delay_ms"] = std::int64_t{provider.artificial_delay_ms};
    auto& b = d.sections["backend"];
    b["kind"] = backend.kind;
    b["scene"] = backend.scene;
    b["endpoint"] = backend.endpoint;
    b["schema"] = backend.schema;
    b["render_cost_micros"] = backend.render_cost_micros;
    auto& pl = d.sections["planner"];
    pl["template"] = planner.template_path;
    pl["image_template"] = planner.image_template_path;
    pl["temperature"] = planner.temperature;
    pl["max_tokens"] = std::int64_t{planner.max_tokens};
    for (const auto& [dom, s] : subagents) {
        auto& sec = d.sections["subagent." + std::string(to_string(dom))];
        sec["template"] = s.template_path;
        sec["temperature"] = s.temperature;
        sec["refine_budget"] = std::int64_t{s.refine_budget};
        sec["max_tokens"] = std::int64_t{s.max_tokens};
    }
    d.sections["debug"]["template"] = debug_template_path;
    auto& a = d.sections["ablation"];
    a["no_reasoning"] = ablation.no_reasoning;
    a["no_autonomy"] = ablation.no_autonomy;
    a["sequential"] = ablation.sequential;
    auto& e = d.sections["evaluation"];
    e["enabled"] = evaluation.enabled;
    e["embedder"] = evaluation.embedder;
    e["table"] = evaluation.table;
    e["endpoint"] = evaluation.endpoint;
    e["display_scale"] = evaluation.display_scale;
    e["average_views"] = evaluation.average_views;
    auto& r = d.sections["run"];
    r["clock"] = run.clock;
    r["output_dir"] = run.output_dir;
    return d;
}

std::string RunConfig::resolve(const std::string& path) const {
    if (path.empty() || fs::path(path).is_absolute()) return path;
    return (fs::path(base_dir) / path).lexically_normal().string();
}

void RunConfig::validate(bool check_files) const {
    auto bad = [](const std::string& why) { throw Error(ErrorKind::config_error, why); };
    if (backend.kind != "mock" && backend.kind != "bridge") bad("[backend] kind must be mock or bridge");
    if (backend.kind == "bridge" && backend.endpoint.empty()) bad("[backend] bridge needs an endpoint");
    if (provider.kind == llm::ProviderConfig::Kind::live && provider.endpoint.empty())
        bad("[provider] live provider needs an endpoint");
    if (provider.token_ceiling < 1) bad("[provider] token_ceiling must be positive");
    if (provider.artificial_delay_ms < 0) bad("[provider] artificial_delay_ms must be >= 0");
    if (!(planner.temperature >= 0.0)) bad("[planner] temperature must be >= 0");
    for (const auto& [d, s] : subagents) {
        auto sec = "[subagent." + std::string(to_string(d)) + "] ";
        if (s.refine_budget < 1) bad(sec + "refine_budget must be >= 1");
        if (!(s.temperature >= 0.0)) bad(sec + "temperature must be >= 0");
        if (s.max_tokens < 1) bad(sec + "max_tokens must be >= 1");
    }
    if (evaluation.embedder != "lookup" && evaluation.embedder != "http")
        bad("[evaluation] embedder must be lookup or http");
    if (run.clock != "virtual" && run.clock != "wall") bad("[run] clock must be virtual or wall");
    if (!check_files) return;
    auto need = [&](const std::string& p, const std::string& what) {
        if (p.empty()) bad(what + " is not set");
        if (!fs::exists(resolve(p))) bad(what + " not found: " + resolve(p));
    };
    need(planner.template_path, "[planner] template");
    for (const auto& [d, s] : subagents) need(s.template_path, "[subagent." + std::string(to_string(d)) + "] template");
    need(debug_template_path, "[debug] template");
    if (!planner.image_template_path.empty()) need(planner.image_template_path, "[planner] image_template");
}

} // namespace ezb::app

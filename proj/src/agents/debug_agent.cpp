#include "ezb/agents/debug_agent.hpp"

#include "ezb/core/errors.hpp"
#include "ezb/core/serialize.hpp"
#include "ezb/core/text.hpp"
#include "ezb/exec/script.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace ezb::agents {

namespace {

std::vector<std::string> split_lines(const std::string& body) {
    std::vector<std::string> lines;
    std::istringstream in(body);
    std::string l;
    while (std::getline(in, l)) {
        if (!l.empty() && l.back() == '\r') l.pop_back();
        lines.push_back(l);
    }
    return lines;
}

std::string join_lines(const std::vector<std::string>& lines) {
    std::string out;
    for (const auto& l : lines) out += l + "\n";
    return out;
}

std::vector<std::string> split_tokens(const std::string& line) {
    std::istringstream in(line);
    std::vector<std::string> toks;
    std::string t;
    while (in >> t) toks.push_back(t);
    return toks;
}

std::vector<std::string> split_dots(const std::string& path) {
    std::vector<std::string> segs;
    std::string seg;
    std::istringstream in(path);
    while (std::getline(in, seg, '.')) segs.push_back(seg);
    return segs;
}

std::string join_dots(const std::vector<std::string>& segs) {
    std::string out;
    for (std::size_t i = 0; i < segs.size(); ++i) out += (i ? "." : "") + segs[i];
    return out;
}

// The set-command on a 1-based line, as (path, tokens); nullopt for anything else.
std::optional<std::vector<std::string>> set_tokens(const std::vector<std::string>& lines, std::optional<int> line) {
    if (!line || *line < 1 || static_cast<std::size_t>(*line) > lines.size()) return std::nullopt;
    auto toks = split_tokens(lines[*line - 1]);
    if (toks.size() < 2 || toks[0] != "set") return std::nullopt;
    return toks;
}

bool entity_category(const std::string& cat) { return cat == "light" || cat == "material" || cat == "shapekey"; }

std::string create_category(const std::string& cat) { return cat == "light" ? "light" : "object"; }

std::string default_entity_name(const std::string& category) { return category == "light" ? "Light" : "Object"; }

} // namespace

const std::vector<RepairStrategy>& repair_strategies() {
    static const std::vector<RepairStrategy> table = {
        {"nearest-name", "unknown-identifier",
         "substitute the closest manifest name (case-insensitive edit distance <= 2, ties by manifest order) on the "
         "diagnosed line"},
        {"default-value", "out-of-range, type-mismatch",
         "replace the values of the diagnosed set-command with the declared default for its path"},
        {"create-reference", "missing-reference, unknown-identifier on an entity name with no near match",
         "prepend a create-command for the absent light or object"},
        {"model-fallback", "anything the rules above left unchanged",
         "one completion call (role debug:<domain>) with the snippet and diagnostics; the reply must differ from the "
         "input"},
    };
    return table;
}

std::size_t levenshtein_ci(std::string_view a, std::string_view b) {
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            bool same = std::tolower(static_cast<unsigned char>(a[i - 1])) ==
                        std::tolower(static_cast<unsigned char>(b[j - 1]));
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (same ? 0 : 1)});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

std::optional<std::string> nearest_name(std::string_view name, const std::vector<std::string>& names,
                                        std::size_t max_distance) {
    std::optional<std::string> best;
    std::size_t best_d = max_distance + 1;
    for (const auto& n : names) {
        if (n == name) continue;
        auto d = levenshtein_ci(name, n);
        if (d < best_d) {
            best_d = d;
            best = n;
        }
    }
    return best;
}

DebugAgent::DebugAgent(llm::Gateway* gateway, std::string system_prompt, const exec::AttributeSchema& schema,
                       int max_tokens)
    : gateway_(gateway), system_prompt_(std::move(system_prompt)), schema_(schema), max_tokens_(max_tokens) {}

std::optional<RepairOutcome> DebugAgent::apply_rules(const CodeSnippet& snippet, const ValidationReport& report,
                                                     const exec::SceneManifest& manifest) const {
    auto lines = split_lines(snippet.body());
    auto names = manifest.names();
    std::vector<std::string> creates;
    std::vector<std::string> fired;
    auto note = [&](const char* id) {
        if (std::find(fired.begin(), fired.end(), id) == fired.end()) fired.emplace_back(id);
    };
    auto add_create = [&](const std::string& category, const std::string& name) {
        auto cmd = exec::format_create_command(category, name);
        if (std::find(creates.begin(), creates.end(), cmd) == creates.end()) creates.push_back(cmd);
        note("create-reference");
    };

    for (const auto& d : report.diagnostics()) {
        if (d.code == diag::kUnknownIdentifier && d.subject) {
            auto toks = set_tokens(lines, d.line);
            if (!toks) continue;
            auto segs = split_dots((*toks)[1]);
            if (auto near = nearest_name(*d.subject, names)) {
                bool changed = false;
                for (std::size_t i = 1; i < segs.size(); ++i) {
                    if (segs[i] == *d.subject) {
                        segs[i] = *near;
                        changed = true;
                    }
                }
                if (changed) {
                    (*toks)[1] = join_dots(segs);
                    std::string line;
                    for (std::size_t i = 0; i < toks->size(); ++i) line += (i ? " " : "") + (*toks)[i];
                    lines[*d.line - 1] = line;
                    note("nearest-name");
                    continue;
                }
            }
            // An absent entity with nothing close by gets created under the name the script used.
            if (segs.size() == 3 && entity_category(segs[0]) && segs[1] == *d.subject)
                add_create(create_category(segs[0]), segs[1]);
        } else if (d.code == diag::kOutOfRange || d.code == diag::kTypeMismatch) {
            auto toks = set_tokens(lines, d.line);
            if (!toks) continue;
            const auto& path = (*toks)[1];
            std::vector<double> def;
            if (const auto* e = manifest.find(path)) def = e->default_value;
            else if (const auto* s = exec::spec_for_path(path, schema_)) def = s->default_value;
            if (def.empty()) continue;
            lines[*d.line - 1] = exec::format_set_command(path, def);
            note("default-value");
        } else if (d.code == diag::kMissingReference && d.subject) {
            auto cat = create_category(*d.subject);
            add_create(cat, default_entity_name(cat));
        }
    }

    if (!creates.empty()) {
        std::size_t at = 0;
        while (at < lines.size() && trim(lines[at]).empty()) ++at;
        if (at < lines.size() && trim(lines[at]) == kCommandSentinel) ++at;
        lines.insert(lines.begin() + static_cast<std::ptrdiff_t>(at), creates.begin(), creates.end());
    }
    auto body = join_lines(lines);
    if (fired.empty() || body == snippet.body()) return std::nullopt;
    return RepairOutcome{snippet.repaired(std::move(body)), std::move(fired)};
}

RepairOutcome DebugAgent::repair(const CodeSnippet& snippet, const ValidationReport& report,
                                 const exec::SceneManifest& manifest, UsageLedger* lane) const {
    if (report.passed()) throw Error(ErrorKind::precondition, "repair called with a passing report");
    if (auto ruled = apply_rules(snippet, report, manifest)) return *ruled;
    if (!gateway_) throw Error(ErrorKind::unrepairable, "no repair rule matched and no model fallback is configured");

    json diags = json::array();
    for (const auto& d : report.diagnostics()) diags.push_back(to_json(d));
    llm::CompletionRequest req;
    req.role_id = debug_role(snippet.domain());
    req.system_prompt = render_template(system_prompt_, {{"domain", std::string(to_string(snippet.domain()))}});
    req.user_payload = "script:\n" + snippet.body() + "\ndiagnostics:\n" + diags.dump();
    req.temperature = snippet.temperature();
    req.max_tokens = max_tokens_;
    auto resp = gateway_->complete(req, lane);

    auto body = trim(strip_code_fence(resp.text));
    if (body.rfind(kCommandSentinel, 0) != 0)
        throw Error(ErrorKind::unrepairable, "model repair is not a command script");
    body += "\n";
    if (trim(body) == trim(snippet.body())) throw Error(ErrorKind::unrepairable, "model repair returned the input unchanged");
    return RepairOutcome{snippet.repaired(std::move(body)), {"model-fallback"}};
}

} // namespace ezb::agents

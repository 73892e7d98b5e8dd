#include "ezb/exec/script.hpp"

#include "ezb/core/errors.hpp"

#include <charconv>
#include <sstream>

namespace ezb::exec {

namespace {

std::vector<std::string> split_ws(std::string_view s) {
    std::vector<std::string> out;
    std::istringstream in{std::string(s)};
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

std::vector<std::string> split_dots(std::string_view path) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (true) {
        auto dot = path.find('.', pos);
        out.emplace_back(path.substr(pos, dot == std::string_view::npos ? std::string_view::npos : dot - pos));
        if (dot == std::string_view::npos) break;
        pos = dot + 1;
    }
    return out;
}

std::optional<double> parse_double(std::string_view tok) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || ptr != tok.data() + tok.size()) return std::nullopt;
    return v;
}

Diagnostic make_diag(std::string_view code, std::string message, int line, std::optional<std::string> subject = {},
                     std::vector<std::string> candidates = {}) {
    return Diagnostic{std::string(code), std::move(message), line, std::move(subject), std::move(candidates)};
}

Diagnostic unknown(std::string subject, std::string what, std::vector<std::string> candidates) {
    return make_diag(diag::kUnknownIdentifier, "unknown " + what + " '" + subject + "'", 0, subject,
                     std::move(candidates));
}

const std::vector<std::string> kCategories = {"background", "camera", "light", "material", "shapekey", "volume", "world"};
const std::vector<std::string> kLightAttrs = {"color", "energy"};
const std::vector<std::string> kMaterialAttrs = {"base_color", "metallic", "roughness"};
const std::vector<std::string> kWorldAttrs = {"background_color", "volume_color"};
const std::vector<std::string> kCameraAttrs = {"focal_mm", "location", "rotation"};

bool contains(const std::vector<std::string>& v, std::string_view s) {
    return std::find(v.begin(), v.end(), s) != v.end();
}

template <typename Map>
std::vector<std::string> keys_of(const Map& m) {
    std::vector<std::string> out;
    for (const auto& [k, _] : m) out.push_back(k);
    return out;
}

// Entity-scoped categories share one shape: `<cat>.<attr>` broadcasts, `<cat>.<entity>.<attr>` targets one.
template <typename Map>
Resolution resolve_entity(const Map& entities, const std::vector<std::string>& segs, const std::vector<std::string>& attrs,
                          std::string_view what, const AttributeSchema& schema) {
    Resolution r;
    const std::string& cat = segs[0];
    const std::string& attr = segs.back();
    if (!contains(attrs, attr)) {
        r.error = unknown(attr, cat + " attribute", attrs);
        return r;
    }
    r.spec = schema.find(cat + ".*." + attr);
    if (segs.size() == 2) {
        if (entities.empty()) {
            r.error = make_diag(diag::kMissingReference, "no " + std::string(what) + " exists for broadcast path", 0, cat);
            return r;
        }
        for (const auto& [name, _] : entities) r.targets.push_back(cat + "." + name + "." + attr);
        return r;
    }
    const std::string& name = segs[1];
    if (!entities.count(name)) {
        r.error = unknown(name, std::string(what), keys_of(entities));
        return r;
    }
    r.targets.push_back(cat + "." + name + "." + attr);
    return r;
}

} // namespace

ParsedScript parse_script(std::string_view body) {
    ParsedScript out;
    std::istringstream in{std::string(body)};
    std::string raw;
    int line_no = 0;
    bool header_seen = false;
    while (std::getline(in, raw)) {
        ++line_no;
        if (!raw.empty() && raw.back() == '\r') raw.pop_back();
        auto line = trim(raw);
        if (line.empty()) continue;
        if (!header_seen) {
            if (line == kCommandSentinel) {
                header_seen = true;
                continue;
            }
            out.errors.push_back(make_diag(diag::kSyntax, "missing '#ezcmd v1' header", line_no));
            header_seen = true; // report once, keep checking the rest
        }
        if (line[0] == '#') continue;
        auto toks = split_ws(line);
        Command cmd;
        cmd.line = line_no;
        if (toks[0] == "set") {
            if (toks.size() < 3) {
                out.errors.push_back(make_diag(diag::kSyntax, "set needs a path and at least one value", line_no));
                continue;
            }
            bool ok = true;
            for (const auto& seg : split_dots(toks[1])) ok = ok && is_scene_name(seg);
            if (!ok || toks[1].find('.') == std::string::npos) {
                out.errors.push_back(make_diag(diag::kSyntax, "malformed path '" + toks[1] + "'", line_no, toks[1]));
                continue;
            }
            cmd.kind = Command::Kind::set;
            cmd.path = toks[1];
            for (std::size_t i = 2; i < toks.size() && ok; ++i) {
                auto v = parse_double(toks[i]);
                if (!v) {
                    out.errors.push_back(make_diag(diag::kSyntax, "not a number: '" + toks[i] + "'", line_no, toks[i]));
                    ok = false;
                } else {
                    cmd.values.push_back(*v);
                }
            }
            if (ok) out.commands.push_back(std::move(cmd));
        } else if (toks[0] == "create") {
            if (toks.size() != 3) {
                out.errors.push_back(make_diag(diag::kSyntax, "create takes a category and a name", line_no));
                continue;
            }
            if (toks[1] != "light" && toks[1] != "object") {
                out.errors.push_back(make_diag(diag::kUnknownIdentifier, "cannot create '" + toks[1] + "'", line_no,
                                               toks[1], {"light", "object"}));
                continue;
            }
            if (!is_scene_name(toks[2])) {
                out.errors.push_back(make_diag(diag::kSyntax, "invalid name '" + toks[2] + "'", line_no, toks[2]));
                continue;
            }
            cmd.kind = Command::Kind::create;
            cmd.category = toks[1];
            cmd.name = toks[2];
            out.commands.push_back(std::move(cmd));
        } else {
            out.errors.push_back(make_diag(diag::kSyntax, "unknown command '" + toks[0] + "'", line_no, toks[0]));
        }
    }
    if (!header_seen) out.errors.push_back(make_diag(diag::kSyntax, "missing '#ezcmd v1' header", 1));
    return out;
}

std::string format_set_command(std::string_view path, const std::vector<double>& values) {
    std::string out = "set " + std::string(path);
    for (double v : values) out += " " + format_number(v);
    return out;
}

std::string format_create_command(std::string_view category, std::string_view name) {
    return "create " + std::string(category) + " " + std::string(name);
}

Resolution resolve_path(const SimScene& scene, std::string_view path, const AttributeSchema& schema) {
    auto segs = split_dots(path);
    Resolution r;
    const std::string& cat = segs[0];
    if (!contains(kCategories, cat)) {
        r.error = unknown(cat, "category", kCategories);
        return r;
    }
    auto malformed = [&]() {
        r.error = make_diag(diag::kSyntax, "wrong number of segments in '" + std::string(path) + "'", 0, std::string(path));
        return r;
    };
    if (cat == "light" || cat == "material" || cat == "shapekey") {
        if (segs.size() != 2 && segs.size() != 3) return malformed();
    } else if (segs.size() != 2) {
        return malformed();
    }

    if (cat == "light") return resolve_entity(scene.lights, segs, kLightAttrs, "light", schema);
    if (cat == "material") return resolve_entity(scene.objects, segs, kMaterialAttrs, "object", schema);
    if (cat == "shapekey") {
        r.spec = schema.find("shapekey.*.*");
        if (segs.size() == 2) {
            std::vector<std::string> all_keys;
            for (const auto& [name, o] : scene.objects) {
                for (const auto& [k, _] : o.shapekeys) {
                    if (k == segs[1]) r.targets.push_back("shapekey." + name + "." + k);
                    if (!contains(all_keys, k)) all_keys.push_back(k);
                }
            }
            if (r.targets.empty()) {
                if (scene.objects.empty())
                    r.error = make_diag(diag::kMissingReference, "no object exists for broadcast path", 0, cat);
                else
                    r.error = unknown(segs[1], "shape key", all_keys);
            }
            return r;
        }
        auto it = scene.objects.find(segs[1]);
        if (it == scene.objects.end()) {
            r.error = unknown(segs[1], "object", keys_of(scene.objects));
            return r;
        }
        if (!it->second.shapekeys.count(segs[2])) {
            r.error = unknown(segs[2], "shape key", keys_of(it->second.shapekeys));
            return r;
        }
        r.targets.push_back("shapekey." + segs[1] + "." + segs[2]);
        return r;
    }
    if (cat == "volume" || cat == "background") {
        if (segs[1] != "color") {
            r.error = unknown(segs[1], cat + " attribute", {"color"});
            return r;
        }
        std::string target = cat == "volume" ? "world.volume_color" : "world.background_color";
        r.spec = schema.find(target);
        r.targets.push_back(std::move(target));
        return r;
    }
    const auto& attrs = cat == "world" ? kWorldAttrs : kCameraAttrs;
    if (!contains(attrs, segs[1])) {
        r.error = unknown(segs[1], cat + " attribute", attrs);
        return r;
    }
    r.targets.push_back(std::string(path));
    r.spec = schema.find(path);
    return r;
}

ValidationReport apply_script(SimScene& scene, const ParsedScript& script, const AttributeSchema& schema) {
    if (!script.ok()) return ValidationReport::fail(script.errors);
    std::vector<Diagnostic> diags;
    for (const auto& cmd : script.commands) {
        if (cmd.kind == Command::Kind::create) {
            bool created = cmd.category == "light" ? scene.lights.try_emplace(cmd.name).second
                                                   : scene.objects.try_emplace(cmd.name).second;
            if (!created)
                diags.push_back(make_diag(diag::kRuntime, cmd.category + " '" + cmd.name + "' already exists", cmd.line,
                                          cmd.name));
            continue;
        }
        auto res = resolve_path(scene, cmd.path, schema);
        if (res.error) {
            auto d = *res.error;
            d.line = cmd.line;
            diags.push_back(std::move(d));
            continue;
        }
        if (!res.spec) {
            diags.push_back(make_diag(diag::kUnknownIdentifier, "no schema entry for '" + cmd.path + "'", cmd.line, cmd.path));
            continue;
        }
        if (cmd.values.size() != arity(res.spec->type)) {
            diags.push_back(make_diag(diag::kTypeMismatch,
                                      cmd.path + " expects " + std::to_string(arity(res.spec->type)) + " value(s), got " +
                                          std::to_string(cmd.values.size()),
                                      cmd.line, cmd.path));
            continue;
        }
        if (auto why = res.spec->range_error(cmd.values)) {
            diags.push_back(make_diag(diag::kOutOfRange, cmd.path + ": " + *why, cmd.line, cmd.path));
            continue;
        }
        for (const auto& t : res.targets) scene.set(t, cmd.values);
    }
    if (!diags.empty()) return ValidationReport::fail(std::move(diags));
    return ValidationReport::pass();
}

std::optional<AttributeKey> attribute_key(std::string_view path) {
    auto segs = split_dots(path);
    const auto& cat = segs[0];
    if (cat == "light" || cat == "material" || cat == "shapekey") {
        if (segs.size() == 2) return AttributeKey{cat, "*", segs[1]};
        if (segs.size() == 3) return AttributeKey{cat, segs[1], segs[2]};
        return std::nullopt;
    }
    if (segs.size() != 2) return std::nullopt;
    if (cat == "volume" && segs[1] == "color") return AttributeKey{"world", "", "volume_color"};
    if (cat == "background" && segs[1] == "color") return AttributeKey{"world", "", "background_color"};
    if (cat == "world" || cat == "camera") return AttributeKey{cat, "", segs[1]};
    return std::nullopt;
}

const AttributeSpec* spec_for_path(std::string_view path, const AttributeSchema& schema) {
    auto key = attribute_key(path);
    if (!key) return nullptr;
    if (key->category == "shapekey") return schema.find("shapekey.*.*");
    if (key->entity.empty()) return schema.find(key->category + "." + key->attribute);
    return schema.find(key->category + ".*." + key->attribute);
}

bool paths_overlap(std::string_view a, std::string_view b) {
    auto ka = attribute_key(a);
    auto kb = attribute_key(b);
    if (!ka || !kb) return a == b;
    if (ka->category != kb->category || ka->attribute != kb->attribute) return false;
    return ka->entity == kb->entity || ka->entity == "*" || kb->entity == "*";
}

bool script_enforces(std::string_view body, const HardConstraint& constraint) {
    auto parsed = parse_script(body);
    auto want = constraint.value().components();
    bool satisfied = false;
    for (const auto& cmd : parsed.commands) {
        if (cmd.kind != Command::Kind::set) continue;
        if (cmd.path == constraint.path()) satisfied = cmd.values == want;
        else if (paths_overlap(cmd.path, constraint.path())) satisfied = false;
    }
    return satisfied;
}

bool scene_satisfies(const SimScene& scene, const HardConstraint& constraint, const AttributeSchema& schema) {
    auto res = resolve_path(scene, constraint.path(), schema);
    if (res.error || res.targets.empty()) return false;
    auto want = constraint.value().components();
    for (const auto& t : res.targets) {
        auto got = scene.get(t);
        if (!got || *got != want) return false;
    }
    return true;
}

} // namespace ezb::exec

#include "ezb/exec/scene.hpp"

#include "ezb/core/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace ezb::exec {

namespace {

std::vector<std::string_view> split_path(std::string_view path) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        auto dot = path.find('.', pos);
        out.push_back(path.substr(pos, dot == std::string_view::npos ? std::string_view::npos : dot - pos));
        if (dot == std::string_view::npos) break;
        pos = dot + 1;
    }
    return out;
}

bool unit_ok(double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; }
bool rgb_ok(const Rgb& c) { return unit_ok(c[0]) && unit_ok(c[1]) && unit_ok(c[2]); }

json arr(const std::array<double, 3>& a) { return json::array({a[0], a[1], a[2]}); }

std::array<double, 3> read3(const json& j, const char* what) {
    if (!j.is_array() || j.size() != 3 || !j[0].is_number() || !j[1].is_number() || !j[2].is_number())
        throw Error(ErrorKind::parse_error, std::string(what) + " must be an array of three numbers");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

double read_number(const json& j, const char* what) {
    if (!j.is_number()) throw Error(ErrorKind::parse_error, std::string(what) + " must be a number");
    return j.get<double>();
}

void require_name(const std::string& name) {
    if (!is_scene_name(name)) throw Error(ErrorKind::parse_error, "invalid scene name '" + name + "'");
}

} // namespace

std::string_view to_string(ValueType t) {
    switch (t) {
    case ValueType::rgb: return "rgb";
    case ValueType::unit: return "unit";
    case ValueType::nonneg: return "nonneg";
    case ValueType::positive: return "positive";
    case ValueType::vec3: return "vec3";
    }
    return "unit";
}

ValueType value_type_from_string(std::string_view s) {
    for (auto t : {ValueType::rgb, ValueType::unit, ValueType::nonneg, ValueType::positive, ValueType::vec3})
        if (to_string(t) == s) return t;
    throw Error(ErrorKind::parse_error, "unknown value type '" + std::string(s) + "'");
}

std::size_t arity(ValueType t) { return (t == ValueType::rgb || t == ValueType::vec3) ? 3 : 1; }

std::optional<double> AttributeSpec::min() const {
    switch (type) {
    case ValueType::rgb:
    case ValueType::unit:
    case ValueType::nonneg:
    case ValueType::positive: return 0.0;
    case ValueType::vec3: return std::nullopt;
    }
    return std::nullopt;
}

std::optional<double> AttributeSpec::max() const {
    if (type == ValueType::rgb || type == ValueType::unit) return 1.0;
    return std::nullopt;
}

std::optional<std::string> AttributeSpec::range_error(const std::vector<double>& values) const {
    for (double v : values) {
        if (!std::isfinite(v)) return "non-finite value";
        switch (type) {
        case ValueType::rgb:
        case ValueType::unit:
            if (v < 0.0 || v > 1.0) return format_number(v) + " outside [0,1]";
            break;
        case ValueType::nonneg:
            if (v < 0.0) return format_number(v) + " is negative";
            break;
        case ValueType::positive:
            if (v <= 0.0) return format_number(v) + " is not positive";
            break;
        case ValueType::vec3: break;
        }
    }
    return std::nullopt;
}

const AttributeSchema& AttributeSchema::builtin() {
    static const AttributeSchema schema = [] {
        AttributeSchema s;
        s.specs_ = {
            {"camera.focal_mm", ValueType::positive, {50.0}},
            {"camera.location", ValueType::vec3, {7.36, -6.93, 4.96}},
            {"camera.rotation", ValueType::vec3, {1.109, 0.0, 0.815}},
            {"light.*.color", ValueType::rgb, {1.0, 1.0, 1.0}},
            {"light.*.energy", ValueType::nonneg, {1000.0}},
            {"material.*.base_color", ValueType::rgb, {0.8, 0.8, 0.8}},
            {"material.*.metallic", ValueType::unit, {0.0}},
            {"material.*.roughness", ValueType::unit, {0.5}},
            {"shapekey.*.*", ValueType::unit, {0.0}},
            {"world.background_color", ValueType::rgb, {0.05, 0.05, 0.05}},
            {"world.volume_color", ValueType::rgb, {1.0, 1.0, 1.0}},
        };
        return s;
    }();
    return schema;
}

AttributeSchema AttributeSchema::from_json(const json& j) {
    if (!j.contains("attributes") || !j["attributes"].is_array())
        throw Error(ErrorKind::parse_error, "schema needs an 'attributes' array");
    AttributeSchema s;
    for (const auto& a : j["attributes"]) {
        AttributeSpec spec{a.at("pattern").get<std::string>(), value_type_from_string(a.at("type").get<std::string>()),
                           a.at("default").get<std::vector<double>>()};
        if (spec.default_value.size() != arity(spec.type) || spec.range_error(spec.default_value))
            throw Error(ErrorKind::parse_error, "bad default for " + spec.pattern);
        s.specs_.push_back(std::move(spec));
    }
    return s;
}

AttributeSchema AttributeSchema::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::config_error, "cannot open schema file " + path);
    try {
        return from_json(json::parse(in));
    } catch (const json::exception& e) {
        throw Error(ErrorKind::parse_error, path + ": " + e.what());
    }
}

json AttributeSchema::to_json() const {
    json attrs = json::array();
    for (const auto& s : specs_)
        attrs.push_back({{"pattern", s.pattern}, {"type", std::string(exec::to_string(s.type))}, {"default", s.default_value}});
    return {{"attributes", attrs}};
}

const AttributeSpec* AttributeSchema::find(std::string_view path) const {
    auto segs = split_path(path);
    for (const auto& spec : specs_) {
        auto pat = split_path(spec.pattern);
        if (pat.size() != segs.size()) continue;
        bool match = true;
        for (std::size_t i = 0; i < pat.size() && match; ++i)
            match = pat[i] == "*" || pat[i] == segs[i];
        if (match) return &spec;
    }
    return nullptr;
}

bool is_scene_name(std::string_view name) {
    if (name.empty()) return false;
    auto first = static_cast<unsigned char>(name[0]);
    if (!(std::isalpha(first) || name[0] == '_')) return false;
    for (char c : name) {
        auto u = static_cast<unsigned char>(c);
        if (!(std::isalnum(u) || c == '_')) return false;
    }
    return true;
}

SceneManifest::SceneManifest(std::vector<ManifestEntry> entries) : entries_(std::move(entries)) {
    std::sort(entries_.begin(), entries_.end(),
              [](const ManifestEntry& a, const ManifestEntry& b) { return a.path < b.path; });
}

const ManifestEntry* SceneManifest::find(std::string_view path) const {
    for (const auto& e : entries_)
        if (e.path == path) return &e;
    return nullptr;
}

std::vector<std::string> SceneManifest::names() const {
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (const auto& e : entries_) {
        auto segs = split_path(e.path);
        for (std::size_t i = 1; i < segs.size(); ++i) {
            std::string s(segs[i]);
            if (seen.insert(s).second) out.push_back(std::move(s));
        }
    }
    return out;
}

json SceneManifest::to_json() const {
    json es = json::array();
    for (const auto& e : entries_) {
        es.push_back({{"path", e.path},
                      {"type", std::string(exec::to_string(e.type))},
                      {"min", e.min ? json(*e.min) : json(nullptr)},
                      {"max", e.max ? json(*e.max) : json(nullptr)},
                      {"default", e.default_value}});
    }
    return {{"entries", es}};
}

SceneManifest SceneManifest::from_json(const json& j) {
    std::vector<ManifestEntry> es;
    for (const auto& e : j.at("entries")) {
        ManifestEntry m;
        m.path = e.at("path").get<std::string>();
        m.type = value_type_from_string(e.at("type").get<std::string>());
        if (e.contains("min") && e["min"].is_number()) m.min = e["min"].get<double>();
        if (e.contains("max") && e["max"].is_number()) m.max = e["max"].get<double>();
        m.default_value = e.at("default").get<std::vector<double>>();
        es.push_back(std::move(m));
    }
    return SceneManifest(std::move(es));
}

SimScene SimScene::from_json(const json& j) {
    if (!j.is_object()) throw Error(ErrorKind::parse_error, "scene must be a JSON object");
    SimScene s;
    if (j.contains("objects")) {
        for (const auto& [name, o] : j["objects"].items()) {
            require_name(name);
            SceneObject obj;
            if (o.contains("shapekeys")) {
                for (const auto& [k, v] : o["shapekeys"].items()) {
                    require_name(k);
                    obj.shapekeys[k] = read_number(v, "shape key value");
                }
            }
            if (o.contains("material")) {
                const auto& m = o["material"];
                if (m.contains("base_color")) obj.material.base_color = read3(m["base_color"], "base_color");
                if (m.contains("metallic")) obj.material.metallic = read_number(m["metallic"], "metallic");
                if (m.contains("roughness")) obj.material.roughness = read_number(m["roughness"], "roughness");
            }
            s.objects[name] = std::move(obj);
        }
    }
    if (j.contains("lights")) {
        for (const auto& [name, l] : j["lights"].items()) {
            require_name(name);
            SceneLight light;
            if (l.contains("color")) light.color = read3(l["color"], "light color");
            if (l.contains("energy")) light.energy = read_number(l["energy"], "light energy");
            s.lights[name] = light;
        }
    }
    if (j.contains("world")) {
        const auto& w = j["world"];
        if (w.contains("background_color")) s.world.background_color = read3(w["background_color"], "background_color");
        if (w.contains("volume_color") && !w["volume_color"].is_null())
            s.world.volume_color = read3(w["volume_color"], "volume_color");
    }
    if (j.contains("camera")) {
        const auto& c = j["camera"];
        if (c.contains("location")) s.camera.location = read3(c["location"], "camera location");
        if (c.contains("rotation")) s.camera.rotation = read3(c["rotation"], "camera rotation");
        if (c.contains("focal_mm")) s.camera.focal_mm = read_number(c["focal_mm"], "focal_mm");
    }
    if (!s.within_bounds()) throw Error(ErrorKind::parse_error, "scene values violate attribute bounds");
    return s;
}

SimScene SimScene::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::config_error, "cannot open scene file " + path);
    try {
        return from_json(json::parse(in));
    } catch (const json::exception& e) {
        throw Error(ErrorKind::parse_error, path + ": " + e.what());
    }
}

json SimScene::to_json() const {
    json objs = json::object();
    for (const auto& [name, o] : objects) {
        objs[name] = {{"shapekeys", o.shapekeys},
                      {"material",
                       {{"base_color", arr(o.material.base_color)},
                        {"metallic", o.material.metallic},
                        {"roughness", o.material.roughness}}}};
    }
    json lts = json::object();
    for (const auto& [name, l] : lights) lts[name] = {{"color", arr(l.color)}, {"energy", l.energy}};
    return {{"objects", objs},
            {"lights", lts},
            {"world",
             {{"background_color", arr(world.background_color)},
              {"volume_color", world.volume_color ? arr(*world.volume_color) : json(nullptr)}}},
            {"camera",
             {{"location", arr(camera.location)}, {"rotation", arr(camera.rotation)}, {"focal_mm", camera.focal_mm}}}};
}

bool SimScene::within_bounds() const {
    for (const auto& [name, o] : objects) {
        if (!is_scene_name(name)) return false;
        for (const auto& [k, v] : o.shapekeys)
            if (!is_scene_name(k) || !unit_ok(v)) return false;
        if (!rgb_ok(o.material.base_color) || !unit_ok(o.material.metallic) || !unit_ok(o.material.roughness))
            return false;
    }
    for (const auto& [name, l] : lights) {
        if (!is_scene_name(name) || !rgb_ok(l.color) || !std::isfinite(l.energy) || l.energy < 0.0) return false;
    }
    if (!rgb_ok(world.background_color)) return false;
    if (world.volume_color && !rgb_ok(*world.volume_color)) return false;
    for (double v : camera.location)
        if (!std::isfinite(v)) return false;
    for (double v : camera.rotation)
        if (!std::isfinite(v)) return false;
    return std::isfinite(camera.focal_mm) && camera.focal_mm > 0.0;
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t SimScene::state_hash() const { return fnv1a64(to_json().dump()); }

SceneManifest SimScene::manifest(const AttributeSchema& schema) const {
    std::vector<ManifestEntry> es;
    auto add = [&](std::string path) {
        const auto* spec = schema.find(path);
        if (!spec) return;
        es.push_back({std::move(path), spec->type, spec->min(), spec->max(), spec->default_value});
    };
    for (const auto& [name, l] : lights) {
        add("light." + name + ".color");
        add("light." + name + ".energy");
    }
    for (const auto& [name, o] : objects) {
        add("material." + name + ".base_color");
        add("material." + name + ".metallic");
        add("material." + name + ".roughness");
        for (const auto& [k, _] : o.shapekeys) add("shapekey." + name + "." + k);
    }
    add("world.background_color");
    add("world.volume_color");
    add("camera.location");
    add("camera.rotation");
    add("camera.focal_mm");
    return SceneManifest(std::move(es));
}

std::optional<std::vector<double>> SimScene::get(std::string_view path) const {
    auto segs = split_path(path);
    auto v3 = [](const std::array<double, 3>& a) { return std::vector<double>{a[0], a[1], a[2]}; };
    if (segs.size() == 3 && segs[0] == "light") {
        auto it = lights.find(std::string(segs[1]));
        if (it == lights.end()) return std::nullopt;
        if (segs[2] == "color") return v3(it->second.color);
        if (segs[2] == "energy") return std::vector<double>{it->second.energy};
        return std::nullopt;
    }
    if (segs.size() == 3 && segs[0] == "material") {
        auto it = objects.find(std::string(segs[1]));
        if (it == objects.end()) return std::nullopt;
        const auto& m = it->second.material;
        if (segs[2] == "base_color") return v3(m.base_color);
        if (segs[2] == "metallic") return std::vector<double>{m.metallic};
        if (segs[2] == "roughness") return std::vector<double>{m.roughness};
        return std::nullopt;
    }
    if (segs.size() == 3 && segs[0] == "shapekey") {
        auto it = objects.find(std::string(segs[1]));
        if (it == objects.end()) return std::nullopt;
        auto k = it->second.shapekeys.find(std::string(segs[2]));
        if (k == it->second.shapekeys.end()) return std::nullopt;
        return std::vector<double>{k->second};
    }
    if (segs.size() == 2 && segs[0] == "world") {
        if (segs[1] == "background_color") return v3(world.background_color);
        if (segs[1] == "volume_color" && world.volume_color) return v3(*world.volume_color);
        return std::nullopt;
    }
    if (segs.size() == 2 && segs[0] == "camera") {
        if (segs[1] == "location") return v3(camera.location);
        if (segs[1] == "rotation") return v3(camera.rotation);
        if (segs[1] == "focal_mm") return std::vector<double>{camera.focal_mm};
    }
    return std::nullopt;
}

void SimScene::set(std::string_view path, const std::vector<double>& values) {
    auto segs = split_path(path);
    auto as3 = [&]() -> std::array<double, 3> {
        if (values.size() != 3) throw Error(ErrorKind::invalid_argument, "expected three values");
        return {values[0], values[1], values[2]};
    };
    auto as1 = [&]() -> double {
        if (values.size() != 1) throw Error(ErrorKind::invalid_argument, "expected one value");
        return values[0];
    };
    auto fail = [&]() { throw Error(ErrorKind::invalid_argument, "no such path " + std::string(path)); };
    if (segs.size() == 3 && segs[0] == "light") {
        auto it = lights.find(std::string(segs[1]));
        if (it == lights.end()) fail();
        if (segs[2] == "color") it->second.color = as3();
        else if (segs[2] == "energy") it->second.energy = as1();
        else fail();
        return;
    }
    if (segs.size() == 3 && (segs[0] == "material" || segs[0] == "shapekey")) {
        auto it = objects.find(std::string(segs[1]));
        if (it == objects.end()) fail();
        auto& o = it->second;
        if (segs[0] == "shapekey") {
            auto k = o.shapekeys.find(std::string(segs[2]));
            if (k == o.shapekeys.end()) fail();
            k->second = as1();
        } else if (segs[2] == "base_color") o.material.base_color = as3();
        else if (segs[2] == "metallic") o.material.metallic = as1();
        else if (segs[2] == "roughness") o.material.roughness = as1();
        else fail();
        return;
    }
    if (segs.size() == 2 && segs[0] == "world") {
        if (segs[1] == "background_color") world.background_color = as3();
        else if (segs[1] == "volume_color") world.volume_color = as3();
        else fail();
        return;
    }
    if (segs.size() == 2 && segs[0] == "camera") {
        if (segs[1] == "location") camera.location = as3();
        else if (segs[1] == "rotation") camera.rotation = as3();
        else if (segs[1] == "focal_mm") camera.focal_mm = as1();
        else fail();
        return;
    }
    fail();
}

} // namespace ezb::exec

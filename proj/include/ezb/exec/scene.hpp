#pragma once

#include "ezb/core/serialize.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ezb::exec {

using Rgb = std::array<double, 3>;
using Vec3 = std::array<double, 3>;

enum class ValueType { rgb, unit, nonneg, positive, vec3 };

std::string_view to_string(ValueType t);
ValueType value_type_from_string(std::string_view s);
std::size_t arity(ValueType t);

// Declared type, valid range and default of one attribute pattern, e.g. `light.*.color`.
struct AttributeSpec {
    std::string pattern;
    ValueType type;
    std::vector<double> default_value;

    // Throws nothing; returns a human-readable reason when `values` is out of range.
    [[nodiscard]] std::optional<std::string> range_error(const std::vector<double>& values) const;
    [[nodiscard]] std::optional<double> min() const;
    [[nodiscard]] std::optional<double> max() const;
};

class AttributeSchema {
public:
    static const AttributeSchema& builtin();
    static AttributeSchema from_json(const json& j);
    static AttributeSchema load(const std::string& path);

    [[nodiscard]] json to_json() const;
    [[nodiscard]] const std::vector<AttributeSpec>& specs() const { return specs_; }
    // Lookup by concrete path (`light.key.color`) or pattern (`light.*.color`).
    [[nodiscard]] const AttributeSpec* find(std::string_view path) const;

private:
    std::vector<AttributeSpec> specs_;
};

struct Material {
    Rgb base_color{0.8, 0.8, 0.8};
    double metallic = 0.0;
    double roughness = 0.5;
    bool operator==(const Material&) const = default;
};

struct SceneObject {
    std::map<std::string, double> shapekeys;
    Material material;
    bool operator==(const SceneObject&) const = default;
};

struct SceneLight {
    Rgb color{1.0, 1.0, 1.0};
    double energy = 1000.0;
    bool operator==(const SceneLight&) const = default;
};

struct World {
    Rgb background_color{0.05, 0.05, 0.05};
    std::optional<Rgb> volume_color;
    bool operator==(const World&) const = default;
};

struct Camera {
    Vec3 location{7.36, -6.93, 4.96};
    Vec3 rotation{1.109, 0.0, 0.815};
    double focal_mm = 50.0;
    bool operator==(const Camera&) const = default;
};

// Scene names: `[A-Za-z_][A-Za-z0-9_]*`.
bool is_scene_name(std::string_view name);

struct ManifestEntry {
    std::string path;
    ValueType type;
    std::optional<double> min;
    std::optional<double> max;
    std::vector<double> default_value;
    bool operator==(const ManifestEntry&) const = default;
};

class SceneManifest {
public:
    SceneManifest() = default;
    explicit SceneManifest(std::vector<ManifestEntry> entries);

    [[nodiscard]] const std::vector<ManifestEntry>& entries() const { return entries_; }
    [[nodiscard]] const ManifestEntry* find(std::string_view path) const;
    // Distinct non-category segments (entity names and attribute names) in manifest order.
    [[nodiscard]] std::vector<std::string> names() const;

    [[nodiscard]] json to_json() const;
    static SceneManifest from_json(const json& j);

    bool operator==(const SceneManifest&) const = default;

private:
    std::vector<ManifestEntry> entries_;
};

class SimScene {
public:
    std::map<std::string, SceneObject> objects;
    std::map<std::string, SceneLight> lights;
    World world;
    Camera camera;

    static SimScene from_json(const json& j);
    static SimScene load(const std::string& path);
    [[nodiscard]] json to_json() const;

    [[nodiscard]] bool within_bounds() const;
    [[nodiscard]] std::uint64_t state_hash() const;
    [[nodiscard]] SceneManifest manifest(const AttributeSchema& schema = AttributeSchema::builtin()) const;

    // Concrete path read/write. `get` returns nullopt for absent paths (including an unset volume).
    [[nodiscard]] std::optional<std::vector<double>> get(std::string_view concrete_path) const;
    void set(std::string_view concrete_path, const std::vector<double>& values);

    bool operator==(const SimScene&) const = default;
};

std::uint64_t fnv1a64(std::string_view bytes);

} // namespace ezb::exec

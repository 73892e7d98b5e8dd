#pragma once

#include "ezb/core/model.hpp"
#include "ezb/exec/scene.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

// Canonical command grammar understood by the mock executor:
//
//   #ezcmd v1
//   create <light|object> <name>
//   set <path> <value...>
//
// Blank lines are ignored and any other line starting with '#' is a comment.
// Paths may be concrete (`light.key.color`) or broadcast (`light.color`
// applies to every light; `shapekey.smile` to every object carrying that key;
// `volume.color` and `background.color` alias the world attributes).
namespace ezb::exec {

struct Command {
    enum class Kind { set, create };
    Kind kind = Kind::set;
    int line = 0;
    std::string path;     // set
    std::vector<double> values;
    std::string category; // create
    std::string name;
};

struct ParsedScript {
    std::vector<Command> commands;
    std::vector<Diagnostic> errors;
    [[nodiscard]] bool ok() const { return errors.empty(); }
};

ParsedScript parse_script(std::string_view body);

std::string format_set_command(std::string_view path, const std::vector<double>& values);
std::string format_create_command(std::string_view category, std::string_view name);

// Concrete target paths plus the attribute spec a (possibly broadcast) path resolves to.
struct Resolution {
    std::vector<std::string> targets;
    const AttributeSpec* spec = nullptr;
    std::optional<Diagnostic> error;
};

Resolution resolve_path(const SimScene& scene, std::string_view path, const AttributeSchema& schema);

// Runs every command against `scene` in order, mutating it. Returns the
// report; on failure `scene` may be partially updated, so callers work on a copy.
ValidationReport apply_script(SimScene& scene, const ParsedScript& script, const AttributeSchema& schema);

// Attribute identity of a path irrespective of the scene: (category, entity or "*", attribute).
struct AttributeKey {
    std::string category;
    std::string entity;
    std::string attribute;
};

std::optional<AttributeKey> attribute_key(std::string_view path);
// Attribute spec a path would resolve to in any scene; nullptr for paths outside the grammar.
const AttributeSpec* spec_for_path(std::string_view path, const AttributeSchema& schema);
// True when writes to `a` and `b` can touch the same scene attribute.
bool paths_overlap(std::string_view a, std::string_view b);

// Whether `constraint` holds syntactically in `body`: some `set` on exactly its
// path carries its value, and no later `set` overlaps that path.
bool script_enforces(std::string_view body, const HardConstraint& constraint);

// Whether `constraint` holds in `scene` (every resolved target equals its value exactly).
bool scene_satisfies(const SimScene& scene, const HardConstraint& constraint,
                     const AttributeSchema& schema = AttributeSchema::builtin());

} // namespace ezb::exec

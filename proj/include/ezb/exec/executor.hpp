#pragma once

#include "ezb/core/model.hpp"
#include "ezb/exec/scene.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ezb::exec {

inline constexpr std::string_view kProtocolVersion = "ezp/1";
inline constexpr int kDefaultPort = 7045;

struct HelloInfo {
    std::string version;
    std::string backend; // "mock" | "bridge"
};

struct ValidateResult {
    ValidationReport report = ValidationReport::pass();
    std::int64_t backend_micros = 0;
};

struct ExecuteResult {
    ValidationReport report = ValidationReport::pass();
    std::int64_t state_version = 0;
    std::int64_t backend_micros = 0;
};

struct RenderSpec {
    int view_index = 0;
    int width = 512;
    int height = 512;
    // Diagnostic renders name the domain they were taken for.
    std::optional<Domain> focus;
};

struct RenderImage {
    std::vector<std::uint8_t> png;
    int width = 0;
    int height = 0;
    int view_index = 0;
    std::optional<Domain> focus;
    std::string digest;
    std::int64_t render_micros = 0;
};

// One backend session bound to one scene document. Transport failures
// surface as Error(executor_unreachable); render failures as Error(render_failed).
class Executor {
public:
    virtual ~Executor() = default;
    virtual HelloInfo hello() = 0;
    virtual ValidateResult validate(const CodeSnippet& script) = 0;
    virtual ExecuteResult execute(const CodeSnippet& script) = 0;
    virtual RenderImage render(const RenderSpec& spec) = 0;
    virtual SceneManifest introspect() = 0;
};

} // namespace ezb::exec

#pragma once

#include "ezb/exec/executor.hpp"
#include "ezb/exec/script.hpp"

#include <atomic>
#include <shared_mutex>

namespace ezb::exec {

struct MockTiming {
    // Virtual timing reports fixed costs so ledgers replay byte-identically.
    bool virtual_clock = true;
    std::int64_t render_cost_micros = 0;
};

// In-process backend over a SimScene. validate/introspect take a shared lock;
// execute/render are serialized on the single mutation lane.
class MockExecutor final : public Executor {
public:
    explicit MockExecutor(SimScene scene = {}, AttributeSchema schema = AttributeSchema::builtin(),
                          MockTiming timing = {});

    HelloInfo hello() override;
    ValidateResult validate(const CodeSnippet& script) override;
    ExecuteResult execute(const CodeSnippet& script) override;
    RenderImage render(const RenderSpec& spec) override;
    SceneManifest introspect() override;

    // Test hook: the next `n` renders throw Error(render_failed).
    void fail_next_renders(int n) { forced_render_failures_ = n; }
    // Test hook: every call throws Error(executor_unreachable) once set.
    void set_unreachable(bool v) { unreachable_ = v; }

    [[nodiscard]] SimScene scene() const;
    [[nodiscard]] std::int64_t state_version() const;
    [[nodiscard]] const AttributeSchema& schema() const { return schema_; }

private:
    void check_reachable() const;

    mutable std::shared_mutex mu_;
    SimScene scene_;
    AttributeSchema schema_;
    MockTiming timing_;
    std::int64_t version_ = 0;
    std::atomic<int> forced_render_failures_{0};
    std::atomic<bool> unreachable_{false};
};

// Deterministic synthetic render: a colour grid expanded from the scene-state
// hash, encoded as PNG with the canonical scene JSON in a tEXt chunk.
RenderImage render_scene(const SimScene& scene, const RenderSpec& spec);

} // namespace ezb::exec

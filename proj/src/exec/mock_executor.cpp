#include "ezb/exec/mock_executor.hpp"

#include "ezb/core/errors.hpp"
#include "ezb/exec/png.hpp"

#include <chrono>
#include <mutex>

namespace ezb::exec {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

class Stopwatch {
public:
    explicit Stopwatch(bool enabled) : enabled_(enabled), start_(std::chrono::steady_clock::now()) {}
    [[nodiscard]] std::int64_t micros() const {
        if (!enabled_) return 0;
        return std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    bool enabled_;
    std::chrono::steady_clock::time_point start_;
};

constexpr int kGridCells = 8;

} // namespace

RenderImage render_scene(const SimScene& scene, const RenderSpec& spec) {
    if (spec.width <= 0 || spec.height <= 0 || spec.width > 8192 || spec.height > 8192)
        throw Error(ErrorKind::invalid_argument, "render resolution out of range");
    if (spec.view_index != 0 && spec.view_index != 1)
        throw Error(ErrorKind::invalid_argument, "view_index must be 0 or 1");

    auto scene_json = scene.to_json().dump();
    std::uint64_t seed = fnv1a64(scene_json) ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(spec.view_index + 1));
    if (spec.focus) seed ^= 0xc2b2ae3d27d4eb4fULL * (domain_index(*spec.focus) + 1);

    std::array<std::array<std::uint8_t, 3>, kGridCells * kGridCells> palette{};
    for (auto& c : palette) {
        auto r = splitmix64(seed);
        c = {static_cast<std::uint8_t>(r), static_cast<std::uint8_t>(r >> 8), static_cast<std::uint8_t>(r >> 16)};
    }
    std::vector<std::uint8_t> rgb(static_cast<std::size_t>(spec.width) * spec.height * 3);
    for (int y = 0; y < spec.height; ++y) {
        int cy = y * kGridCells / spec.height;
        for (int x = 0; x < spec.width; ++x) {
            int cx = x * kGridCells / spec.width;
            const auto& c = palette[static_cast<std::size_t>(cy * kGridCells + cx)];
            auto at = (static_cast<std::size_t>(y) * spec.width + x) * 3;
            rgb[at] = c[0];
            rgb[at + 1] = c[1];
            rgb[at + 2] = c[2];
        }
    }
    std::map<std::string, std::string> text{{"ezb:scene", scene_json},
                                            {"ezb:view", std::to_string(spec.view_index)},
                                            {"ezb:focus", spec.focus ? std::string(to_string(*spec.focus)) : ""}};
    RenderImage img;
    img.png = encode_png(spec.width, spec.height, rgb, text);
    img.width = spec.width;
    img.height = spec.height;
    img.view_index = spec.view_index;
    img.focus = spec.focus;
    img.digest = hex64(fnv1a64(std::string_view(reinterpret_cast<const char*>(img.png.data()), img.png.size())));
    return img;
}

MockExecutor::MockExecutor(SimScene scene, AttributeSchema schema, MockTiming timing)
    : scene_(std::move(scene)), schema_(std::move(schema)), timing_(timing) {
    if (!scene_.within_bounds()) throw Error(ErrorKind::invalid_argument, "initial scene violates bounds");
}

void MockExecutor::check_reachable() const {
    if (unreachable_) throw Error(ErrorKind::executor_unreachable, "mock backend marked unreachable");
}

HelloInfo MockExecutor::hello() {
    check_reachable();
    return {std::string(kProtocolVersion), "mock"};
}

ValidateResult MockExecutor::validate(const CodeSnippet& script) {
    check_reachable();
    Stopwatch sw(!timing_.virtual_clock);
    auto parsed = parse_script(script.body());
    SimScene scratch;
    {
        std::shared_lock lock(mu_);
        scratch = scene_;
    }
    auto report = apply_script(scratch, parsed, schema_);
    return {std::move(report), sw.micros()};
}

ExecuteResult MockExecutor::execute(const CodeSnippet& script) {
    check_reachable();
    Stopwatch sw(!timing_.virtual_clock);
    auto parsed = parse_script(script.body());
    std::unique_lock lock(mu_);
    SimScene next = scene_;
    auto report = apply_script(next, parsed, schema_);
    if (report.passed()) {
        scene_ = std::move(next);
        ++version_;
    }
    return {std::move(report), version_, sw.micros()};
}

RenderImage MockExecutor::render(const RenderSpec& spec) {
    check_reachable();
    Stopwatch sw(!timing_.virtual_clock);
    std::unique_lock lock(mu_);
    int pending = forced_render_failures_.load();
    if (pending > 0) {
        forced_render_failures_ = pending - 1;
        throw Error(ErrorKind::render_failed, "forced render failure");
    }
    auto img = render_scene(scene_, spec);
    img.render_micros = timing_.virtual_clock ? timing_.render_cost_micros : sw.micros();
    return img;
}

SceneManifest MockExecutor::introspect() {
    check_reachable();
    std::shared_lock lock(mu_);
    return scene_.manifest(schema_);
}

SimScene MockExecutor::scene() const {
    std::shared_lock lock(mu_);
    return scene_;
}

std::int64_t MockExecutor::state_version() const {
    std::shared_lock lock(mu_);
    return version_;
}

} // namespace ezb::exec

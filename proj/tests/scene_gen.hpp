#pragma once

// Random SimScenes and command scripts for validator property tests.

#include "ezb/exec/scene.hpp"

#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace ezb::testing {

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * static_cast<double>(rng() >> 11) / 9007199254740992.0;
}

template <class T>
const T& pick(std::mt19937_64& rng, const std::vector<T>& v) {
    return v[rng() % v.size()];
}

inline exec::SimScene random_scene(std::mt19937_64& rng) {
    static const std::vector<std::string> objects{"Face", "Body", "Head", "cube_1"};
    static const std::vector<std::string> keys{"smile", "frown", "blink"};
    static const std::vector<std::string> lights{"Light", "Key", "Fill", "rim"};
    exec::SimScene s;
    for (int i = 0, n = static_cast<int>(rng() % 4); i < n; ++i) {
        exec::SceneObject o;
        for (const auto& k : keys)
            if (rng() % 2) o.shapekeys[k] = uniform(rng, 0, 1);
        o.material.base_color = {uniform(rng, 0, 1), uniform(rng, 0, 1), uniform(rng, 0, 1)};
        o.material.metallic = uniform(rng, 0, 1);
        o.material.roughness = uniform(rng, 0, 1);
        s.objects[pick(rng, objects)] = o;
    }
    for (int i = 0, n = static_cast<int>(rng() % 3); i < n; ++i)
        s.lights[pick(rng, lights)] = exec::SceneLight{{uniform(rng, 0, 1), uniform(rng, 0, 1), uniform(rng, 0, 1)},
                                                       uniform(rng, 0, 3000)};
    s.world.background_color = {uniform(rng, 0, 1), uniform(rng, 0, 1), uniform(rng, 0, 1)};
    if (rng() % 2) s.world.volume_color = exec::Rgb{uniform(rng, 0, 1), uniform(rng, 0, 1), uniform(rng, 0, 1)};
    s.camera.focal_mm = uniform(rng, 10, 120);
    return s;
}

// Mostly the right arity with in-range values; the rest are deliberate mistakes.
inline std::string random_value_list(std::mt19937_64& rng, int arity) {
    std::ostringstream out;
    int n = rng() % 5 == 0 ? static_cast<int>(rng() % 5) : arity;
    for (int i = 0; i < n; ++i) {
        double v = rng() % 6 == 0 ? uniform(rng, -0.5, 1.5) : uniform(rng, 0, 1);
        if (rng() % 10 == 0) v = uniform(rng, 10, 5000);
        out << " " << v;
    }
    if (rng() % 25 == 0) out << " nan";
    if (rng() % 25 == 0) out << " blue";
    return out.str();
}

inline int arity_of(const std::string& attr) {
    static const std::vector<std::string> triples{"color", "colour", "base_color", "background_color", "volume_color",
                                                  "location", "rotation"};
    for (const auto& t : triples)
        if (attr == t) return 3;
    return 1;
}

inline std::string random_script(std::mt19937_64& rng, const exec::SimScene& scene) {
    std::vector<std::string> names{"Face", "Body", "Head", "cube_1", "Light", "Key", "Fill", "rim", "Lihgt", "Fcae", "ghost"};
    for (const auto& [n, _] : scene.objects) names.push_back(n);
    for (const auto& [n, _] : scene.lights) names.push_back(n);
    static const std::vector<std::string> light_attrs{"color", "energy", "colour"};
    static const std::vector<std::string> mat_attrs{"base_color", "metallic", "roughness", "shine"};
    static const std::vector<std::string> keys{"smile", "frown", "blink", "wink"};
    static const std::vector<std::string> world_attrs{"background_color", "volume_color", "fog"};
    static const std::vector<std::string> cam_attrs{"location", "rotation", "focal_mm", "fov"};

    std::ostringstream out;
    if (rng() % 20 != 0) out << "#ezcmd v1\n";
    for (int i = 0, n = 1 + static_cast<int>(rng() % 4); i < n; ++i) {
        std::string attr;
        switch (rng() % 14) {
        case 0: out << "set light." << (attr = pick(rng, light_attrs)); break;
        case 1: out << "set light." << pick(rng, names) << "." << (attr = pick(rng, light_attrs)); break;
        case 2: out << "set material." << (attr = pick(rng, mat_attrs)); break;
        case 3: out << "set material." << pick(rng, names) << "." << (attr = pick(rng, mat_attrs)); break;
        case 4: out << "set shapekey." << (attr = pick(rng, keys)); break;
        case 5: out << "set shapekey." << pick(rng, names) << "." << (attr = pick(rng, keys)); break;
        case 6: out << "set world." << (attr = pick(rng, world_attrs)); break;
        case 7: out << "set camera." << (attr = pick(rng, cam_attrs)); break;
        case 8: out << "set volume.color"; attr = "color"; break;
        case 9: out << "set background.color"; attr = "color"; break;
        case 10:
            out << "create " << (rng() % 2 ? "light" : "object") << " " << pick(rng, names) << "\n";
            continue;
        case 11: out << "create " << (rng() % 2 ? "camera" : "light") << (rng() % 2 ? " 9bad" : ""); out << "\n"; continue;
        case 12: out << (rng() % 2 ? "frobnicate 1\n" : "# a comment\n"); continue;
        default: out << "set " << pick(rng, names) << "." << (attr = pick(rng, light_attrs)); break;
        }
        out << random_value_list(rng, arity_of(attr)) << "\n";
    }
    return out.str();
}

} // namespace ezb::testing

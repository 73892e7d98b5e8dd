#include "ezb/eval/embedding.hpp"

#include "ezb/core/errors.hpp"
#include "ezb/exec/png.hpp"
#include "ezb/exec/script.hpp"
#include "ezb/net/http.hpp"

#include <cmath>
#include <fstream>

namespace ezb::eval {

double l2_norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

void Embedding::validate() const {
    if (vector.empty()) throw Error(ErrorKind::provider_error, "empty embedding");
    for (double x : vector)
        if (!std::isfinite(x)) throw Error(ErrorKind::provider_error, "non-finite embedding component");
    if (normalized && std::abs(l2_norm(vector) - 1.0) > 1e-6)
        throw Error(ErrorKind::provider_error, "embedding flagged normalized but its norm is not 1");
}

Embedding Embedding::unit(std::vector<double> v) {
    double n = l2_norm(v);
    if (n == 0.0) throw Error(ErrorKind::zero_vector, "cannot normalize a zero vector");
    for (double& x : v) x /= n;
    return {std::move(v), true};
}

namespace {

std::vector<double> vec_from_json(const json& j, const std::string& what) {
    if (!j.is_array() || j.empty()) throw Error(ErrorKind::parse_error, what + " must be a non-empty array");
    std::vector<double> v;
    for (const auto& x : j) {
        if (!x.is_number()) throw Error(ErrorKind::parse_error, what + " must hold numbers");
        v.push_back(x.get<double>());
    }
    return v;
}

} // namespace

LookupTableEmbedder LookupTableEmbedder::from_json(const json& j) {
    LookupTableEmbedder t;
    if (!j.is_object() || !j.contains("dim")) throw Error(ErrorKind::parse_error, "embedding table needs 'dim'");
    t.dim_ = j["dim"].get<std::size_t>();
    t.normalize_ = j.value("normalize", false);
    t.model_ = j.value("model", std::string("lookup-table"));
    auto check = [&](std::vector<double> v, const std::string& what) {
        if (v.size() != t.dim_) throw Error(ErrorKind::parse_error, what + " has the wrong dimension");
        return v;
    };
    if (j.contains("texts"))
        for (const auto& [k, v] : j["texts"].items()) t.texts_[k] = check(vec_from_json(v, "texts." + k), "texts." + k);
    if (j.contains("images"))
        for (const auto& [k, v] : j["images"].items()) t.images_[k] = check(vec_from_json(v, "images." + k), "images." + k);
    if (j.contains("image_rules")) {
        for (const auto& r : j["image_rules"]) {
            ImageRule rule;
            if (r.contains("focus") && !r["focus"].is_null())
                rule.focus = domain_from_string(r["focus"].get<std::string>());
            rule.path = r.at("path").get<std::string>();
            rule.equals = vec_from_json(r.at("equals"), "image_rules.equals");
            rule.tolerance = r.value("tolerance", 1e-9);
            rule.vector = check(vec_from_json(r.at("vector"), "image_rules.vector"), "image_rules.vector");
            t.rules_.push_back(std::move(rule));
        }
    }
    if (j.contains("default_image")) t.default_image_ = check(vec_from_json(j["default_image"], "default_image"), "default_image");
    return t;
}

LookupTableEmbedder LookupTableEmbedder::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::config_error, "cannot open embedding table " + path);
    try {
        return from_json(json::parse(in));
    } catch (const json::exception& e) {
        throw Error(ErrorKind::parse_error, path + ": " + e.what());
    }
}

Embedding LookupTableEmbedder::make(const std::vector<double>& v) const {
    if (normalize_) return Embedding::unit(v);
    return {v, false};
}

Embedding LookupTableEmbedder::embed_text(const std::string& text) {
    auto it = texts_.find(text);
    if (it == texts_.end()) throw Error(ErrorKind::provider_error, "no fixture embedding for text '" + text + "'");
    return make(it->second);
}

Embedding LookupTableEmbedder::embed_image(const ImageInput& image) {
    auto digest = exec::hex64(exec::fnv1a64({reinterpret_cast<const char*>(image.bytes.data()), image.bytes.size()}));
    if (auto it = images_.find(digest); it != images_.end()) return make(it->second);
    if (!rules_.empty()) {
        exec::PngInfo info;
        try {
            info = exec::read_png_info(image.bytes);
        } catch (const Error& e) {
            throw Error(ErrorKind::provider_error, std::string("unreadable image: ") + e.what());
        }
        auto scene_it = info.text.find("ezb:scene");
        if (scene_it != info.text.end()) {
            auto scene = exec::SimScene::from_json(json::parse(scene_it->second));
            std::optional<Domain> focus;
            if (auto f = info.text.find("ezb:focus"); f != info.text.end() && !f->second.empty())
                focus = parse_domain(f->second);
            for (const auto& rule : rules_) {
                if (rule.focus && rule.focus != focus) continue;
                auto res = exec::resolve_path(scene, rule.path, exec::AttributeSchema::builtin());
                if (res.error || res.targets.empty()) continue;
                bool all = true;
                for (const auto& t : res.targets) {
                    auto got = scene.get(t);
                    if (!got || got->size() != rule.equals.size()) {
                        all = false;
                        break;
                    }
                    for (std::size_t i = 0; i < got->size(); ++i)
                        all = all && std::abs((*got)[i] - rule.equals[i]) <= rule.tolerance;
                }
                if (all) return make(rule.vector);
            }
        }
    }
    if (default_image_) return make(*default_image_);
    throw Error(ErrorKind::provider_error, "no fixture embedding for image " + digest);
}

void FaultyEmbedder::maybe_fail() {
    std::size_t idx;
    {
        std::lock_guard lock(mu_);
        idx = calls_++;
    }
    if (fail_when_ && fail_when_(idx)) throw Error(ErrorKind::provider_error, "injected embedding failure");
}

Embedding FaultyEmbedder::embed_text(const std::string& text) {
    maybe_fail();
    return inner_.embed_text(text);
}

Embedding FaultyEmbedder::embed_image(const ImageInput& image) {
    maybe_fail();
    return inner_.embed_image(image);
}

HttpEmbedder::HttpEmbedder(std::string base_url, Post post) : base_url_(std::move(base_url)), post_(std::move(post)) {
    while (!base_url_.empty() && base_url_.back() == '/') base_url_.pop_back();
    if (!post_) {
        post_ = [](const std::string& url, const std::map<std::string, std::string>& headers, const std::string& body) {
            auto r = net::post(url, headers, body);
            return Response{r.status, r.body, r.error};
        };
    }
}

Embedding HttpEmbedder::parse_response(const std::string& body) {
    try {
        auto j = json::parse(body);
        Embedding e;
        for (const auto& x : j.at("vector")) e.vector.push_back(x.get<double>());
        e.normalized = j.at("normalized").get<bool>();
        auto dim = j.at("dim").get<std::size_t>();
        if (dim != e.vector.size()) throw Error(ErrorKind::provider_error, "'dim' disagrees with the vector length");
        e.validate();
        return e;
    } catch (const json::exception& ex) {
        throw Error(ErrorKind::provider_error, std::string("malformed embedding response: ") + ex.what());
    }
}

Embedding HttpEmbedder::call(const std::string& path, const std::string& content_type, const std::string& body) {
    auto r = post_(base_url_ + path, {{"Content-Type", content_type}}, body);
    if (!r.error.empty()) throw Error(ErrorKind::provider_error, base_url_ + path + ": " + r.error);
    if (r.status != 200)
        throw Error(ErrorKind::provider_error, base_url_ + path + " returned HTTP " + std::to_string(r.status));
    auto e = parse_response(r.body);
    std::lock_guard lock(mu_);
    if (dim_ && *dim_ != e.dim()) throw Error(ErrorKind::provider_error, "embedding dimension changed between calls");
    dim_ = e.dim();
    return e;
}

Embedding HttpEmbedder::embed_text(const std::string& text) {
    return call("/embed_text", "application/json", json{{"text", text}}.dump());
}

Embedding HttpEmbedder::embed_image(const ImageInput& image) {
    return call("/embed_image", image.media_type,
                std::string(reinterpret_cast<const char*>(image.bytes.data()), image.bytes.size()));
}

} // namespace ezb::eval

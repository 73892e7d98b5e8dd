#pragma once

#include "ezb/core/model.hpp"
#include "ezb/core/serialize.hpp"
#include "ezb/exec/scene.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ezb::eval {

struct Embedding {
    std::vector<double> vector;
    // Whether the producer applied unit l2 normalization.
    bool normalized = false;

    // Checks the normalization flag against the actual norm (1e-6).
    void validate() const;
    [[nodiscard]] std::size_t dim() const { return vector.size(); }
    static Embedding unit(std::vector<double> v);

    bool operator==(const Embedding&) const = default;
};

double l2_norm(std::span<const double> v);

struct ImageInput {
    std::span<const std::uint8_t> bytes;
    std::string media_type = "image/png";
};

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual Embedding embed_text(const std::string& text) = 0;
    virtual Embedding embed_image(const ImageInput& image) = 0;
    [[nodiscard]] virtual std::string model_id() const = 0;
};

// Fixture table. Images resolve by exact digest first, then by rules over the
// scene state a mock render carries in its metadata, then by an optional default.
//
//   {"dim": n, "normalize": false, "model": "...",
//    "texts": {"blue lighting": [...]},
//    "images": {"<digest>": [...]},
//    "image_rules": [{"focus": "light", "path": "light.color", "equals": [r,g,b], "vector": [...]}],
//    "default_image": [...]}
class LookupTableEmbedder final : public EmbeddingProvider {
public:
    struct ImageRule {
        std::optional<Domain> focus;
        std::string path;
        std::vector<double> equals;
        double tolerance = 1e-9;
        std::vector<double> vector;
    };

    static LookupTableEmbedder from_json(const json& j);
    static LookupTableEmbedder load(const std::string& path);

    Embedding embed_text(const std::string& text) override;
    Embedding embed_image(const ImageInput& image) override;
    [[nodiscard]] std::string model_id() const override { return model_; }

    [[nodiscard]] const std::map<std::string, std::vector<double>>& texts() const { return texts_; }

private:
    Embedding make(const std::vector<double>& v) const;

    std::size_t dim_ = 0;
    bool normalize_ = false;
    std::string model_ = "lookup-table";
    std::map<std::string, std::vector<double>> texts_;
    std::map<std::string, std::vector<double>> images_;
    std::vector<ImageRule> rules_;
    std::optional<std::vector<double>> default_image_;
};

// Test double: delegates to `inner` but throws Error(provider_error) whenever
// `fail_when` returns true for the running call index (0-based).
class FaultyEmbedder final : public EmbeddingProvider {
public:
    FaultyEmbedder(EmbeddingProvider& inner, std::function<bool(std::size_t)> fail_when)
        : inner_(inner), fail_when_(std::move(fail_when)) {}

    Embedding embed_text(const std::string& text) override;
    Embedding embed_image(const ImageInput& image) override;
    [[nodiscard]] std::string model_id() const override { return inner_.model_id(); }

private:
    void maybe_fail();
    EmbeddingProvider& inner_;
    std::function<bool(std::size_t)> fail_when_;
    std::mutex mu_;
    std::size_t calls_ = 0;
};

// Client for the embedding sidecar: POST /embed_text {"text"} and
// POST /embed_image (raw bytes, Content-Type = media type), both answering
// {"vector": [...], "normalized": bool, "dim": n}.
class HttpEmbedder final : public EmbeddingProvider {
public:
    struct Response {
        int status = 0;
        std::string body;
        std::string error;
    };
    using Post = std::function<Response(const std::string& url, const std::map<std::string, std::string>& headers,
                                        const std::string& body)>;

    explicit HttpEmbedder(std::string base_url, Post post = {});

    Embedding embed_text(const std::string& text) override;
    Embedding embed_image(const ImageInput& image) override;
    [[nodiscard]] std::string model_id() const override { return "http:" + base_url_; }

    static Embedding parse_response(const std::string& body);

private:
    Embedding call(const std::string& path, const std::string& content_type, const std::string& body);

    std::string base_url_;
    Post post_;
    std::mutex mu_;
    std::optional<std::size_t> dim_;
};

} // namespace ezb::eval

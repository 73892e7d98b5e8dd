#pragma once

#include "ezb/eval/embedding.hpp"

#include <span>
#include <string>
#include <vector>

namespace ezb::eval {

// Raw inner product of the provider's vectors; no renormalization here.
double clip_text_score(const Embedding& image, const Embedding& text);

// Cosine in [-1, 1]. Only floating overshoot within 1e-9 is clamped.
double clip_visual_sim(const Embedding& a, const Embedding& b);

// Batched kernels over a row-major matrix (rows x dim). The parallel versions
// use OpenMP across rows; the serial ones are the reference.
void batch_dot_serial(std::span<const double> rows, std::size_t dim, std::span<const double> query,
                      std::span<double> out);
void batch_dot(std::span<const double> rows, std::size_t dim, std::span<const double> query, std::span<double> out);
void batch_cosine_serial(std::span<const double> rows, std::size_t dim, std::span<const double> query,
                         std::span<double> out);
void batch_cosine(std::span<const double> rows, std::size_t dim, std::span<const double> query, std::span<double> out);

struct SubTaskSpec {
    Domain domain = Domain::geo;
    std::string target;
    std::vector<std::string> candidates;

    // Throws Error(precondition) unless |candidates| >= 2 and target is among them.
    void validate() const;
    bool operator==(const SubTaskSpec&) const = default;
};

json to_json(const SubTaskSpec& s);
SubTaskSpec subtask_from_json(const json& j);

struct Classification {
    std::string predicted;
    std::size_t index = 0;
    bool correct = false;
    std::vector<double> scores; // one per candidate
    double target_score = 0.0;
};

// Top-1 over candidate text scores; ties go to the lowest index.
std::size_t argmax_first(std::span<const double> scores);

Classification classify(const Embedding& image, const SubTaskSpec& spec, EmbeddingProvider& provider);
Classification classify(const ImageInput& image, const SubTaskSpec& spec, EmbeddingProvider& provider);

enum class Outcome { hit, miss, render_failed };

// Mean of the 0/1 outcomes; failed renders count as misses. Throws Error(empty_trial_set) when empty.
double tcr(std::span<const Outcome> outcomes);
double tcr(std::span<const int> outcomes);

} // namespace ezb::eval

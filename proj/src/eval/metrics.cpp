#include "ezb/eval/metrics.hpp"

#include "ezb/core/errors.hpp"

#include <algorithm>
#include <cmath>

namespace ezb::eval {

namespace {

void check_dims(std::size_t a, std::size_t b) {
    if (a != b)
        throw Error(ErrorKind::dimension_mismatch,
                    "embedding dimensions differ (" + std::to_string(a) + " vs " + std::to_string(b) + ")");
}

double dot(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

double clamp_unit(double c) {
    if (c > 1.0 && c <= 1.0 + 1e-9) return 1.0;
    if (c < -1.0 && c >= -1.0 - 1e-9) return -1.0;
    return c;
}

void check_batch(std::span<const double> rows, std::size_t dim, std::span<const double> query, std::span<double> out) {
    check_dims(query.size(), dim);
    if (dim == 0 || rows.size() != out.size() * dim)
        throw Error(ErrorKind::dimension_mismatch, "matrix does not hold out.size() rows of the query dimension");
}

} // namespace

double clip_text_score(const Embedding& image, const Embedding& text) {
    check_dims(image.dim(), text.dim());
    return dot(image.vector.data(), text.vector.data(), image.dim());
}

double clip_visual_sim(const Embedding& a, const Embedding& b) {
    check_dims(a.dim(), b.dim());
    double na = l2_norm(a.vector), nb = l2_norm(b.vector);
    if (na == 0.0 || nb == 0.0) throw Error(ErrorKind::zero_vector, "cosine of a zero vector");
    return clamp_unit(dot(a.vector.data(), b.vector.data(), a.dim()) / (na * nb));
}

void batch_dot_serial(std::span<const double> rows, std::size_t dim, std::span<const double> query,
                      std::span<double> out) {
    check_batch(rows, dim, query, out);
    for (std::size_t r = 0; r < out.size(); ++r) out[r] = dot(rows.data() + r * dim, query.data(), dim);
}

void batch_dot(std::span<const double> rows, std::size_t dim, std::span<const double> query, std::span<double> out) {
    check_batch(rows, dim, query, out);
    const auto n = static_cast<std::ptrdiff_t>(out.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t r = 0; r < n; ++r) out[r] = dot(rows.data() + r * dim, query.data(), dim);
}

void batch_cosine_serial(std::span<const double> rows, std::size_t dim, std::span<const double> query,
                         std::span<double> out) {
    check_batch(rows, dim, query, out);
    double nq = l2_norm(query);
    if (nq == 0.0) throw Error(ErrorKind::zero_vector, "cosine of a zero vector");
    for (std::size_t r = 0; r < out.size(); ++r) {
        const double* row = rows.data() + r * dim;
        double nr = l2_norm({row, dim});
        if (nr == 0.0) throw Error(ErrorKind::zero_vector, "cosine of a zero vector");
        out[r] = clamp_unit(dot(row, query.data(), dim) / (nr * nq));
    }
}

void batch_cosine(std::span<const double> rows, std::size_t dim, std::span<const double> query, std::span<double> out) {
    check_batch(rows, dim, query, out);
    double nq = l2_norm(query);
    if (nq == 0.0) throw Error(ErrorKind::zero_vector, "cosine of a zero vector");
    const auto n = static_cast<std::ptrdiff_t>(out.size());
    bool zero_row = false;
#pragma omp parallel for schedule(static) reduction(|| : zero_row)
    for (std::ptrdiff_t r = 0; r < n; ++r) {
        const double* row = rows.data() + r * dim;
        double nr = l2_norm({row, dim});
        if (nr == 0.0) {
            zero_row = true;
            out[r] = 0.0;
            continue;
        }
        out[r] = clamp_unit(dot(row, query.data(), dim) / (nr * nq));
    }
    if (zero_row) throw Error(ErrorKind::zero_vector, "cosine of a zero vector");
}

void SubTaskSpec::validate() const {
    if (candidates.size() < 2) throw Error(ErrorKind::precondition, "a sub-task needs at least two candidate labels");
    if (std::find(candidates.begin(), candidates.end(), target) == candidates.end())
        throw Error(ErrorKind::precondition, "target label '" + target + "' is not among the candidates");
}

json to_json(const SubTaskSpec& s) {
    return {{"domain", s.domain}, {"target", s.target}, {"candidates", s.candidates}};
}

SubTaskSpec subtask_from_json(const json& j) {
    try {
        SubTaskSpec s;
        s.domain = domain_from_string(j.at("domain").get<std::string>());
        s.target = j.at("target").get<std::string>();
        s.candidates = j.at("candidates").get<std::vector<std::string>>();
        return s;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::parse_error, std::string("bad sub-task: ") + e.what());
    }
}

std::size_t argmax_first(std::span<const double> scores) {
    if (scores.empty()) throw Error(ErrorKind::precondition, "argmax of an empty list");
    std::size_t best = 0;
    for (std::size_t i = 1; i < scores.size(); ++i)
        if (scores[i] > scores[best]) best = i;
    return best;
}

Classification classify(const Embedding& image, const SubTaskSpec& spec, EmbeddingProvider& provider) {
    spec.validate();
    const std::size_t dim = image.dim();
    std::vector<double> rows;
    rows.reserve(dim * spec.candidates.size());
    for (const auto& c : spec.candidates) {
        auto e = provider.embed_text(c);
        check_dims(dim, e.dim());
        rows.insert(rows.end(), e.vector.begin(), e.vector.end());
    }
    Classification out;
    out.scores.resize(spec.candidates.size());
    batch_dot(rows, dim, image.vector, out.scores);
    out.index = argmax_first(out.scores);
    out.predicted = spec.candidates[out.index];
    out.correct = out.predicted == spec.target;
    auto t = std::find(spec.candidates.begin(), spec.candidates.end(), spec.target) - spec.candidates.begin();
    out.target_score = out.scores[static_cast<std::size_t>(t)];
    return out;
}

Classification classify(const ImageInput& image, const SubTaskSpec& spec, EmbeddingProvider& provider) {
    spec.validate();
    return classify(provider.embed_image(image), spec, provider);
}

double tcr(std::span<const Outcome> outcomes) {
    if (outcomes.empty()) throw Error(ErrorKind::empty_trial_set, "TCR over zero sub-tasks");
    std::size_t hits = 0;
    for (auto o : outcomes) hits += o == Outcome::hit ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(outcomes.size());
}

double tcr(std::span<const int> outcomes) {
    if (outcomes.empty()) throw Error(ErrorKind::empty_trial_set, "TCR over zero sub-tasks");
    std::size_t hits = 0;
    for (int o : outcomes) {
        if (o != 0 && o != 1) throw Error(ErrorKind::invalid_argument, "sub-task outcomes must be 0 or 1");
        hits += static_cast<std::size_t>(o);
    }
    return static_cast<double>(hits) / static_cast<double>(outcomes.size());
}

} // namespace ezb::eval

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "chatdrift/corpus.hpp"
#include "chatdrift/errors.hpp"
#include "chatdrift/models.hpp"

namespace chatdrift {

inline constexpr int model_format_version = 1;

// UTF-8 JSON, one model per file. Numbers are emitted as shortest
// round-trip decimals, so a save/load cycle reproduces every weight bit for
// bit.
inline nlohmann::json model_to_json(const LinearModel& m) {
    nlohmann::json j;
    j["format_version"] = model_format_version;
    j["kind"] = std::string(to_string(m.kind));
    j["task"] = std::string(to_string(m.task));
    j["classes"] = m.classes;
    std::vector<double> flat;
    flat.reserve(m.classes.size() * m.dim());
    for (const auto& row : m.weights) flat.insert(flat.end(), row.begin(), row.end());
    j["weights"] = flat;
    j["biases"] = m.biases;
    nlohmann::json vocab = nlohmann::json::object();
    for (std::uint32_t i = 0; i < m.assembly.vocab.size(); ++i) vocab[m.assembly.vocab.terms[i]] = i;
    j["vocabulary"] = std::move(vocab);
    j["idf"] = m.assembly.vocab.idf;
    j["n_docs"] = m.assembly.vocab.n_docs;
    const auto& cc = m.assembly.custom;
    j["custom_config"] = {
        {"enabled", m.assembly.use_custom},
        {"long_word_len", cc.long_word_len},
        {"repeat_run", cc.repeat_run},
        {"discussion_words", std::vector<std::string>(cc.discussion_words.begin(), cc.discussion_words.end())},
        {"identity_words", std::vector<std::string>(cc.identity_words.begin(), cc.identity_words.end())},
        {"question_words", std::vector<std::string>(cc.question_words.begin(), cc.question_words.end())},
    };
    const auto& tc = m.train_config;
    j["train_config"] = {
        {"nb_alpha", tc.nb_alpha},   {"lr_rate", tc.lr_rate},       {"lr_lambda", tc.lr_lambda},
        {"lr_epochs", tc.lr_epochs}, {"lr_tol", tc.lr_tol},         {"svm_lambda", tc.svm_lambda},
        {"svm_epochs", tc.svm_epochs}, {"svm_seed", tc.svm_seed},
    };
    return j;
}

inline void save_model(const LinearModel& m, const std::string& path) {
    write_file(path, model_to_json(m).dump(2) + "\n");
}

namespace detail {

template <typename T>
T json_get(const nlohmann::json& j, const char* key) {
    if (!j.contains(key)) fail(Errc::corrupt_file, std::string("model file: missing field \"") + key + '"');
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        fail(Errc::corrupt_file, std::string("model file: field \"") + key + "\" has the wrong type");
    }
}

} // namespace detail

inline LinearModel model_from_json(const nlohmann::json& j) {
    if (!j.is_object()) fail(Errc::corrupt_file, "model file: not a JSON object");
    const int version = detail::json_get<int>(j, "format_version");
    if (version != model_format_version) {
        fail(Errc::version_mismatch, "model file: format_version " + std::to_string(version) +
                                         " unsupported (expected " + std::to_string(model_format_version) + ")");
    }
    LinearModel m;
    const auto kind_s = detail::json_get<std::string>(j, "kind");
    if (!parse_model_kind(kind_s, m.kind)) fail(Errc::corrupt_file, "model file: unknown kind \"" + kind_s + '"');
    const auto task_s = detail::json_get<std::string>(j, "task");
    if (!parse_task(task_s, m.task)) fail(Errc::corrupt_file, "model file: unknown task \"" + task_s + '"');
    m.classes = detail::json_get<std::vector<std::string>>(j, "classes");
    m.biases = detail::json_get<std::vector<double>>(j, "biases");
    const auto flat = detail::json_get<std::vector<double>>(j, "weights");

    const auto vocab_obj = detail::json_get<nlohmann::json>(j, "vocabulary");
    if (!vocab_obj.is_object()) fail(Errc::corrupt_file, "model file: vocabulary must be an object");
    auto& vocab = m.assembly.vocab;
    vocab.terms.assign(vocab_obj.size(), std::string());
    std::vector<bool> taken(vocab_obj.size(), false);
    for (auto it = vocab_obj.begin(); it != vocab_obj.end(); ++it) {
        if (!it.value().is_number_unsigned() && !it.value().is_number_integer())
            fail(Errc::corrupt_file, "model file: vocabulary indices must be integers");
        const auto ix = it.value().get<std::int64_t>();
        if (ix < 0 || ix >= static_cast<std::int64_t>(vocab.terms.size()) || taken[static_cast<std::size_t>(ix)])
            fail(Errc::corrupt_file, "model file: vocabulary indices must cover 0..V-1 exactly once");
        taken[static_cast<std::size_t>(ix)] = true;
        vocab.terms[static_cast<std::size_t>(ix)] = it.key();
        vocab.index.emplace(it.key(), static_cast<std::uint32_t>(ix));
    }
    vocab.idf = detail::json_get<std::vector<double>>(j, "idf");
    if (vocab.idf.size() != vocab.terms.size())
        fail(Errc::corrupt_file, "model file: idf length does not match the vocabulary");
    vocab.n_docs = detail::json_get<std::uint32_t>(j, "n_docs");

    const auto cc = detail::json_get<nlohmann::json>(j, "custom_config");
    m.assembly.use_custom = detail::json_get<bool>(cc, "enabled");
    m.assembly.custom.long_word_len = detail::json_get<int>(cc, "long_word_len");
    m.assembly.custom.repeat_run = detail::json_get<int>(cc, "repeat_run");
    auto as_set = [&](const char* key) {
        const auto v = detail::json_get<std::vector<std::string>>(cc, key);
        return std::set<std::string>(v.begin(), v.end());
    };
    m.assembly.custom.discussion_words = as_set("discussion_words");
    m.assembly.custom.identity_words = as_set("identity_words");
    m.assembly.custom.question_words = as_set("question_words");
    m.assembly.task = m.task;

    const auto tc = detail::json_get<nlohmann::json>(j, "train_config");
    m.train_config.nb_alpha = detail::json_get<double>(tc, "nb_alpha");
    m.train_config.lr_rate = detail::json_get<double>(tc, "lr_rate");
    m.train_config.lr_lambda = detail::json_get<double>(tc, "lr_lambda");
    m.train_config.lr_epochs = detail::json_get<int>(tc, "lr_epochs");
    m.train_config.lr_tol = detail::json_get<double>(tc, "lr_tol");
    m.train_config.svm_lambda = detail::json_get<double>(tc, "svm_lambda");
    m.train_config.svm_epochs = detail::json_get<int>(tc, "svm_epochs");
    m.train_config.svm_seed = detail::json_get<std::uint64_t>(tc, "svm_seed");

    const std::size_t dim = m.assembly.dim();
    if (m.biases.size() != m.classes.size() || m.classes.empty())
        fail(Errc::corrupt_file, "model file: classes/biases length mismatch");
    if (flat.size() != m.classes.size() * dim)
        fail(Errc::corrupt_file, "model file: weights length does not match classes x dim");
    m.weights.assign(m.classes.size(), std::vector<double>(dim));
    for (std::size_t c = 0; c < m.classes.size(); ++c)
        std::copy(flat.begin() + static_cast<std::ptrdiff_t>(c * dim),
                  flat.begin() + static_cast<std::ptrdiff_t>((c + 1) * dim), m.weights[c].begin());
    return m;
}

inline LinearModel load_model(const std::string& path) {
    const std::string text = read_file(path);
    nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded()) fail(Errc::corrupt_file, "model file: invalid JSON: " + path);
    return model_from_json(j);
}

} // namespace chatdrift

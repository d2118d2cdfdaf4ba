#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "chatdrift/corpus.hpp"
#include "chatdrift/errors.hpp"
#include "chatdrift/textprep.hpp"
#include "chatdrift/unicode.hpp"

namespace chatdrift {

// Sparse feature vector: (index, value) entries sorted by index, no explicit
// zeros, plus the total dimensionality it lives in.
struct SparseVector {
    std::vector<std::pair<std::uint32_t, double>> entries;
    std::uint32_t dim = 0;

    double l2_norm() const {
        double s = 0.0;
        for (const auto& [i, v] : entries) s += v * v;
        return std::sqrt(s);
    }

    friend bool operator==(const SparseVector&, const SparseVector&) = default;
};

inline double dot(const std::vector<double>& w, const SparseVector& x) {
    double s = 0.0;
    for (const auto& [i, v] : x.entries) s += w[i] * v;
    return s;
}

// Vocabulary with smoothed idf. Term indices are assigned in lexicographic
// term order so a refit on the same corpus is bit-identical.
struct TfidfVocabulary {
    std::vector<std::string> terms;                       // index -> term
    std::unordered_map<std::string, std::uint32_t> index; // term -> index
    std::vector<double> idf;
    std::uint32_t n_docs = 0;

    std::uint32_t size() const { return static_cast<std::uint32_t>(terms.size()); }

    friend bool operator==(const TfidfVocabulary& a, const TfidfVocabulary& b) {
        return a.terms == b.terms && a.idf == b.idf && a.n_docs == b.n_docs;
    }
};

// idf(t) = ln((1 + n_docs) / (1 + df(t))) + 1. Requires at least one
// non-empty document.
inline TfidfVocabulary fit_tfidf(const std::vector<TokenList>& docs) {
    std::map<std::string, std::uint32_t> df; // ordered => deterministic indices
    bool any = false;
    for (const auto& doc : docs) {
        if (doc.tokens.empty()) continue;
        any = true;
        std::set<std::string_view> seen;
        for (const auto& t : doc.tokens)
            if (seen.insert(t).second) ++df[t];
    }
    if (!any) fail(Errc::empty_corpus, "tf-idf fit: no non-empty documents");
    TfidfVocabulary v;
    v.n_docs = static_cast<std::uint32_t>(docs.size());
    v.terms.reserve(df.size());
    v.idf.reserve(df.size());
    for (const auto& [term, count] : df) {
        v.index.emplace(term, static_cast<std::uint32_t>(v.terms.size()));
        v.terms.push_back(term);
        v.idf.push_back(std::log((1.0 + v.n_docs) / (1.0 + count)) + 1.0);
    }
    return v;
}

// Raw term counts times idf, L2-normalized. Unknown terms are ignored; a
// document with no known terms comes back as the zero vector.
inline SparseVector transform_tfidf(const TokenList& doc, const TfidfVocabulary& v) {
    std::map<std::uint32_t, double> tf;
    for (const auto& t : doc.tokens) {
        auto it = v.index.find(t);
        if (it != v.index.end()) tf[it->second] += 1.0;
    }
    SparseVector x;
    x.dim = v.size();
    x.entries.reserve(tf.size());
    double sq = 0.0;
    for (const auto& [i, count] : tf) {
        const double w = count * v.idf[i];
        x.entries.emplace_back(i, w);
        sq += w * w;
    }
    if (sq > 0.0) {
        const double inv = 1.0 / std::sqrt(sq);
        for (auto& [i, w] : x.entries) w *= inv;
    }
    return x;
}

enum class CustomFeature { long_word, repeat_run, discussion, identity, question };

inline std::string_view to_string(CustomFeature f) {
    switch (f) {
        case CustomFeature::long_word: return "long_word";
        case CustomFeature::repeat_run: return "repeat_run";
        case CustomFeature::discussion: return "discussion";
        case CustomFeature::identity: return "identity";
        default: return "question";
    }
}

// Thresholds and keyword sets behind the hand-crafted binary features.
struct CustomFeatureConfig {
    int long_word_len = 12; // fires on tokens strictly longer than this
    int repeat_run = 3;     // fires on runs of one code point at least this long
    std::set<std::string> discussion_words = {"lahko", "bi"};
    std::set<std::string> identity_words = {"kdo", "jaz", "ime"};
    std::set<std::string> question_words = {"ali", "kdo", "kaj", "kje", "kam", "kdaj", "zakaj", "kako", "koliko"};

    friend bool operator==(const CustomFeatureConfig&, const CustomFeatureConfig&) = default;
};

// Which features each task uses, in the order they occupy tail dimensions.
inline const std::vector<CustomFeature>& enabled_features(Task task) {
    static const std::vector<CustomFeature> relevance = {CustomFeature::long_word, CustomFeature::repeat_run,
                                                         CustomFeature::discussion};
    static const std::vector<CustomFeature> type = {CustomFeature::question};
    static const std::vector<CustomFeature> category = {CustomFeature::long_word, CustomFeature::repeat_run,
                                                        CustomFeature::discussion, CustomFeature::identity};
    switch (task) {
        case Task::relevance: return relevance;
        case Task::type: return type;
        default: return category;
    }
}

namespace detail {

inline bool has_long_token(const TokenList& t, int longer_than) {
    for (const auto& tok : t.tokens)
        if (uni::length(tok) > static_cast<std::size_t>(longer_than)) return true;
    return false;
}

inline bool has_repeat_run(std::string_view raw, int at_least) {
    std::size_t i = 0;
    char32_t prev = 0;
    int run = 0;
    while (i < raw.size()) {
        const char32_t cp = uni::decode(raw, i);
        run = (cp == prev) ? run + 1 : 1;
        prev = cp;
        if (run >= at_least) return true;
    }
    return false;
}

inline bool intersects(const std::vector<std::string>& tokens, const std::set<std::string>& words) {
    for (const auto& t : tokens)
        if (words.count(t)) return true;
    return false;
}

} // namespace detail

inline double extract_custom_feature(CustomFeature f, std::string_view raw_text, const TokenList& tokens,
                                     const CustomFeatureConfig& cfg) {
    switch (f) {
        case CustomFeature::long_word:
            return detail::has_long_token(tokens, cfg.long_word_len) ? 1.0 : 0.0;
        case CustomFeature::repeat_run:
            return detail::has_repeat_run(raw_text, cfg.repeat_run) ? 1.0 : 0.0;
        case CustomFeature::discussion:
            return detail::intersects(tokens.tokens, cfg.discussion_words) ? 1.0 : 0.0;
        case CustomFeature::identity:
            return detail::intersects(tokens.tokens, cfg.identity_words) ? 1.0 : 0.0;
        case CustomFeature::question:
            return (tokens.had_question_mark || detail::intersects(tokens.tokens, cfg.question_words)) ? 1.0 : 0.0;
    }
    return 0.0;
}

// Values of the task's enabled features, in enabled_features(task) order.
inline std::vector<double> extract_custom(std::string_view raw_text, const TokenList& tokens,
                                          const CustomFeatureConfig& cfg, Task task) {
    std::vector<double> out;
    const auto& feats = enabled_features(task);
    out.reserve(feats.size());
    for (CustomFeature f : feats) out.push_back(extract_custom_feature(f, raw_text, tokens, cfg));
    return out;
}

// Fitted feature space for one task: tf-idf block followed by the custom
// binary features (when enabled) as tail dimensions.
struct FeatureAssembly {
    Task task = Task::relevance;
    TfidfVocabulary vocab;
    CustomFeatureConfig custom;
    bool use_custom = true;

    std::uint32_t custom_dim() const {
        return use_custom ? static_cast<std::uint32_t>(enabled_features(task).size()) : 0;
    }
    std::uint32_t dim() const { return vocab.size() + custom_dim(); }

    SparseVector assemble(std::string_view raw_text, const TokenList& prepped) const {
        SparseVector x = transform_tfidf(prepped, vocab);
        x.dim = dim();
        if (use_custom) {
            const auto vals = extract_custom(raw_text, prepped, custom, task);
            for (std::size_t k = 0; k < vals.size(); ++k)
                if (vals[k] != 0.0)
                    x.entries.emplace_back(vocab.size() + static_cast<std::uint32_t>(k), vals[k]);
        }
        return x;
    }

    friend bool operator==(const FeatureAssembly&, const FeatureAssembly&) = default;
};

// Fits the assembly on a training set: tf-idf over the preprocessed texts.
inline FeatureAssembly fit_assembly(const Dataset& train, Task task, const Preprocessor& prep,
                                    const CustomFeatureConfig& cfg, bool use_custom) {
    std::vector<TokenList> docs;
    docs.reserve(train.size());
    for (const auto& m : train.messages) docs.push_back(prep.run(m.text));
    FeatureAssembly fa;
    fa.task = task;
    fa.vocab = fit_tfidf(docs);
    fa.custom = cfg;
    fa.use_custom = use_custom;
    return fa;
}

inline SparseVector assemble_message(const Message& m, const FeatureAssembly& fa, const Preprocessor& prep) {
    return fa.assemble(m.text, prep.run(m.text));
}

} // namespace chatdrift

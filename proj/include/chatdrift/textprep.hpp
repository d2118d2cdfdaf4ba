#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "chatdrift/corpus.hpp"
#include "chatdrift/errors.hpp"
#include "chatdrift/unicode.hpp"

namespace chatdrift {

struct TokenList {
    std::vector<std::string> tokens;
    bool had_question_mark = false;
};

// Splits on maximal runs of non-alphanumeric code points, case-folds each
// token, and records whether a '?' occurred anywhere in the raw text.
inline TokenList tokenize(std::string_view text) {
    TokenList out;
    std::string cur;
    std::size_t i = 0;
    while (i < text.size()) {
        const char32_t cp = uni::decode(text, i);
        if (cp == U'?') out.had_question_mark = true;
        if (uni::is_word(cp)) {
            uni::encode(uni::fold(cp), cur);
        } else if (!cur.empty()) {
            out.tokens.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.tokens.push_back(std::move(cur));
    return out;
}

// Drops everything that is neither alphanumeric nor whitespace, collapses
// whitespace runs to single spaces, trims the ends. Case is preserved.
inline std::string strip_special(std::string_view text) {
    std::string out;
    bool pending_space = false;
    std::size_t i = 0;
    while (i < text.size()) {
        const char32_t cp = uni::decode(text, i);
        if (uni::is_word(cp)) {
            if (pending_space && !out.empty()) out.push_back(' ');
            pending_space = false;
            uni::encode(cp, out);
        } else if (uni::is_space(cp)) {
            pending_space = true;
        }
        // anything else is removed outright
    }
    return out;
}

// token -> lemma lookup with identity fallback. File format: one
// "token<TAB>lemma" pair per line, '#' starts a comment line.
class LemmaDictionary {
public:
    LemmaDictionary() = default;

    static LemmaDictionary from_text(std::string_view text) {
        LemmaDictionary d;
        std::size_t line_no = 0;
        std::size_t pos = 0;
        while (pos <= text.size()) {
            const std::size_t eol = std::min(text.find('\n', pos), text.size());
            std::string_view line = text.substr(pos, eol - pos);
            ++line_no;
            pos = eol + 1;
            if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
            if (line.empty() || line.front() == '#') continue;
            const std::size_t tab = line.find('\t');
            if (tab == std::string_view::npos || tab == 0 || tab + 1 >= line.size()) {
                std::ostringstream os;
                os << "lemma dictionary line " << line_no << ": expected token<TAB>lemma";
                fail(Errc::bad_field, os.str());
            }
            d.map_[std::string(line.substr(0, tab))] = std::string(line.substr(tab + 1));
        }
        return d;
    }

    static LemmaDictionary load(const std::string& path) { return from_text(read_file(path)); }

    const std::string& lookup(const std::string& token) const {
        auto it = map_.find(token);
        return it == map_.end() ? token : it->second;
    }

    std::size_t size() const { return map_.size(); }

private:
    std::unordered_map<std::string, std::string> map_;
};

inline TokenList lemmatize(TokenList in, const LemmaDictionary& dict) {
    for (auto& t : in.tokens) {
        const std::string& lemma = dict.lookup(t);
        if (&lemma != &t) t = lemma;
    }
    return in;
}

// Stop-word list: one token per line, '#' comments, blank lines ignored.
inline std::set<std::string> load_stopwords_text(std::string_view text) {
    std::set<std::string> words;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t eol = std::min(text.find('\n', pos), text.size());
        std::string_view line = text.substr(pos, eol - pos);
        pos = eol + 1;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty() || line.front() == '#') continue;
        words.insert(std::string(line));
    }
    return words;
}

inline std::set<std::string> load_stopwords(const std::string& path) {
    return load_stopwords_text(read_file(path));
}

inline TokenList filter_stopwords(TokenList in, const std::set<std::string>& stopwords) {
    std::erase_if(in.tokens, [&](const std::string& t) { return stopwords.count(t) > 0; });
    return in;
}

// The preprocessing stack applied before feature extraction: tokenize, then
// lemma lookup, then (opt-in, off by default) stop-word filtering.
struct Preprocessor {
    LemmaDictionary lemmas;
    std::set<std::string> stopwords;
    bool filter = false;

    TokenList run(std::string_view text) const {
        TokenList t = lemmatize(tokenize(text), lemmas);
        if (filter) t = filter_stopwords(std::move(t), stopwords);
        return t;
    }
};

// One story text per book, to be appended to a training set.
struct Story {
    std::string book_id;
    std::string text;
};

// Splits a raw story into sentence-sized chunks on '.', '!' and '?', strips
// each chunk, and drops chunks shorter than 3 tokens.
inline std::vector<std::string> story_chunks(std::string_view story) {
    std::vector<std::string> chunks;
    std::string cur;
    std::size_t i = 0;
    auto flush = [&] {
        std::string stripped = strip_special(cur);
        if (!stripped.empty() && tokenize(stripped).tokens.size() >= 3) chunks.push_back(std::move(stripped));
        cur.clear();
    };
    while (i < story.size()) {
        const std::size_t before = i;
        const char32_t cp = uni::decode(story, i);
        if (cp == U'.' || cp == U'!' || cp == U'?') {
            flush();
        } else {
            cur.append(story.substr(before, i - before));
        }
    }
    flush();
    return chunks;
}

// Appends story chunks to train as teacher/relevant/discussion/statement
// messages, seq continuing each book's conversation. Originals are untouched.
// With strict = true a story whose book_id matches no conversation is an
// error; otherwise it starts its own conversation at seq 0.
inline Dataset augment_with_stories(const Dataset& train, const std::vector<Story>& stories, bool strict = false) {
    Dataset out = train;
    std::map<std::string, std::int64_t> next_seq;
    for (const auto& m : train.messages) {
        auto& ns = next_seq[m.book_id];
        ns = std::max(ns, m.seq + 1);
    }
    for (const auto& story : stories) {
        auto it = next_seq.find(story.book_id);
        if (it == next_seq.end()) {
            if (strict) fail(Errc::unknown_book, "story for unknown book: " + story.book_id);
            it = next_seq.emplace(story.book_id, 0).first;
        }
        std::size_t k = 0;
        for (auto& chunk : story_chunks(story.text)) {
            Message m;
            m.message_id = "story-" + story.book_id + "-" + std::to_string(k++);
            m.book_id = story.book_id;
            m.seq = it->second++;
            m.user_role = UserRole::teacher;
            m.text = std::move(chunk);
            m.relevance = Relevance::yes;
            m.type = MsgType::statement;
            m.category = Category::discussion;
            out.messages.push_back(std::move(m));
        }
    }
    out.canonicalize();
    return out;
}

} // namespace chatdrift

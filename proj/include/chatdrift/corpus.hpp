#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "chatdrift/csv.hpp"
#include "chatdrift/errors.hpp"
#include "chatdrift/rng.hpp"

namespace chatdrift {

enum class Relevance { yes, no };
enum class MsgType { question, answer, statement };          // Q, A, S
enum class Category { chatting, discussion, identity, moderating, other, switching }; // C, D, I, M, O, S
enum class UserRole { student, teacher };
enum class Task { relevance, type, category };

inline std::string_view to_string(Relevance r) { return r == Relevance::yes ? "Yes" : "No"; }
inline std::string_view to_string(MsgType t) {
    switch (t) {
        case MsgType::question: return "Q";
        case MsgType::answer: return "A";
        default: return "S";
    }
}
inline std::string_view to_string(Category c) {
    switch (c) {
        case Category::chatting: return "C";
        case Category::discussion: return "D";
        case Category::identity: return "I";
        case Category::moderating: return "M";
        case Category::other: return "O";
        default: return "S";
    }
}
inline std::string_view to_string(UserRole r) { return r == UserRole::student ? "student" : "teacher"; }
inline std::string_view to_string(Task t) {
    switch (t) {
        case Task::relevance: return "relevance";
        case Task::type: return "type";
        default: return "category";
    }
}

namespace detail {
inline std::string lower_ascii(std::string_view s) {
    std::string out(s);
    for (char& c : out)
        if (c >= 'A' && c <= 'Z') c += 0x20;
    return out;
}
} // namespace detail

inline bool parse_relevance(std::string_view s, Relevance& out) {
    const std::string v = detail::lower_ascii(s);
    if (v == "yes") out = Relevance::yes;
    else if (v == "no") out = Relevance::no;
    else return false;
    return true;
}
inline bool parse_msg_type(std::string_view s, MsgType& out) {
    const std::string v = detail::lower_ascii(s);
    if (v == "q") out = MsgType::question;
    else if (v == "a") out = MsgType::answer;
    else if (v == "s") out = MsgType::statement;
    else return false;
    return true;
}
inline bool parse_category(std::string_view s, Category& out) {
    const std::string v = detail::lower_ascii(s);
    if (v == "c") out = Category::chatting;
    else if (v == "d") out = Category::discussion;
    else if (v == "i") out = Category::identity;
    else if (v == "m") out = Category::moderating;
    else if (v == "o") out = Category::other;
    else if (v == "s") out = Category::switching;
    else return false;
    return true;
}
inline bool parse_user_role(std::string_view s, UserRole& out) {
    const std::string v = detail::lower_ascii(s);
    if (v == "student") out = UserRole::student;
    else if (v == "teacher") out = UserRole::teacher;
    else return false;
    return true;
}
inline bool parse_task(std::string_view s, Task& out) {
    const std::string v = detail::lower_ascii(s);
    if (v == "relevance") out = Task::relevance;
    else if (v == "type") out = Task::type;
    else if (v == "category") out = Task::category;
    else return false;
    return true;
}

struct Message {
    std::string message_id;
    std::string book_id;
    std::int64_t seq = 0;
    UserRole user_role = UserRole::student;
    std::string text;
    Relevance relevance = Relevance::no;
    MsgType type = MsgType::statement;
    Category category = Category::chatting;

    friend bool operator==(const Message&, const Message&) = default;
};

// Gold label of a message under a task, as the canonical label string.
inline std::string label_of(const Message& m, Task task) {
    switch (task) {
        case Task::relevance: return std::string(to_string(m.relevance));
        case Task::type: return std::string(to_string(m.type));
        default: return std::string(to_string(m.category));
    }
}

// A corpus in canonical iteration order: book_id lexicographic, then seq.
struct Dataset {
    std::vector<Message> messages;

    std::size_t size() const { return messages.size(); }
    bool empty() const { return messages.empty(); }

    void canonicalize() {
        std::stable_sort(messages.begin(), messages.end(), [](const Message& a, const Message& b) {
            if (a.book_id != b.book_id) return a.book_id < b.book_id;
            return a.seq < b.seq;
        });
    }

    // Contiguous [begin, end) index ranges per conversation, canonical order.
    std::vector<std::pair<std::size_t, std::size_t>> conversations() const {
        std::vector<std::pair<std::size_t, std::size_t>> spans;
        std::size_t start = 0;
        for (std::size_t i = 1; i <= messages.size(); ++i) {
            if (i == messages.size() || messages[i].book_id != messages[start].book_id) {
                spans.emplace_back(start, i);
                start = i;
            }
        }
        return spans;
    }

    friend bool operator==(const Dataset&, const Dataset&) = default;
};

inline const std::vector<std::string>& corpus_columns() {
    static const std::vector<std::string> cols = {"message_id", "book_id", "seq",  "user_role",
                                                  "text",       "relevance", "type", "category"};
    return cols;
}

namespace detail {

inline std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r' || s[b] == '\n')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r' || s[e - 1] == '\n')) --e;
    return std::string(s.substr(b, e - b));
}

[[noreturn]] inline void bad_field(std::size_t row, std::string_view column, std::string_view value) {
    std::ostringstream os;
    os << "row " << row << ", column " << column << ": bad value \"" << value << '"';
    fail(Errc::bad_field, os.str());
}

// Validates per-conversation seq: starts at 0, strictly increasing, contiguous.
inline void check_contiguous(const Dataset& d) {
    for (auto [b, e] : d.conversations()) {
        for (std::size_t i = b; i < e; ++i) {
            const std::int64_t want = static_cast<std::int64_t>(i - b);
            if (d.messages[i].seq != want) {
                std::ostringstream os;
                os << "conversation " << d.messages[i].book_id << ": seq values not contiguous from 0 (expected "
                   << want << ", found " << d.messages[i].seq << ")";
                fail(Errc::non_contiguous_seq, os.str());
            }
        }
    }
}

} // namespace detail

// Parses a transcript CSV. Row numbers in errors are 1-based file rows
// (header = row 1). seq is taken from the file, never from row order, so a
// reordered file either still loads correctly or fails loudly.
inline Dataset load_csv_text(std::string_view text) {
    const auto rows = csv::parse(text);
    if (rows.empty()) fail(Errc::missing_column, "empty file: missing header row");
    const auto& header = rows.front();
    const auto& want = corpus_columns();
    for (const auto& col : want) {
        if (std::find(header.begin(), header.end(), col) == header.end())
            fail(Errc::missing_column, "missing required column: " + col);
    }
    if (header.size() != want.size()) fail(Errc::missing_column, "header must contain exactly the 8 transcript columns");
    std::vector<std::size_t> at(want.size());
    for (std::size_t c = 0; c < want.size(); ++c)
        at[c] = static_cast<std::size_t>(std::find(header.begin(), header.end(), want[c]) - header.begin());

    Dataset d;
    d.messages.reserve(rows.size() - 1);
    std::unordered_set<std::string> seen_ids;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        const std::size_t file_row = r + 1;
        if (row.size() != want.size()) {
            std::ostringstream os;
            os << "row " << file_row << ": expected " << want.size() << " fields, found " << row.size();
            fail(Errc::bad_field, os.str());
        }
        Message m;
        m.message_id = row[at[0]];
        m.book_id = row[at[1]];
        const std::string& seq_s = row[at[2]];
        try {
            std::size_t pos = 0;
            m.seq = std::stoll(seq_s, &pos);
            if (pos != seq_s.size()) detail::bad_field(file_row, "seq", seq_s);
        } catch (const std::logic_error&) {
            detail::bad_field(file_row, "seq", seq_s);
        }
        if (m.seq < 0) detail::bad_field(file_row, "seq", seq_s);
        if (!parse_user_role(row[at[3]], m.user_role)) detail::bad_field(file_row, "user_role", row[at[3]]);
        m.text = row[at[4]];
        if (detail::trim(m.text).empty()) detail::bad_field(file_row, "text", "(empty)");
        if (!parse_relevance(row[at[5]], m.relevance)) detail::bad_field(file_row, "relevance", row[at[5]]);
        if (!parse_msg_type(row[at[6]], m.type)) detail::bad_field(file_row, "type", row[at[6]]);
        if (!parse_category(row[at[7]], m.category)) detail::bad_field(file_row, "category", row[at[7]]);
        if (m.message_id.empty()) detail::bad_field(file_row, "message_id", "(empty)");
        if (m.book_id.empty()) detail::bad_field(file_row, "book_id", "(empty)");
        if (!seen_ids.insert(m.message_id).second)
            fail(Errc::duplicate_id, "duplicate message_id: " + m.message_id);
        d.messages.push_back(std::move(m));
    }
    d.canonicalize();
    detail::check_contiguous(d);
    return d;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(Errc::io_error, "cannot open file: " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

inline void write_file(const std::string& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(Errc::io_error, "cannot write file: " + path);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) fail(Errc::io_error, "short write: " + path);
}

inline Dataset load_csv(const std::string& path) { return load_csv_text(read_file(path)); }

inline std::string to_csv_text(const Dataset& d) {
    std::string out;
    csv::write_row(out, corpus_columns());
    for (const auto& m : d.messages) {
        csv::write_row(out, {m.message_id, m.book_id, std::to_string(m.seq), std::string(to_string(m.user_role)),
                             m.text, std::string(to_string(m.relevance)), std::string(to_string(m.type)),
                             std::string(to_string(m.category))});
    }
    return out;
}

inline void save_csv(const Dataset& d, const std::string& path) { write_file(path, to_csv_text(d)); }

// Seeded random split into n_train / (n - n_train) messages. Disjoint union
// reproduces d; both parts come back in canonical order.
inline std::pair<Dataset, Dataset> split_random(const Dataset& d, std::size_t n_train, std::uint64_t seed) {
    if (n_train > d.size()) {
        std::ostringstream os;
        os << "n_train = " << n_train << " exceeds corpus size " << d.size();
        fail(Errc::bad_size, os.str());
    }
    std::mt19937_64 g(seed);
    auto idx = shuffled_indices(d.size(), g);
    std::vector<bool> in_train(d.size(), false);
    for (std::size_t i = 0; i < n_train; ++i) in_train[idx[i]] = true;
    Dataset train, test;
    train.messages.reserve(n_train);
    test.messages.reserve(d.size() - n_train);
    for (std::size_t i = 0; i < d.size(); ++i)
        (in_train[i] ? train : test).messages.push_back(d.messages[i]);
    return {std::move(train), std::move(test)};
}

// Per conversation: first floor(fraction * len) messages to train, rest to
// test. fraction must lie in (0, 1).
inline std::pair<Dataset, Dataset> split_chronological(const Dataset& d, double fraction) {
    if (!(fraction > 0.0 && fraction < 1.0)) {
        std::ostringstream os;
        os << "train fraction must be in (0, 1), got " << fraction;
        fail(Errc::bad_fraction, os.str());
    }
    Dataset train, test;
    for (auto [b, e] : d.conversations()) {
        const std::size_t len = e - b;
        const auto cut = static_cast<std::size_t>(static_cast<double>(len) * fraction);
        for (std::size_t i = b; i < e; ++i)
            ((i - b) < cut ? train : test).messages.push_back(d.messages[i]);
    }
    return {std::move(train), std::move(test)};
}

} // namespace chatdrift

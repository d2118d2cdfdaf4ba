#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "chatdrift/corpus.hpp"
#include "chatdrift/errors.hpp"
#include "chatdrift/rng.hpp"

namespace chatdrift {

// One label cell of the synthetic mixture: a (relevance, category, type)
// combination with its target share of the corpus and the keyword pool its
// texts draw from. Gibberish cells generate junk tokens instead (repeated
// characters, over-long words) and ignore the keyword pool.
struct CellSpec {
    Relevance rel = Relevance::no;
    Category cat = Category::chatting;
    MsgType type = MsgType::statement;
    UserRole role = UserRole::student;
    double proportion = 0.0;
    std::vector<std::string> keywords;
    bool gibberish = false;
};

struct SynthSpec {
    std::vector<CellSpec> cells;
    std::vector<std::string> filler; // shared function words mixed into every non-gibberish cell
    int n_books = 3;
    int min_tokens = 2;
    int max_tokens = 5;
};

namespace synth_detail {

inline std::string letters(std::mt19937_64& g, int len) {
    std::string s;
    s.reserve(static_cast<std::size_t>(len));
    for (int i = 0; i < len; ++i) s.push_back(static_cast<char>('a' + bounded(g, 26)));
    return s;
}

// e.g. "aaaaak": a >=3 run plus a random tail letter.
inline std::string junk_repeat(std::mt19937_64& g) {
    const char c = static_cast<char>('a' + bounded(g, 26));
    std::string s(3 + bounded(g, 6), c);
    s.push_back(static_cast<char>('a' + bounded(g, 26)));
    return s;
}

// Over-long token, strictly more than 12 characters.
inline std::string junk_long(std::mt19937_64& g) { return letters(g, 13 + static_cast<int>(bounded(g, 6))); }

inline std::string junk_short(std::mt19937_64& g) { return letters(g, 4 + static_cast<int>(bounded(g, 4))); }

inline std::string cell_text(const CellSpec& cell, const SynthSpec& spec, std::mt19937_64& g) {
    std::string text;
    if (cell.gibberish) {
        const int k = 1 + static_cast<int>(bounded(g, 3));
        text = junk_repeat(g);
        if (k >= 2) text += " " + junk_long(g);
        if (k >= 3) text += " " + junk_short(g);
    } else {
        const int k = spec.min_tokens + static_cast<int>(bounded(g, static_cast<std::uint64_t>(spec.max_tokens - spec.min_tokens + 1)));
        for (int i = 0; i < k; ++i) {
            const bool use_filler = !spec.filler.empty() && bounded(g, 10) < 3;
            const auto& pool = use_filler ? spec.filler : cell.keywords;
            if (i) text.push_back(' ');
            text += pool[bounded(g, pool.size())];
        }
    }
    if (cell.type == MsgType::question) text.push_back('?');
    return text;
}

inline void validate(const SynthSpec& spec, int n) {
    if (n < 1) fail(Errc::bad_spec, "synthetic corpus size must be >= 1");
    if (spec.cells.empty()) fail(Errc::bad_spec, "synthetic spec has no cells");
    if (spec.n_books < 1) fail(Errc::bad_spec, "synthetic spec needs at least one book");
    if (spec.min_tokens < 1 || spec.max_tokens < spec.min_tokens)
        fail(Errc::bad_spec, "synthetic spec token bounds are invalid");
    double sum = 0.0;
    for (const auto& c : spec.cells) {
        if (c.proportion < 0.0) fail(Errc::bad_spec, "cell proportions must be non-negative");
        if (!c.gibberish && c.keywords.empty()) fail(Errc::bad_spec, "non-gibberish cells need a keyword pool");
        sum += c.proportion;
    }
    if (std::abs(sum - 1.0) > 1e-9) fail(Errc::bad_spec, "cell proportions must sum to 1");
}

// Largest-remainder quota: deterministic counts, off by at most one per cell.
inline std::vector<int> quota_counts(const SynthSpec& spec, int n) {
    std::vector<int> counts(spec.cells.size(), 0);
    std::vector<std::pair<double, std::size_t>> frac;
    int assigned = 0;
    for (std::size_t i = 0; i < spec.cells.size(); ++i) {
        const double want = spec.cells[i].proportion * n;
        counts[i] = static_cast<int>(std::floor(want));
        assigned += counts[i];
        frac.emplace_back(want - std::floor(want), i);
    }
    std::stable_sort(frac.begin(), frac.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (int r = 0; r < n - assigned; ++r) ++counts[frac[static_cast<std::size_t>(r) % frac.size()].second];
    return counts;
}

inline std::string padded_id(const char* prefix, std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s%06zu", prefix, i);
    return buf;
}

} // namespace synth_detail

// Deterministic mixture corpus: quota-allocated cell counts, seeded order and
// texts, messages dealt round-robin over n_books conversations.
inline Dataset generate_synthetic(const SynthSpec& spec, int n, std::uint64_t seed) {
    synth_detail::validate(spec, n);
    Dataset d;
    const auto counts = synth_detail::quota_counts(spec, n);
    std::vector<std::uint32_t> cell_of;
    cell_of.reserve(static_cast<std::size_t>(n));
    for (std::size_t c = 0; c < counts.size(); ++c)
        cell_of.insert(cell_of.end(), static_cast<std::size_t>(counts[c]), static_cast<std::uint32_t>(c));
    std::mt19937_64 g(seed);
    shuffle(cell_of, g);
    d.messages.reserve(static_cast<std::size_t>(n));
    const auto books = static_cast<std::size_t>(spec.n_books);
    for (std::size_t i = 0; i < cell_of.size(); ++i) {
        const CellSpec& cell = spec.cells[cell_of[i]];
        Message m;
        m.message_id = synth_detail::padded_id("m", i);
        m.book_id = "book" + std::to_string(i % books + 1);
        m.seq = static_cast<std::int64_t>(i / books);
        m.user_role = cell.role;
        m.text = synth_detail::cell_text(cell, spec, g);
        m.relevance = cell.rel;
        m.type = cell.type;
        m.category = cell.cat;
        d.messages.push_back(std::move(m));
    }
    d.canonicalize();
    return d;
}

// Mixture that mirrors the observed class balance of the transcript corpus
// this toolkit was built around: 61.9% non-relevant overall, discussion
// dominated by 'lahko'/'bi', identity probes around 'kdo'/'jaz'/'ime', and a
// gibberish-only O cell.
inline SynthSpec default_synth_spec() {
    SynthSpec s;
    s.filler = {"je", "to", "se", "in", "pa", "da", "na", "mi", "smo", "bo"};
    s.cells = {
        {Relevance::yes, Category::discussion, MsgType::statement, UserRole::student, 0.180,
         {"zgodba", "knjiga", "pika", "nogavička", "junak", "konec", "všeč", "zanimivo", "lahko", "bi", "preberemo",
          "poglavje"},
         false},
        {Relevance::yes, Category::discussion, MsgType::question, UserRole::student, 0.100,
         {"ali", "kaj", "zakaj", "kako", "lahko", "bi", "zgodba", "knjiga", "junak", "konec"}, false},
        {Relevance::yes, Category::discussion, MsgType::answer, UserRole::student, 0.101,
         {"ja", "res", "mislim", "zgodba", "junak", "konec", "prav", "lahko", "zato"}, false},
        {Relevance::no, Category::chatting, MsgType::statement, UserRole::student, 0.300,
         {"haha", "lol", "dogaja", "jutri", "šola", "igra", "telefon", "gledam", "film", "glasba", "komad", "fajn"},
         false},
        {Relevance::no, Category::chatting, MsgType::question, UserRole::student, 0.050,
         {"kam", "kdaj", "greš", "jutri", "gremo", "igraš"}, false},
        {Relevance::no, Category::identity, MsgType::question, UserRole::student, 0.050,
         {"kdo", "jaz", "ime", "si", "ti", "kateri"}, false},
        {Relevance::no, Category::identity, MsgType::statement, UserRole::student, 0.030,
         {"jaz", "sem", "ime", "moje", "stara", "let"}, false},
        {Relevance::no, Category::other, MsgType::statement, UserRole::student, 0.080, {}, true},
        {Relevance::no, Category::switching, MsgType::statement, UserRole::student, 0.040,
         {"pomoč", "pomagaj", "učiteljica", "razumem", "naprej", "nehaj", "čakaj"}, false},
        {Relevance::no, Category::moderating, MsgType::statement, UserRole::teacher, 0.069,
         {"prosim", "osredotočite", "nazaj", "vrnite", "pogovor", "tema", "pozor", "mirno"}, false},
    };
    return s;
}

// Single-conversation stream with a planted non-relevant span, for drift
// experiments: a training head with interventions and gaps, a
// relevant-dominated stream, and a contiguous span of pure chat/gibberish.
struct DriftScenarioSpec {
    int n = 1000;
    double train_fraction = 0.7; // the chronological split the pipeline will use
    int pre_span = 90;           // stream messages before the planted span
    int span = 84;               // planted span length; 0 = control stream, no drift
    std::string book_id = "book1";
};

struct DriftScenario {
    Dataset data;
    // Seq range of the planted span; -1/-1 when the scenario plants none.
    std::int64_t span_first_seq = -1;
    std::int64_t span_last_seq = -1;
};

inline DriftScenario generate_drift_scenario(const DriftScenarioSpec& sp, std::uint64_t seed) {
    if (!(sp.train_fraction > 0.0 && sp.train_fraction < 1.0))
        fail(Errc::bad_fraction, "drift scenario train fraction must be in (0, 1)");
    if (sp.n < 10) fail(Errc::bad_spec, "drift scenario needs at least 10 messages");
    if (sp.pre_span < 0 || sp.span < 0) fail(Errc::bad_spec, "drift scenario spans must be >= 0");
    const int head = static_cast<int>(static_cast<double>(sp.n) * sp.train_fraction);
    const int stream = sp.n - head;
    if (sp.pre_span + sp.span > stream)
        fail(Errc::bad_spec, "drift scenario span does not fit into the stream part");

    const SynthSpec mix = default_synth_spec();
    // Cell indices into default_synth_spec(): see its initializer order.
    constexpr std::size_t yes_s = 0, yes_q = 1, yes_a = 2, chat_s = 3, chat_q = 4, ident_q = 5, ident_s = 6,
                          gib = 7, switch_s = 8, mod = 9;

    std::mt19937_64 g(seed);
    Dataset d;
    d.messages.reserve(static_cast<std::size_t>(sp.n));
    auto push = [&](std::size_t cell_ix) {
        const CellSpec& cell = mix.cells[cell_ix];
        Message m;
        m.message_id = synth_detail::padded_id("d", d.messages.size());
        m.book_id = sp.book_id;
        m.seq = static_cast<std::int64_t>(d.messages.size());
        m.user_role = cell.role;
        m.text = synth_detail::cell_text(cell, mix, g);
        m.relevance = cell.rel;
        m.type = cell.type;
        m.category = cell.cat;
        d.messages.push_back(std::move(m));
    };

    // Head: relevant runs, non-relevant gaps, and a teacher intervention after
    // the longer gaps -- gives the run statistics something real to measure.
    const std::size_t yes_cells[] = {yes_s, yes_s, yes_q, yes_a};
    const std::size_t no_cells[] = {chat_s, ident_q, gib, switch_s, chat_q, ident_s};
    std::size_t no_rotor = 0;
    while (static_cast<int>(d.messages.size()) < head) {
        const int rel_run = 2 + static_cast<int>(bounded(g, 4));
        for (int i = 0; i < rel_run && static_cast<int>(d.messages.size()) < head; ++i)
            push(yes_cells[bounded(g, 4)]);
        const int gap_run = 1 + static_cast<int>(bounded(g, 6));
        for (int i = 0; i < gap_run && static_cast<int>(d.messages.size()) < head; ++i)
            push(no_cells[no_rotor++ % 6]);
        if (gap_run >= 3 && static_cast<int>(d.messages.size()) < head) push(mod);
    }

    // Stream: relevant-dominated except for the planted span.
    const std::size_t rotate_rel[] = {yes_s, yes_q, yes_a};
    for (int p = 0; p < stream; ++p) {
        const bool in_span = sp.span > 0 && p >= sp.pre_span && p < sp.pre_span + sp.span;
        if (in_span) {
            push(gib); // drift: the class dissolves into junk typing
        } else if (p % 6 == 2) {
            push(chat_s);
        } else {
            push(rotate_rel[static_cast<std::size_t>(p) % 3]);
        }
    }

    DriftScenario out;
    out.data = std::move(d);
    if (sp.span > 0) {
        out.span_first_seq = head + sp.pre_span;
        out.span_last_seq = head + sp.pre_span + sp.span - 1;
    }
    return out;
}

} // namespace chatdrift

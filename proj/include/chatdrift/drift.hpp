#pragma once

#include <cmath>
#include <cstdint>
#include <deque>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "chatdrift/corpus.hpp"
#include "chatdrift/errors.hpp"
#include "chatdrift/eval.hpp"
#include "chatdrift/models.hpp"

namespace chatdrift {

// What counts as a moderator intervention when measuring run statistics.
enum class InterventionMark { category_m, teacher_role };

inline std::string_view to_string(InterventionMark m) {
    return m == InterventionMark::category_m ? "category-m" : "teacher-role";
}
inline bool parse_intervention_mark(std::string_view s, InterventionMark& out) {
    const std::string v = detail::lower_ascii(s);
    if (v == "category-m" || v == "m") out = InterventionMark::category_m;
    else if (v == "teacher-role" || v == "teacher") out = InterventionMark::teacher_role;
    else return false;
    return true;
}

// Averages over run lengths in the training transcript. A statistic with no
// observations (no interventions, or no relevant messages) is absent rather
// than zero.
struct RunStats {
    std::optional<double> avg_pre_intervention;
    std::optional<double> avg_gap_raw;
    std::optional<double> avg_gap_corrected;
};

namespace drift_detail {

struct RunLists {
    std::vector<std::int64_t> pre;           // non-relevant run before each intervention
    std::vector<std::int64_t> gaps_raw;      // gap per adjacent relevant pair, zeros included
    std::vector<std::int64_t> gaps_corrected; // gaps between relevant units, zeros dropped
};

// Collects the run lists of one conversation (messages in seq order).
template <typename It>
void collect_runs(It begin, It end, InterventionMark mark, RunLists& out) {
    std::vector<bool> rel;
    std::vector<bool> intervention;
    for (It it = begin; it != end; ++it) {
        rel.push_back(it->relevance == Relevance::yes);
        intervention.push_back(mark == InterventionMark::category_m ? it->category == Category::moderating
                                                                    : it->user_role == UserRole::teacher);
    }
    const std::size_t n = rel.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (!intervention[i]) continue;
        std::int64_t run = 0;
        for (std::size_t j = i; j-- > 0 && !rel[j];) ++run;
        if (run >= 1) out.pre.push_back(run);
    }
    // Raw gaps: number of non-relevant messages between adjacent relevant
    // messages, zero when they touch.
    std::ptrdiff_t prev = -1;
    for (std::size_t i = 0; i < n; ++i) {
        if (!rel[i]) continue;
        if (prev >= 0) out.gaps_raw.push_back(static_cast<std::int64_t>(i) - prev - 1);
        prev = static_cast<std::ptrdiff_t>(i);
    }
    // Corrected gaps: runs of more than 3 consecutive relevant messages
    // collapse into one "relevant conversation" unit, then zero-length gaps
    // are dropped. Units are (start, end) index pairs.
    std::vector<std::pair<std::size_t, std::size_t>> units;
    std::size_t i = 0;
    while (i < n) {
        if (!rel[i]) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < n && rel[j]) ++j;
        const std::size_t len = j - i;
        if (len > 3) {
            units.emplace_back(i, j - 1);
        } else {
            for (std::size_t p = i; p < j; ++p) units.emplace_back(p, p);
        }
        i = j;
    }
    for (std::size_t u = 1; u < units.size(); ++u) {
        const auto gap = static_cast<std::int64_t>(units[u].first - units[u - 1].second) - 1;
        if (gap > 0) out.gaps_corrected.push_back(gap);
    }
}

inline std::optional<double> mean_of(const std::vector<std::int64_t>& v) {
    if (v.empty()) return std::nullopt;
    double s = 0.0;
    for (auto x : v) s += static_cast<double>(x);
    return s / static_cast<double>(v.size());
}

} // namespace drift_detail

// Pooled over every conversation in the dataset.
inline RunStats run_stats(const Dataset& d, InterventionMark mark = InterventionMark::category_m) {
    drift_detail::RunLists lists;
    for (auto [b, e] : d.conversations())
        drift_detail::collect_runs(d.messages.begin() + static_cast<std::ptrdiff_t>(b),
                                   d.messages.begin() + static_cast<std::ptrdiff_t>(e), mark, lists);
    RunStats s;
    s.avg_pre_intervention = drift_detail::mean_of(lists.pre);
    s.avg_gap_raw = drift_detail::mean_of(lists.gaps_raw);
    s.avg_gap_corrected = drift_detail::mean_of(lists.gaps_corrected);
    return s;
}

// Detector knobs. Defaults are the pinned operating point; derive_params
// computes the corresponding values from run statistics instead.
struct DriftParams {
    int batch_size = 6;          // B: messages per batch
    int window = 7;              // K: consecutive non-relevant batches to alarm
    int relevant_per_batch = 1;  // threshold making a batch relevant
    std::set<Category> soft_categories = {Category::discussion, Category::moderating};
    double inflation = 1.5;
};

inline double round_half_up(double x) { return std::floor(x + 0.5); }

// batch_size from the pre-intervention average, window from the corrected
// gap average, both inflated and rounded half-up.
inline DriftParams derive_params(const RunStats& s, double inflation = 1.5) {
    if (!s.avg_pre_intervention) fail(Errc::missing_stats, "cannot derive batch size: no intervention runs");
    if (!s.avg_gap_corrected) fail(Errc::missing_stats, "cannot derive window: no corrected gap runs");
    DriftParams p;
    p.inflation = inflation;
    p.batch_size = static_cast<int>(round_half_up(*s.avg_pre_intervention * inflation));
    p.window = static_cast<int>(round_half_up(*s.avg_gap_corrected * inflation));
    if (p.batch_size < 1 || p.window < 1) fail(Errc::bad_spec, "derived drift parameters must be >= 1");
    return p;
}

// A message keeps a batch alive if it is predicted relevant, or if its
// predicted category is one of the soft ones (discussion, moderating).
inline bool effective_relevant(Relevance rel, Category cat, const DriftParams& p) {
    return rel == Relevance::yes || p.soft_categories.count(cat) > 0;
}

struct Alert {
    std::string conversation;
    std::int64_t batch_index = 0; // 0-based index of the batch that fired
    std::int64_t first_seq = 0;   // first message of the K-batch window
    std::int64_t last_seq = 0;    // last message of the window
    int window_batches = 0;
    int batch_size = 0;
};

// Per-conversation detector state: fixed-size batches, a consecutive
// non-relevant counter, alarm + reset at K. A trailing partial batch never
// fires.
class DriftState {
public:
    DriftState(std::string conversation, DriftParams params)
        : conv_(std::move(conversation)), p_(std::move(params)) {
        if (p_.batch_size < 1 || p_.window < 1 || p_.relevant_per_batch < 1)
            fail(Errc::bad_spec, "drift parameters must be >= 1");
    }

    const DriftParams& params() const { return p_; }
    int consecutive_nonrelevant() const { return counter_; }
    std::int64_t batches_completed() const { return next_batch_; }
    int buffered() const { return buf_count_; }

    std::optional<Alert> feed(std::int64_t seq, bool effective) {
        if (buf_count_ == 0) buf_first_ = seq;
        ++buf_count_;
        if (effective) ++buf_relevant_;
        if (buf_count_ < p_.batch_size) return std::nullopt;

        // batch complete
        spans_.emplace_back(buf_first_, seq);
        if (spans_.size() > static_cast<std::size_t>(p_.window)) spans_.pop_front();
        const bool relevant = buf_relevant_ >= p_.relevant_per_batch;
        const std::int64_t index = next_batch_++;
        buf_count_ = 0;
        buf_relevant_ = 0;
        counter_ = relevant ? 0 : counter_ + 1;
        if (counter_ < p_.window) return std::nullopt;

        Alert a;
        a.conversation = conv_;
        a.batch_index = index;
        a.first_seq = spans_.front().first;
        a.last_seq = seq;
        a.window_batches = p_.window;
        a.batch_size = p_.batch_size;
        counter_ = 0;
        return a;
    }

private:
    std::string conv_;
    DriftParams p_;
    int buf_count_ = 0;
    int buf_relevant_ = 0;
    std::int64_t buf_first_ = 0;
    std::int64_t next_batch_ = 0;
    int counter_ = 0;
    std::deque<std::pair<std::int64_t, std::int64_t>> spans_; // last K batch spans
};

struct PredictionRecord {
    std::string message_id;
    std::string conversation;
    std::int64_t seq = 0;
    std::string relevance;
    std::string category;
    bool effective_relevant = false;
};

struct DriftRunConfig {
    PipelineConfig relevance_pipe; // SVM relevance model
    PipelineConfig category_pipe;  // LR category model
    DriftParams params;            // detection parameters (pinned defaults)
    bool derive_from_train = false; // replace B/K with values derived from train stats
    double inflation = 1.5;
    InterventionMark mark = InterventionMark::category_m;
    int cv_folds = 5;
    std::uint64_t cv_seed = 0;
};

struct DriftRunResult {
    RunStats train_stats;
    std::optional<DriftParams> derived_params; // absent when stats are missing
    DriftParams params;                        // what detection actually used
    CvResult cv_relevance;
    CvResult cv_category;
    LinearModel relevance_model;
    LinearModel category_model;
    std::vector<PredictionRecord> predictions;
    std::vector<Alert> alerts;
};

// Trains an SVM relevance model and an LR category model on `train` (with
// k-fold CV metrics), then streams `stream` through per-conversation drift
// detectors over the predicted labels.
inline DriftRunResult run_pipeline(const Dataset& train, const Dataset& stream, const DriftRunConfig& cfg) {
    DriftRunResult out;
    out.train_stats = run_stats(train, cfg.mark);
    try {
        out.derived_params = derive_params(out.train_stats, cfg.inflation);
        out.derived_params->soft_categories = cfg.params.soft_categories;
        out.derived_params->relevant_per_batch = cfg.params.relevant_per_batch;
    } catch (const Error& e) {
        if (e.code() != Errc::missing_stats) throw;
    }
    if (cfg.derive_from_train) {
        if (!out.derived_params) fail(Errc::missing_stats, "cannot derive drift parameters from this training set");
        out.params = *out.derived_params;
    } else {
        out.params = cfg.params;
    }

    out.cv_relevance = cross_validate(train, Task::relevance, ModelKind::svm, cfg.relevance_pipe, cfg.cv_folds, cfg.cv_seed);
    out.cv_category = cross_validate(train, Task::category, ModelKind::lr, cfg.category_pipe, cfg.cv_folds, cfg.cv_seed);
    out.relevance_model = train_pipeline(train, Task::relevance, ModelKind::svm, cfg.relevance_pipe);
    out.category_model = train_pipeline(train, Task::category, ModelKind::lr, cfg.category_pipe);

    for (auto [b, e] : stream.conversations()) {
        DriftState state(stream.messages[b].book_id, out.params);
        for (std::size_t i = b; i < e; ++i) {
            const Message& msg = stream.messages[i];
            const auto x_rel = assemble_message(msg, out.relevance_model.assembly, cfg.relevance_pipe.prep);
            const auto x_cat = assemble_message(msg, out.category_model.assembly, cfg.category_pipe.prep);
            PredictionRecord rec;
            rec.message_id = msg.message_id;
            rec.conversation = msg.book_id;
            rec.seq = msg.seq;
            rec.relevance = predict(out.relevance_model, x_rel);
            rec.category = predict(out.category_model, x_cat);
            Relevance rel{};
            Category cat{};
            parse_relevance(rec.relevance, rel);
            parse_category(rec.category, cat);
            rec.effective_relevant = effective_relevant(rel, cat, out.params);
            if (auto alert = state.feed(msg.seq, rec.effective_relevant)) out.alerts.push_back(*alert);
            out.predictions.push_back(std::move(rec));
        }
    }
    return out;
}

} // namespace chatdrift

#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "chatdrift/errors.hpp"
#include "chatdrift/models.hpp"
#include "chatdrift/rng.hpp"

namespace chatdrift {

// Rows are true classes, columns predicted, both in `classes` order.
struct ConfusionMatrix {
    std::vector<std::string> classes;
    std::vector<std::vector<std::int64_t>> counts;

    std::int64_t total() const {
        std::int64_t t = 0;
        for (const auto& row : counts)
            for (auto v : row) t += v;
        return t;
    }
};

inline ConfusionMatrix confusion(const std::vector<std::string>& y_true, const std::vector<std::string>& y_pred,
                                 std::vector<std::string> classes) {
    if (y_true.size() != y_pred.size()) fail(Errc::length_mismatch, "true/predicted label counts differ");
    std::map<std::string, std::size_t> ix;
    for (std::size_t c = 0; c < classes.size(); ++c) ix.emplace(classes[c], c);
    ConfusionMatrix cm;
    cm.classes = std::move(classes);
    cm.counts.assign(cm.classes.size(), std::vector<std::int64_t>(cm.classes.size(), 0));
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        const auto t = ix.find(y_true[i]);
        if (t == ix.end()) fail(Errc::unknown_label, "label not in class list: " + y_true[i]);
        const auto p = ix.find(y_pred[i]);
        if (p == ix.end()) fail(Errc::unknown_label, "label not in class list: " + y_pred[i]);
        ++cm.counts[t->second][p->second];
    }
    return cm;
}

// Row-stochastic view; all-zero rows stay all-zero.
inline std::vector<std::vector<double>> normalize_rows(const ConfusionMatrix& cm) {
    std::vector<std::vector<double>> out(cm.counts.size(), std::vector<double>(cm.counts.size(), 0.0));
    for (std::size_t r = 0; r < cm.counts.size(); ++r) {
        std::int64_t sum = 0;
        for (auto v : cm.counts[r]) sum += v;
        if (sum == 0) continue;
        for (std::size_t c = 0; c < cm.counts[r].size(); ++c)
            out[r][c] = static_cast<double>(cm.counts[r][c]) / static_cast<double>(sum);
    }
    return out;
}

struct MetricReport {
    std::vector<std::string> classes;
    std::vector<std::int64_t> support; // true count per class
    std::vector<double> precision, recall, f1;
    double accuracy = 0.0;
    double weighted_precision = 0.0, weighted_recall = 0.0, weighted_f1 = 0.0;
};

// Per-class precision/recall/F1 with the usual zero conventions (0/0 = 0),
// weighted averages by true support, accuracy = trace / total.
inline MetricReport metrics(const ConfusionMatrix& cm) {
    const std::int64_t total = cm.total();
    if (total == 0) fail(Errc::empty_matrix, "confusion matrix has no observations");
    const std::size_t k = cm.classes.size();
    MetricReport r;
    r.classes = cm.classes;
    r.support.resize(k);
    r.precision.resize(k);
    r.recall.resize(k);
    r.f1.resize(k);
    std::int64_t trace = 0;
    for (std::size_t c = 0; c < k; ++c) {
        std::int64_t row = 0, col = 0;
        for (std::size_t j = 0; j < k; ++j) {
            row += cm.counts[c][j];
            col += cm.counts[j][c];
        }
        const std::int64_t tp = cm.counts[c][c];
        trace += tp;
        r.support[c] = row;
        r.precision[c] = col == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(col);
        r.recall[c] = row == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(row);
        const double pr = r.precision[c] + r.recall[c];
        r.f1[c] = pr == 0.0 ? 0.0 : 2.0 * r.precision[c] * r.recall[c] / pr;
        r.weighted_precision += static_cast<double>(row) * r.precision[c];
        r.weighted_recall += static_cast<double>(row) * r.recall[c];
        r.weighted_f1 += static_cast<double>(row) * r.f1[c];
    }
    r.accuracy = static_cast<double>(trace) / static_cast<double>(total);
    r.weighted_precision /= static_cast<double>(total);
    r.weighted_recall /= static_cast<double>(total);
    r.weighted_f1 /= static_cast<double>(total);
    return r;
}

struct RocPoint {
    double fpr = 0.0, tpr = 0.0;
    double threshold = 0.0; // predict positive iff score >= threshold
};

struct RocCurve {
    std::vector<RocPoint> points; // starts at (0,0), ends at (1,1)
    double auc = 0.0;
};

// Threshold sweep over the distinct scores (descending), trapezoid AUC.
// Tied scores move as a block, which makes the AUC equal the rank statistic
// with ties counted half. Both classes must be present.
inline RocCurve roc_auc(const std::vector<int>& y_true, const std::vector<double>& scores) {
    if (y_true.size() != scores.size()) fail(Errc::length_mismatch, "label/score counts differ");
    std::int64_t pos = 0, neg = 0;
    for (int y : y_true) (y != 0 ? pos : neg) += 1;
    if (pos == 0 || neg == 0) fail(Errc::single_class, "roc needs both classes present");

    std::vector<std::size_t> order(scores.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    RocCurve curve;
    curve.points.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
    std::int64_t tp = 0, fp = 0;
    double area = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        const double s = scores[order[i]];
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == s) {
            (y_true[order[j]] != 0 ? tp : fp) += 1;
            ++j;
        }
        const auto& prev = curve.points.back();
        const double fpr = static_cast<double>(fp) / static_cast<double>(neg);
        const double tpr = static_cast<double>(tp) / static_cast<double>(pos);
        area += (fpr - prev.fpr) * (tpr + prev.tpr) * 0.5;
        curve.points.push_back({fpr, tpr, s});
        i = j;
    }
    curve.auc = area;
    return curve;
}

// Majority-vote baseline: most frequent train label (ties to the
// lexicographically first), scored as accuracy on the test labels.
inline double majority_baseline(const std::vector<std::string>& y_train, const std::vector<std::string>& y_test) {
    if (y_train.empty()) fail(Errc::empty_training, "baseline needs a non-empty training label set");
    if (y_test.empty()) fail(Errc::empty_matrix, "baseline needs a non-empty test label set");
    std::map<std::string, std::int64_t> counts;
    for (const auto& l : y_train) ++counts[l];
    const std::string* best = nullptr;
    std::int64_t best_n = -1;
    for (const auto& [label, n] : counts) {
        if (n > best_n) { // map order = class order, so ties keep the first
            best = &label;
            best_n = n;
        }
    }
    std::int64_t hit = 0;
    for (const auto& l : y_test)
        if (l == *best) ++hit;
    return static_cast<double>(hit) / static_cast<double>(y_test.size());
}

struct CvResult {
    double mean_accuracy = 0.0;
    double mean_weighted_f1 = 0.0;
    int folds = 0;
};

// Stratified k-fold: per-label index pools are shuffled with the seed and
// dealt round-robin, so same seed => same folds. The feature assembly is
// refit inside every fold on that fold's training messages only.
inline CvResult cross_validate(const Dataset& d, Task task, ModelKind kind, const PipelineConfig& cfg, int k,
                               std::uint64_t seed) {
    if (k < 2) fail(Errc::bad_spec, "cross-validation needs k >= 2");
    const auto y = labels_of(d, task);
    std::map<std::string, std::vector<std::size_t>> pools;
    for (std::size_t i = 0; i < y.size(); ++i) pools[y[i]].push_back(i);
    for (const auto& [label, pool] : pools) {
        if (pool.size() < static_cast<std::size_t>(k))
            fail(Errc::too_few_examples,
                 "class " + label + " has " + std::to_string(pool.size()) + " examples, fewer than k = " + std::to_string(k));
    }
    std::mt19937_64 g(seed);
    std::vector<std::vector<std::size_t>> folds(static_cast<std::size_t>(k));
    for (auto& [label, pool] : pools) {
        shuffle(pool, g);
        for (std::size_t i = 0; i < pool.size(); ++i) folds[i % static_cast<std::size_t>(k)].push_back(pool[i]);
    }
    CvResult res;
    res.folds = k;
    for (std::size_t f = 0; f < folds.size(); ++f) {
        std::vector<bool> held(d.size(), false);
        for (auto i : folds[f]) held[i] = true;
        Dataset train, test;
        for (std::size_t i = 0; i < d.size(); ++i)
            (held[i] ? test : train).messages.push_back(d.messages[i]);
        LinearModel m = train_pipeline(train, task, kind, cfg);
        const auto pred = predict_dataset(m, test, cfg.prep);
        std::set<std::string> cls(y.begin(), y.end());
        const auto cm = confusion(labels_of(test, task), pred, {cls.begin(), cls.end()});
        const auto rep = metrics(cm);
        res.mean_accuracy += rep.accuracy;
        res.mean_weighted_f1 += rep.weighted_f1;
    }
    res.mean_accuracy /= static_cast<double>(k);
    res.mean_weighted_f1 /= static_cast<double>(k);
    return res;
}

} // namespace chatdrift

#pragma once

#include <cstdio>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "chatdrift/corpus.hpp"
#include "chatdrift/drift.hpp"
#include "chatdrift/eval.hpp"

namespace chatdrift {

namespace report_detail {

inline std::string num(double v, const char* fmt = "%.6f") {
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, v);
    return buf;
}

inline std::string pad(std::string s, std::size_t width) {
    while (s.size() < width) s.push_back(' ');
    return s;
}

} // namespace report_detail

// Aligned per-class table plus the weighted row and accuracy.
inline std::string metrics_text(const MetricReport& r) {
    using report_detail::num;
    using report_detail::pad;
    std::size_t w = 10; // at least "weighted" plus two spaces
    for (const auto& c : r.classes) w = std::max(w, c.size() + 2);
    std::string out;
    out += pad("class", w) + pad("support", 9) + pad("precision", 11) + pad("recall", 11) + "f1\n";
    for (std::size_t c = 0; c < r.classes.size(); ++c) {
        out += pad(r.classes[c], w) + pad(std::to_string(r.support[c]), 9) + pad(num(r.precision[c]), 11) +
               pad(num(r.recall[c]), 11) + num(r.f1[c]) + "\n";
    }
    std::int64_t total = 0;
    for (auto s : r.support) total += s;
    out += pad("weighted", w) + pad(std::to_string(total), 9) + pad(num(r.weighted_precision), 11) +
           pad(num(r.weighted_recall), 11) + num(r.weighted_f1) + "\n";
    out += pad("accuracy", w) + pad("", 9) + pad("", 11) + pad("", 11) + num(r.accuracy) + "\n";
    return out;
}

// metric,class,value rows; corpus-level metrics leave the class column empty.
inline std::string metrics_csv(const MetricReport& r) {
    using report_detail::num;
    std::string out = "metric,class,value\n";
    out += "accuracy,," + num(r.accuracy) + "\n";
    for (std::size_t c = 0; c < r.classes.size(); ++c) {
        out += "precision," + r.classes[c] + "," + num(r.precision[c]) + "\n";
        out += "recall," + r.classes[c] + "," + num(r.recall[c]) + "\n";
        out += "f1," + r.classes[c] + "," + num(r.f1[c]) + "\n";
        out += "support," + r.classes[c] + "," + std::to_string(r.support[c]) + "\n";
    }
    out += "weighted_precision,," + num(r.weighted_precision) + "\n";
    out += "weighted_recall,," + num(r.weighted_recall) + "\n";
    out += "weighted_f1,," + num(r.weighted_f1) + "\n";
    return out;
}

inline std::string confusion_csv(const ConfusionMatrix& cm) {
    std::string out = "true\\pred";
    for (const auto& c : cm.classes) out += "," + c;
    out += "\n";
    for (std::size_t r = 0; r < cm.classes.size(); ++r) {
        out += cm.classes[r];
        for (std::size_t c = 0; c < cm.classes.size(); ++c) out += "," + std::to_string(cm.counts[r][c]);
        out += "\n";
    }
    return out;
}

inline std::string confusion_normalized_csv(const ConfusionMatrix& cm) {
    const auto rows = normalize_rows(cm);
    std::string out = "true\\pred";
    for (const auto& c : cm.classes) out += "," + c;
    out += "\n";
    for (std::size_t r = 0; r < cm.classes.size(); ++r) {
        out += cm.classes[r];
        for (std::size_t c = 0; c < cm.classes.size(); ++c) out += "," + report_detail::num(rows[r][c]);
        out += "\n";
    }
    return out;
}

inline std::string roc_csv(const RocCurve& curve) {
    std::string out = "fpr,tpr,threshold\n";
    for (const auto& p : curve.points) {
        out += report_detail::num(p.fpr) + "," + report_detail::num(p.tpr) + "," +
               report_detail::num(p.threshold, "%.9g") + "\n";
    }
    return out;
}

// Minimal self-contained SVG: unit square, dashed chance diagonal, the curve
// as one polyline, AUC label.
inline std::string roc_svg(const RocCurve& curve) {
    using report_detail::num;
    const double size = 360.0, margin = 30.0;
    auto X = [&](double fpr) { return margin + fpr * size; };
    auto Y = [&](double tpr) { return margin + (1.0 - tpr) * size; };
    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"420\" height=\"420\" viewBox=\"0 0 420 420\">\n";
    svg += "  <rect x=\"" + num(margin, "%.0f") + "\" y=\"" + num(margin, "%.0f") + "\" width=\"" + num(size, "%.0f") +
           "\" height=\"" + num(size, "%.0f") + "\" fill=\"none\" stroke=\"#888\"/>\n";
    svg += "  <line x1=\"" + num(X(0), "%.1f") + "\" y1=\"" + num(Y(0), "%.1f") + "\" x2=\"" + num(X(1), "%.1f") +
           "\" y2=\"" + num(Y(1), "%.1f") + "\" stroke=\"#bbb\" stroke-dasharray=\"6,4\"/>\n";
    svg += "  <polyline fill=\"none\" stroke=\"#1f6fb2\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < curve.points.size(); ++i) {
        if (i) svg += " ";
        svg += num(X(curve.points[i].fpr), "%.2f") + "," + num(Y(curve.points[i].tpr), "%.2f");
    }
    svg += "\"/>\n";
    svg += "  <text x=\"" + num(margin + 10, "%.0f") + "\" y=\"" + num(margin + size - 12, "%.0f") +
           "\" font-family=\"sans-serif\" font-size=\"14\">AUC = " + num(curve.auc, "%.4f") + "</text>\n";
    svg += "</svg>\n";
    return svg;
}

inline std::string class_distribution_csv(const Dataset& train, const Dataset& test, Task task) {
    std::map<std::string, std::pair<std::int64_t, std::int64_t>> counts;
    for (const auto& m : train.messages) ++counts[label_of(m, task)].first;
    for (const auto& m : test.messages) ++counts[label_of(m, task)].second;
    std::string out = "class,train_count,test_count\n";
    for (const auto& [label, c] : counts)
        out += label + "," + std::to_string(c.first) + "," + std::to_string(c.second) + "\n";
    return out;
}

inline std::string run_stats_text(const RunStats& s) {
    auto line = [](const char* name, const std::optional<double>& v) {
        std::string out = report_detail::pad(name, 22);
        out += v ? report_detail::num(*v) : std::string("absent");
        out += "\n";
        return out;
    };
    return line("avg_pre_intervention", s.avg_pre_intervention) + line("avg_gap_raw", s.avg_gap_raw) +
           line("avg_gap_corrected", s.avg_gap_corrected);
}

inline std::string categories_string(const std::set<Category>& cats) {
    std::string out;
    for (Category c : cats) {
        if (!out.empty()) out += ",";
        out += to_string(c);
    }
    return out;
}

inline std::string drift_params_text(const DriftParams& used, const std::optional<DriftParams>& derived) {
    using report_detail::pad;
    std::string out;
    out += pad("", 22) + pad("batch_size", 12) + "window\n";
    out += pad("used", 22) + pad(std::to_string(used.batch_size), 12) + std::to_string(used.window) + "\n";
    if (derived) {
        out += pad("derived_from_stats", 22) + pad(std::to_string(derived->batch_size), 12) +
               std::to_string(derived->window) + "\n";
    } else {
        out += pad("derived_from_stats", 22) + "absent (missing run statistics)\n";
    }
    out += "soft_categories       " + categories_string(used.soft_categories) + "\n";
    out += "relevant_per_batch    " + std::to_string(used.relevant_per_batch) + "\n";
    out += "inflation             " + report_detail::num(used.inflation, "%.2f") + "\n";
    return out;
}

inline std::string cv_metrics_csv(const CvResult& relevance, const CvResult& category) {
    using report_detail::num;
    std::string out = "model,folds,mean_accuracy,mean_weighted_f1\n";
    out += "svm_relevance," + std::to_string(relevance.folds) + "," + num(relevance.mean_accuracy) + "," +
           num(relevance.mean_weighted_f1) + "\n";
    out += "lr_category," + std::to_string(category.folds) + "," + num(category.mean_accuracy) + "," +
           num(category.mean_weighted_f1) + "\n";
    return out;
}

inline std::string alerts_jsonl(const std::vector<Alert>& alerts) {
    std::string out;
    for (const auto& a : alerts) {
        nlohmann::json j{{"conversation", a.conversation}, {"batch_index", a.batch_index},
                         {"first_seq", a.first_seq},       {"last_seq", a.last_seq},
                         {"window_batches", a.window_batches}, {"batch_size", a.batch_size}};
        out += j.dump() + "\n";
    }
    return out;
}

inline std::string predictions_jsonl(const std::vector<PredictionRecord>& recs) {
    std::string out;
    for (const auto& r : recs) {
        nlohmann::json j{{"message_id", r.message_id},
                         {"relevance", r.relevance},
                         {"category", r.category},
                         {"effective_relevant", r.effective_relevant}};
        out += j.dump() + "\n";
    }
    return out;
}

// Single-model prediction log for the predict command.
inline std::string labels_jsonl(const std::vector<std::string>& ids, Task task, const std::vector<std::string>& labels) {
    std::string out;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        nlohmann::json j{{"message_id", ids[i]}, {"task", std::string(to_string(task))}, {"label", labels[i]}};
        out += j.dump() + "\n";
    }
    return out;
}

} // namespace chatdrift

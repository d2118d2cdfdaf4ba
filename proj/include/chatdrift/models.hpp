#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "chatdrift/errors.hpp"
#include "chatdrift/features.hpp"
#include "chatdrift/rng.hpp"

namespace chatdrift {

enum class ModelKind { nb, lr, svm };

inline std::string_view to_string(ModelKind k) {
    switch (k) {
        case ModelKind::nb: return "nb";
        case ModelKind::lr: return "lr";
        default: return "svm";
    }
}
inline bool parse_model_kind(std::string_view s, ModelKind& out) {
    const std::string v = detail::lower_ascii(s);
    if (v == "nb") out = ModelKind::nb;
    else if (v == "lr") out = ModelKind::lr;
    else if (v == "svm") out = ModelKind::svm;
    else return false;
    return true;
}

struct TrainConfig {
    double nb_alpha = 1.0;
    double lr_rate = 0.1;       // initial gradient-descent step
    double lr_lambda = 1e-4;    // L2 strength, bias unregularized
    int lr_epochs = 1000;
    double lr_tol = 1e-6;       // stop when gradient norm drops below this
    double svm_lambda = 1e-4;
    int svm_epochs = 50;        // passes over the data
    std::uint64_t svm_seed = 1; // per-epoch shuffle seed

    friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

// One weight row + bias, the unit binary trainers produce.
struct BinaryLinear {
    std::vector<double> w;
    double b = 0.0;
};

namespace detail {

inline void check_training_rows(const std::vector<SparseVector>& X, std::size_t n_labels, std::uint32_t dim) {
    if (X.empty()) fail(Errc::empty_training, "training set is empty");
    if (X.size() != n_labels) fail(Errc::length_mismatch, "feature/label count mismatch");
    for (const auto& x : X)
        if (x.dim != dim) fail(Errc::dim_mismatch, "training vectors disagree on dimensionality");
}

inline double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

// Numerically stable log(1 + exp(z)).
inline double log1pexp(double z) {
    if (z > 0.0) return z + std::log1p(std::exp(-z));
    return std::log1p(std::exp(z));
}

} // namespace detail

// ---------------------------------------------------------------------------
// Multinomial naive Bayes (log space). Feature values must be non-negative;
// fractional counts are fine.

struct NbModel {
    std::vector<std::string> classes;
    std::vector<std::vector<double>> log_likelihood; // [class][dim]
    std::vector<double> log_prior;
};

inline NbModel nb_train(const std::vector<SparseVector>& X, const std::vector<std::string>& y, double alpha = 1.0) {
    if (!(alpha > 0.0)) fail(Errc::bad_spec, "nb smoothing alpha must be > 0");
    const std::uint32_t dim = X.empty() ? 0 : X.front().dim;
    detail::check_training_rows(X, y.size(), dim);
    for (const auto& x : X)
        for (const auto& [j, v] : x.entries)
            if (v < 0.0) fail(Errc::negative_feature, "naive Bayes requires non-negative features");

    std::map<std::string, std::size_t> class_ix;
    for (const auto& label : y) class_ix.emplace(label, 0);
    NbModel m;
    for (auto& [label, ix] : class_ix) {
        ix = m.classes.size();
        m.classes.push_back(label);
    }
    const std::size_t k = m.classes.size();
    std::vector<std::vector<double>> sums(k, std::vector<double>(dim, 0.0));
    std::vector<double> totals(k, 0.0);
    std::vector<double> counts(k, 0.0);
    for (std::size_t i = 0; i < X.size(); ++i) {
        const std::size_t c = class_ix[y[i]];
        counts[c] += 1.0;
        for (const auto& [j, v] : X[i].entries) {
            sums[c][j] += v;
            totals[c] += v;
        }
    }
    m.log_likelihood.assign(k, std::vector<double>(dim, 0.0));
    m.log_prior.resize(k);
    const double n = static_cast<double>(X.size());
    for (std::size_t c = 0; c < k; ++c) {
        const double denom = totals[c] + alpha * static_cast<double>(dim);
        for (std::uint32_t j = 0; j < dim; ++j) m.log_likelihood[c][j] = std::log((sums[c][j] + alpha) / denom);
        m.log_prior[c] = std::log(counts[c] / n);
    }
    return m;
}

// Class posteriors via softmax over log prior + log likelihood dot x.
inline std::vector<double> nb_posterior(const NbModel& m, const SparseVector& x) {
    if (m.log_likelihood.empty()) fail(Errc::empty_training, "naive Bayes model has no classes");
    if (x.dim != m.log_likelihood.front().size())
        fail(Errc::dim_mismatch, "query dimensionality does not match the model");
    std::vector<double> logit(m.classes.size());
    for (std::size_t c = 0; c < m.classes.size(); ++c) logit[c] = m.log_prior[c] + dot(m.log_likelihood[c], x);
    const double mx = *std::max_element(logit.begin(), logit.end());
    double z = 0.0;
    for (double& l : logit) {
        l = std::exp(l - mx);
        z += l;
    }
    for (double& l : logit) l /= z;
    return logit;
}

// ---------------------------------------------------------------------------
// Binary logistic regression: full-batch gradient descent on
//   mean log-loss + (lambda/2) ||w||^2    (bias unregularized),
// with step backtracking so the training loss never increases.

struct LrEval {
    double loss = 0.0;
    std::vector<double> grad_w;
    double grad_b = 0.0;
};

inline LrEval lr_eval(const std::vector<SparseVector>& X, const std::vector<double>& y01,
                      const std::vector<double>& w, double b, double lambda) {
    LrEval e;
    e.grad_w.assign(w.size(), 0.0);
    const double n = static_cast<double>(X.size());
    for (std::size_t i = 0; i < X.size(); ++i) {
        const double z = dot(w, X[i]) + b;
        e.loss += detail::log1pexp(z) - y01[i] * z;
        const double r = detail::sigmoid(z) - y01[i];
        for (const auto& [j, v] : X[i].entries) e.grad_w[j] += r * v;
        e.grad_b += r;
    }
    e.loss /= n;
    e.grad_b /= n;
    double wn2 = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) {
        e.grad_w[j] = e.grad_w[j] / n + lambda * w[j];
        wn2 += w[j] * w[j];
    }
    e.loss += 0.5 * lambda * wn2;
    if (!std::isfinite(e.loss)) fail(Errc::non_finite, "logistic loss became non-finite");
    return e;
}

inline BinaryLinear lr_fit(const std::vector<SparseVector>& X, const std::vector<double>& y01, std::uint32_t dim,
                           const TrainConfig& cfg) {
    detail::check_training_rows(X, y01.size(), dim);
    bool saw0 = false, saw1 = false;
    for (double v : y01) (v > 0.5 ? saw1 : saw0) = true;
    if (!saw0 || !saw1) fail(Errc::single_class, "logistic regression needs both classes present");

    BinaryLinear m;
    m.w.assign(dim, 0.0);
    LrEval cur = lr_eval(X, y01, m.w, m.b, cfg.lr_lambda);
    double step = cfg.lr_rate;
    std::vector<double> wt(dim);
    for (int epoch = 0; epoch < cfg.lr_epochs; ++epoch) {
        double g2 = cur.grad_b * cur.grad_b;
        for (double g : cur.grad_w) g2 += g * g;
        if (std::sqrt(g2) < cfg.lr_tol) break;
        bool accepted = false;
        for (int half = 0; half < 60 && !accepted; ++half) {
            for (std::uint32_t j = 0; j < dim; ++j) wt[j] = m.w[j] - step * cur.grad_w[j];
            const double bt = m.b - step * cur.grad_b;
            LrEval next = lr_eval(X, y01, wt, bt, cfg.lr_lambda);
            if (next.loss <= cur.loss) {
                m.w.swap(wt);
                m.b = bt;
                cur = std::move(next);
                accepted = true;
            } else {
                step *= 0.5;
            }
        }
        if (!accepted) break; // no step size improves: treat as converged
    }
    return m;
}

inline double lr_score(const BinaryLinear& m, const SparseVector& x) {
    if (x.dim != m.w.size()) fail(Errc::dim_mismatch, "query dimensionality does not match the model");
    return detail::sigmoid(dot(m.w, x) + m.b);
}

// ---------------------------------------------------------------------------
// Linear SVM: Pegasos-style primal subgradient on
//   (lambda/2) ||w||^2 + mean hinge(y (w x + b)),
// step 1/(lambda t), seeded per-epoch shuffles, norm projection, and
// best-iterate selection (the zero start included) so the returned model's
// objective never exceeds the zero model's.

inline double svm_objective(const std::vector<SparseVector>& X, const std::vector<double>& ypm1,
                            const std::vector<double>& w, double b, double lambda) {
    double hinge = 0.0;
    for (std::size_t i = 0; i < X.size(); ++i)
        hinge += std::max(0.0, 1.0 - ypm1[i] * (dot(w, X[i]) + b));
    hinge /= static_cast<double>(X.size());
    double wn2 = 0.0;
    for (double v : w) wn2 += v * v;
    return 0.5 * lambda * wn2 + hinge;
}

struct SvmEval {
    double objective = 0.0;
    std::vector<double> subgrad_w;
    double subgrad_b = 0.0;
};

// Subgradient at (w, b); at hinge kinks the active-side convention is used.
inline SvmEval svm_eval(const std::vector<SparseVector>& X, const std::vector<double>& ypm1,
                        const std::vector<double>& w, double b, double lambda) {
    SvmEval e;
    e.subgrad_w.assign(w.size(), 0.0);
    double hinge = 0.0;
    const double n = static_cast<double>(X.size());
    for (std::size_t i = 0; i < X.size(); ++i) {
        const double margin = ypm1[i] * (dot(w, X[i]) + b);
        if (margin < 1.0) {
            hinge += 1.0 - margin;
            for (const auto& [j, v] : X[i].entries) e.subgrad_w[j] -= ypm1[i] * v;
            e.subgrad_b -= ypm1[i];
        }
    }
    e.subgrad_b /= n;
    double wn2 = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) {
        e.subgrad_w[j] = e.subgrad_w[j] / n + lambda * w[j];
        wn2 += w[j] * w[j];
    }
    e.objective = 0.5 * lambda * wn2 + hinge / n;
    return e;
}

inline BinaryLinear svm_fit(const std::vector<SparseVector>& X, const std::vector<double>& ypm1, std::uint32_t dim,
                            const TrainConfig& cfg) {
    detail::check_training_rows(X, ypm1.size(), dim);
    bool pos = false, neg = false;
    for (double v : ypm1) (v > 0.0 ? pos : neg) = true;
    if (!pos || !neg) fail(Errc::single_class, "svm needs both classes present");
    const double lam = cfg.svm_lambda;
    if (!(lam > 0.0)) fail(Errc::bad_spec, "svm lambda must be > 0");

    std::vector<double> xnorm2(X.size(), 0.0);
    for (std::size_t i = 0; i < X.size(); ++i)
        for (const auto& [j, v] : X[i].entries) xnorm2[i] += v * v;

    // w is kept as scale * v to make the per-step shrink O(1).
    std::vector<double> v(dim, 0.0);
    double scale = 1.0, vnorm2 = 0.0, b = 0.0;
    const double cap2 = 1.0 / lam;
    auto flush_scale = [&] {
        for (double& e : v) e *= scale;
        vnorm2 = 0.0;
        for (double e : v) vnorm2 += e * e;
        scale = 1.0;
    };

    BinaryLinear best;
    best.w.assign(dim, 0.0);
    double best_obj = svm_objective(X, ypm1, best.w, best.b, lam);

    std::mt19937_64 g(cfg.svm_seed);
    std::uint64_t t = 0;
    for (int epoch = 0; epoch < cfg.svm_epochs; ++epoch) {
        const auto order = shuffled_indices(X.size(), g);
        for (const std::size_t i : order) {
            ++t;
            const double eta = 1.0 / (lam * static_cast<double>(t));
            const double vx = dot(v, X[i]);
            const double margin = ypm1[i] * (scale * vx + b);
            const double shrink = 1.0 - 1.0 / static_cast<double>(t);
            if (shrink == 0.0) {
                std::fill(v.begin(), v.end(), 0.0);
                scale = 1.0;
                vnorm2 = 0.0;
            } else {
                scale *= shrink;
            }
            if (margin < 1.0) {
                const double c = eta * ypm1[i] / scale;
                for (const auto& [j, xv] : X[i].entries) v[j] += c * xv;
                vnorm2 += 2.0 * c * (shrink == 0.0 ? 0.0 : vx) + c * c * xnorm2[i];
                b += eta * ypm1[i];
            }
            const double wnorm2 = scale * scale * vnorm2;
            if (wnorm2 > cap2) scale *= std::sqrt(cap2 / wnorm2);
            if (std::abs(scale) < 1e-130) flush_scale();
        }
        flush_scale(); // exact norm again; also leaves w == v
        if (!std::isfinite(vnorm2) || !std::isfinite(b)) fail(Errc::non_finite, "svm weights became non-finite");
        const double obj = svm_objective(X, ypm1, v, b, lam);
        if (obj < best_obj) {
            best.w = v;
            best.b = b;
            best_obj = obj;
        }
    }
    return best;
}

inline double svm_margin(const BinaryLinear& m, const SparseVector& x) {
    if (x.dim != m.w.size()) fail(Errc::dim_mismatch, "query dimensionality does not match the model");
    return dot(m.w, x) + m.b;
}

// ---------------------------------------------------------------------------
// Multiclass wrapper: one-vs-rest rows for lr/svm, native rows for nb. The
// model embeds its feature assembly so a saved file is self-contained.

struct LinearModel {
    ModelKind kind = ModelKind::nb;
    Task task = Task::relevance;
    std::vector<std::string> classes; // row order; ties resolve to the first
    std::vector<std::vector<double>> weights;
    std::vector<double> biases;
    FeatureAssembly assembly;
    TrainConfig train_config;

    std::uint32_t dim() const { return weights.empty() ? 0 : static_cast<std::uint32_t>(weights.front().size()); }
};

inline LinearModel ovr_train(const std::vector<SparseVector>& X, const std::vector<std::string>& y, ModelKind kind,
                             const TrainConfig& cfg) {
    const std::uint32_t dim = X.empty() ? 0 : X.front().dim;
    detail::check_training_rows(X, y.size(), dim);
    std::set<std::string> labels(y.begin(), y.end());
    LinearModel m;
    m.kind = kind;
    m.train_config = cfg;
    m.classes.assign(labels.begin(), labels.end());
    if (kind == ModelKind::nb) {
        NbModel nb = nb_train(X, y, cfg.nb_alpha);
        m.classes = nb.classes;
        m.weights = std::move(nb.log_likelihood);
        m.biases = std::move(nb.log_prior);
        return m;
    }
    if (m.classes.size() < 2) fail(Errc::single_class, "one-vs-rest needs at least two classes");
    for (const auto& cls : m.classes) {
        BinaryLinear row;
        if (kind == ModelKind::lr) {
            std::vector<double> y01(y.size());
            for (std::size_t i = 0; i < y.size(); ++i) y01[i] = (y[i] == cls) ? 1.0 : 0.0;
            row = lr_fit(X, y01, dim, cfg);
        } else {
            std::vector<double> ypm(y.size());
            for (std::size_t i = 0; i < y.size(); ++i) ypm[i] = (y[i] == cls) ? 1.0 : -1.0;
            row = svm_fit(X, ypm, dim, cfg);
        }
        m.weights.push_back(std::move(row.w));
        m.biases.push_back(row.b);
    }
    return m;
}

// Raw per-class decision scores: margins for lr/svm, log-joint for nb.
inline std::vector<double> decision_scores(const LinearModel& m, const SparseVector& x) {
    if (x.dim != m.dim()) fail(Errc::dim_mismatch, "query dimensionality does not match the model");
    std::vector<double> s(m.classes.size());
    for (std::size_t c = 0; c < m.classes.size(); ++c) s[c] = m.biases[c] + dot(m.weights[c], x);
    return s;
}

// Argmax prediction; ties go to the earliest class in row order.
inline const std::string& predict(const LinearModel& m, const SparseVector& x) {
    const auto s = decision_scores(m, x);
    std::size_t arg = 0;
    for (std::size_t c = 1; c < s.size(); ++c)
        if (s[c] > s[arg]) arg = c;
    return m.classes[arg];
}

// Score of one class, suitable for ranking/ROC: nb posterior, lr sigmoid,
// svm margin.
inline double positive_score(const LinearModel& m, const SparseVector& x, const std::string& positive_class) {
    const auto it = std::find(m.classes.begin(), m.classes.end(), positive_class);
    if (it == m.classes.end()) fail(Errc::unknown_label, "class not in model: " + positive_class);
    const auto c = static_cast<std::size_t>(it - m.classes.begin());
    if (m.kind == ModelKind::nb) {
        const auto logit = decision_scores(m, x); // log-joint per class
        const double mx = *std::max_element(logit.begin(), logit.end());
        double z = 0.0;
        for (double l : logit) z += std::exp(l - mx);
        return std::exp(logit[c] - mx) / z;
    }
    const double margin = m.biases[c] + dot(m.weights[c], x);
    return m.kind == ModelKind::lr ? detail::sigmoid(margin) : margin;
}

// ---------------------------------------------------------------------------
// Dataset-level training: preprocess, fit the assembly on the training set
// only, extract labels for the task, train.

struct PipelineConfig {
    Preprocessor prep;
    CustomFeatureConfig custom;
    bool use_custom = true;
    TrainConfig train;
};

inline std::vector<SparseVector> assemble_dataset(const Dataset& d, const FeatureAssembly& fa,
                                                  const Preprocessor& prep) {
    std::vector<SparseVector> X;
    X.reserve(d.size());
    for (const auto& m : d.messages) X.push_back(assemble_message(m, fa, prep));
    return X;
}

inline std::vector<std::string> labels_of(const Dataset& d, Task task) {
    std::vector<std::string> y;
    y.reserve(d.size());
    for (const auto& m : d.messages) y.push_back(label_of(m, task));
    return y;
}

inline LinearModel train_pipeline(const Dataset& train, Task task, ModelKind kind, const PipelineConfig& cfg) {
    if (train.empty()) fail(Errc::empty_training, "training set is empty");
    FeatureAssembly fa = fit_assembly(train, task, cfg.prep, cfg.custom, cfg.use_custom);
    const auto X = assemble_dataset(train, fa, cfg.prep);
    LinearModel m = ovr_train(X, labels_of(train, task), kind, cfg.train);
    m.task = task;
    m.assembly = std::move(fa);
    return m;
}

inline std::vector<std::string> predict_dataset(const LinearModel& m, const Dataset& d, const Preprocessor& prep) {
    std::vector<std::string> out;
    out.reserve(d.size());
    for (const auto& msg : d.messages) out.push_back(predict(m, assemble_message(msg, m.assembly, prep)));
    return out;
}

} // namespace chatdrift

// Acceptance gate: twelve end-to-end criteria, one PASS/FAIL line each.
// Exits nonzero if any criterion fails. Tolerances are pinned constants.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include <nlohmann/json.hpp>

#include "chatdrift/corpus.hpp"
#include "chatdrift/drift.hpp"
#include "chatdrift/eval.hpp"
#include "chatdrift/features.hpp"
#include "chatdrift/model_io.hpp"
#include "chatdrift/models.hpp"
#include "chatdrift/rng.hpp"
#include "chatdrift/synth.hpp"

using namespace chatdrift;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances and budgets.
constexpr double kNbOracleTol = 1e-9;        // criterion 1
constexpr double kNbBudgetSec = 1.0;         // criterion 1
constexpr double kFdStep = 1e-5;             // criterion 2
constexpr double kGradRelTol = 1e-4;         // criterion 2
constexpr double kObjSlack = 1e-12;          // criterion 3
constexpr double kSymBiasTol = 1e-2;         // criterion 3
constexpr double kTfidfTol = 1e-12;          // criterion 4
constexpr double kMetricTol = 1e-12;         // criterion 5
constexpr double kBaselineCenter = 0.619;    // criterion 6
constexpr double kBaselineBand = 0.02;       // criterion 6
constexpr double kAccuracyMargin = 0.10;     // criterion 7
constexpr double kWeightedF1Floor = 0.75;    // criterion 7
constexpr double kLearnBudgetSec = 60.0;     // criterion 7
constexpr double kDriftBudgetSec = 120.0;    // criterion 11

struct Fail {
    std::string why;
};

void require(bool ok, const std::string& why) {
    if (!ok) throw Fail{why};
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

SparseVector dense_to_sparse(const std::vector<double>& row) {
    SparseVector x;
    x.dim = static_cast<std::uint32_t>(row.size());
    for (std::uint32_t j = 0; j < row.size(); ++j)
        if (row[j] != 0.0) x.entries.emplace_back(j, row[j]);
    return x;
}

std::vector<double> densify(const SparseVector& x) {
    std::vector<double> out(x.dim, 0.0);
    for (const auto& [i, v] : x.entries) out[i] = v;
    return out;
}

std::vector<std::string> classes_of(const std::vector<std::string>& y_true, const std::vector<std::string>& y_pred) {
    std::set<std::string> s(y_true.begin(), y_true.end());
    s.insert(y_pred.begin(), y_pred.end());
    return {s.begin(), s.end()};
}

// ---- shared fixtures ------------------------------------------------------

const fs::path& work_dir() {
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / "chatdrift_acceptance";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

struct CliResult {
    int exit_code = -1;
    std::string out;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

CliResult run_cli(const std::string& args) {
    static int call = 0;
    const fs::path out = work_dir() / ("stdout." + std::to_string(call));
    const fs::path err = work_dir() / ("stderr." + std::to_string(call));
    ++call;
    const std::string cmd =
        std::string(CHATDRIFT_CLI_PATH) + " " + args + " >" + out.string() + " 2>" + err.string();
    const int status = std::system(cmd.c_str());
    CliResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    return r;
}

// The large mixture corpus and its fixed random split, shared by 6 and 7.
struct BigSplit {
    Dataset train, test;
    std::vector<std::string> y_train, y_test;
    double baseline = 0.0;
};

const BigSplit& big_split() {
    static const BigSplit s = [] {
        const Dataset d = generate_synthetic(default_synth_spec(), 3715, 42);
        auto [tr, te] = split_random(d, 2653, 42);
        BigSplit out;
        out.train = std::move(tr);
        out.test = std::move(te);
        out.y_train = labels_of(out.train, Task::relevance);
        out.y_test = labels_of(out.test, Task::relevance);
        out.baseline = majority_baseline(out.y_train, out.y_test);
        return out;
    }();
    return s;
}

// Compact conversation builder: Y relevant, N non-relevant chat, M a
// non-relevant teacher intervention.
Dataset conv(std::string_view pattern) {
    Dataset d;
    std::int64_t seq = 0;
    for (char c : pattern) {
        Message m;
        m.message_id = "b" + std::to_string(seq);
        m.book_id = "b";
        m.seq = seq++;
        m.text = "x";
        switch (c) {
            case 'Y':
                m.relevance = Relevance::yes;
                m.category = Category::discussion;
                break;
            case 'M':
                m.relevance = Relevance::no;
                m.category = Category::moderating;
                m.user_role = UserRole::teacher;
                break;
            default:
                m.relevance = Relevance::no;
                m.category = Category::chatting;
                break;
        }
        d.messages.push_back(std::move(m));
    }
    return d;
}

// ---- criterion 1: naive Bayes vs a brute-force oracle ----------------------

// Textbook multinomial Bayes in long double, straight from the count matrix.
std::vector<double> nb_oracle(const std::vector<std::vector<double>>& X, const std::vector<std::string>& y,
                              double alpha, const std::vector<double>& query) {
    std::map<std::string, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < y.size(); ++i) by_class[y[i]].push_back(i);
    const std::size_t dim = X.front().size();
    std::vector<long double> log_joint;
    for (const auto& [cls, rows] : by_class) {
        long double total = 0.0L;
        std::vector<long double> counts(dim, 0.0L);
        for (std::size_t i : rows)
            for (std::size_t j = 0; j < dim; ++j) {
                counts[j] += X[i][j];
                total += X[i][j];
            }
        long double lj = std::log(static_cast<long double>(rows.size()) / static_cast<long double>(y.size()));
        for (std::size_t j = 0; j < dim; ++j) {
            const long double theta = (counts[j] + alpha) / (total + alpha * static_cast<long double>(dim));
            lj += static_cast<long double>(query[j]) * std::log(theta);
        }
        log_joint.push_back(lj);
    }
    const long double mx = *std::max_element(log_joint.begin(), log_joint.end());
    long double z = 0.0L;
    for (long double l : log_joint) z += std::exp(l - mx);
    std::vector<double> post;
    for (long double l : log_joint) post.push_back(static_cast<double>(std::exp(l - mx) / z));
    return post;
}

void criterion_nb_oracle() {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 g(101);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n_docs = 1 + bounded(g, 5);
        const std::size_t n_terms = 1 + bounded(g, 4);
        std::vector<std::vector<double>> dense;
        std::vector<SparseVector> X;
        std::vector<std::string> y;
        for (std::size_t i = 0; i < n_docs; ++i) {
            std::vector<double> row(n_terms, 0.0);
            for (auto& v : row) v = static_cast<double>(bounded(g, 4)); // integer counts 0..3
            dense.push_back(row);
            X.push_back(dense_to_sparse(row));
            y.push_back(i == 0 ? "A" : (i == 1 ? "B" : (bounded(g, 2) ? "A" : "B")));
        }
        const double alpha = trial % 3 == 0 ? 0.5 : (trial % 3 == 1 ? 1.0 : 2.0);
        const NbModel m = nb_train(X, y, alpha);
        for (int q = 0; q < 3; ++q) {
            std::vector<double> query(n_terms, 0.0);
            for (auto& v : query) v = static_cast<double>(bounded(g, 4));
            const auto got = nb_posterior(m, dense_to_sparse(query));
            const auto want = nb_oracle(dense, y, alpha, query);
            require(got.size() == want.size(), "posterior arity mismatch");
            for (std::size_t c = 0; c < got.size(); ++c) worst = std::max(worst, std::abs(got[c] - want[c]));
        }
    }
    require(worst <= kNbOracleTol, "max |posterior - oracle| = " + fmt(worst));
    const double dt = seconds_since(t0);
    require(dt < kNbBudgetSec, "took " + fmt(dt) + " s (budget 1 s)");
}

// ---- criterion 2: logistic gradient vs central finite differences ----------

void criterion_lr_gradient() {
    std::mt19937_64 g(202);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t dim = 2 + bounded(g, 3);
        std::vector<SparseVector> X;
        std::vector<double> y01;
        for (int i = 0; i < 5; ++i) {
            std::vector<double> row(dim, 0.0);
            for (auto& v : row)
                if (bounded(g, 4) != 0) v = uniform(g, -2.0, 2.0);
            X.push_back(dense_to_sparse(row));
            y01.push_back(static_cast<double>(bounded(g, 2)));
        }
        std::vector<double> w(dim, 0.0);
        for (auto& v : w) v = uniform(g, -1.0, 1.0);
        const double b = uniform(g, -1.0, 1.0);
        const double lambda = trial % 3 == 0 ? 0.0 : (trial % 3 == 1 ? 1e-4 : 0.1);
        const LrEval e = lr_eval(X, y01, w, b, lambda);
        const auto loss_at = [&](const std::vector<double>& wv, double bv) {
            return lr_eval(X, y01, wv, bv, lambda).loss;
        };
        for (std::size_t j = 0; j < dim; ++j) {
            auto wp = w, wm = w;
            wp[j] += kFdStep;
            wm[j] -= kFdStep;
            const double fd = (loss_at(wp, b) - loss_at(wm, b)) / (2.0 * kFdStep);
            worst = std::max(worst, std::abs(e.grad_w[j] - fd) / std::max(1e-8, std::abs(fd)));
        }
        const double fdb = (loss_at(w, b + kFdStep) - loss_at(w, b - kFdStep)) / (2.0 * kFdStep);
        worst = std::max(worst, std::abs(e.grad_b - fdb) / std::max(1e-8, std::abs(fdb)));
    }
    require(worst < kGradRelTol, "max relative gradient error = " + fmt(worst));
}

// ---- criterion 3: svm objective never worse than zero weights --------------

void criterion_svm_objective() {
    std::mt19937_64 g(303);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t dim = 2 + bounded(g, 4);
        const std::size_t n = 6 + bounded(g, 7);
        std::vector<SparseVector> X;
        std::vector<double> y;
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<double> row(dim, 0.0);
            for (auto& v : row) v = uniform(g, -2.0, 2.0);
            X.push_back(dense_to_sparse(row));
            y.push_back(i == 0 ? 1.0 : (i == 1 ? -1.0 : (bounded(g, 2) ? 1.0 : -1.0)));
        }
        TrainConfig cfg;
        cfg.svm_lambda = trial % 3 == 0 ? 1e-4 : (trial % 3 == 1 ? 0.01 : 0.1);
        cfg.svm_epochs = 200;
        cfg.svm_seed = static_cast<std::uint64_t>(trial) + 1;
        const BinaryLinear m = svm_fit(X, y, static_cast<std::uint32_t>(dim), cfg);
        const double trained = svm_objective(X, y, m.w, m.b, cfg.svm_lambda);
        const double at_zero = svm_objective(X, y, std::vector<double>(dim, 0.0), 0.0, cfg.svm_lambda);
        require(trained <= at_zero + kObjSlack,
                "trial " + std::to_string(trial) + ": objective " + fmt(trained) + " > zero-weight " + fmt(at_zero));
    }
    // Symmetric two-point fixture: the decision boundary must pass near 0.
    const std::vector<SparseVector> X = {dense_to_sparse({1.0, 0.0}), dense_to_sparse({-1.0, 0.0})};
    TrainConfig cfg;
    cfg.svm_lambda = 0.1;
    cfg.svm_epochs = 20000;
    const BinaryLinear m = svm_fit(X, {1.0, -1.0}, 2, cfg);
    const double at_origin = svm_margin(m, SparseVector{{}, 2});
    require(std::abs(at_origin) < kSymBiasTol, "|decision(0)| = " + fmt(std::abs(at_origin)));
}

// ---- criterion 4: tf-idf vs a brute-force oracle ---------------------------

std::vector<double> dense_tfidf_oracle(const std::vector<std::vector<std::string>>& corpus,
                                       const std::vector<std::string>& doc) {
    std::set<std::string> vocab_set;
    std::map<std::string, int> df;
    for (const auto& d : corpus) {
        for (const auto& t : std::set<std::string>(d.begin(), d.end())) ++df[t];
        vocab_set.insert(d.begin(), d.end());
    }
    const int n_docs = static_cast<int>(corpus.size());
    const std::vector<std::string> vocab(vocab_set.begin(), vocab_set.end());
    std::vector<double> x(vocab.size(), 0.0);
    for (std::size_t j = 0; j < vocab.size(); ++j) {
        double tf = 0.0;
        for (const auto& t : doc)
            if (t == vocab[j]) tf += 1.0;
        const double idf = std::log((1.0 + n_docs) / (1.0 + df[vocab[j]])) + 1.0;
        x[j] = tf * idf;
    }
    double norm = 0.0;
    for (double v : x) norm += v * v;
    norm = std::sqrt(norm);
    if (norm > 0.0)
        for (double& v : x) v /= norm;
    return x;
}

void criterion_tfidf_oracle() {
    std::mt19937_64 g(404);
    const std::vector<std::string> alphabet = {"a", "b", "c", "ab", "č", "miška"};
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n_docs = 1 + bounded(g, 10);
        std::vector<std::vector<std::string>> corpus;
        std::vector<TokenList> docs;
        for (std::size_t i = 0; i < n_docs; ++i) {
            std::vector<std::string> d;
            // empty documents are legal, but the corpus needs at least one token
            const std::size_t len = i == 0 ? 1 + bounded(g, 6) : bounded(g, 7);
            for (std::size_t k = 0; k < len; ++k) d.push_back(alphabet[bounded(g, alphabet.size())]);
            corpus.push_back(d);
            TokenList t;
            t.tokens = d;
            docs.push_back(std::move(t));
        }
        const TfidfVocabulary v = fit_tfidf(docs);
        for (std::size_t i = 0; i < n_docs; ++i) {
            const SparseVector got_sparse = transform_tfidf(docs[i], v);
            const auto got = densify(got_sparse);
            const auto want = dense_tfidf_oracle(corpus, corpus[i]);
            require(got.size() == want.size(), "dimension mismatch");
            for (std::size_t j = 0; j < got.size(); ++j)
                require(std::abs(got[j] - want[j]) <= kTfidfTol,
                        "trial " + std::to_string(trial) + ": |value - oracle| = " + fmt(std::abs(got[j] - want[j])));
            const double norm = got_sparse.l2_norm();
            require(norm == 0.0 || std::abs(norm - 1.0) <= kTfidfTol, "norm = " + fmt(norm));
        }
    }
}

// ---- criterion 5: metric fixtures, micro-F1 identity, auc fixtures ---------

void criterion_metrics() {
    // Fixture confusion [[2,1],[0,3]]: rows are true classes.
    const std::vector<std::string> yt = {"A", "A", "A", "B", "B", "B"};
    const std::vector<std::string> yp = {"A", "A", "B", "B", "B", "B"};
    const MetricReport r = metrics(confusion(yt, yp, {"A", "B"}));
    const auto close = [](double a, double b) { return std::abs(a - b) <= kMetricTol; };
    require(close(r.precision[0], 1.0) && close(r.precision[1], 0.75),
            "precision = " + fmt(r.precision[0]) + ", " + fmt(r.precision[1]));
    require(close(r.recall[0], 2.0 / 3.0) && close(r.recall[1], 1.0),
            "recall = " + fmt(r.recall[0]) + ", " + fmt(r.recall[1]));
    require(close(r.f1[0], 0.8) && close(r.f1[1], 6.0 / 7.0), "f1 = " + fmt(r.f1[0]) + ", " + fmt(r.f1[1]));
    require(close(r.accuracy, 5.0 / 6.0), "accuracy = " + fmt(r.accuracy));

    // micro-F1 equals accuracy on random confusion matrices.
    std::mt19937_64 g(505);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t k = 2 + bounded(g, 3);
        const std::size_t n = 10 + bounded(g, 41);
        std::vector<std::string> t, p;
        for (std::size_t i = 0; i < n; ++i) {
            t.push_back("c" + std::to_string(bounded(g, k)));
            p.push_back("c" + std::to_string(bounded(g, k)));
        }
        const ConfusionMatrix cm = confusion(t, p, classes_of(t, p));
        const MetricReport m = metrics(cm);
        double tp = 0.0, fp = 0.0, fn = 0.0;
        for (std::size_t i = 0; i < cm.classes.size(); ++i)
            for (std::size_t j = 0; j < cm.classes.size(); ++j) {
                if (i == j)
                    tp += static_cast<double>(cm.counts[i][j]);
                else {
                    fn += static_cast<double>(cm.counts[i][j]);
                    fp += static_cast<double>(cm.counts[i][j]);
                }
            }
        const double micro_p = tp + fp > 0.0 ? tp / (tp + fp) : 0.0;
        const double micro_r = tp + fn > 0.0 ? tp / (tp + fn) : 0.0;
        const double micro_f1 = micro_p + micro_r > 0.0 ? 2.0 * micro_p * micro_r / (micro_p + micro_r) : 0.0;
        require(std::abs(micro_f1 - m.accuracy) <= kMetricTol,
                "micro-F1 " + fmt(micro_f1) + " != accuracy " + fmt(m.accuracy));
    }

    // AUC fixtures.
    const RocCurve c = roc_auc({1, 0, 1, 0}, {0.9, 0.8, 0.7, 0.1});
    require(std::abs(c.auc - 0.75) <= kMetricTol, "auc = " + fmt(c.auc));
    const RocCurve flat = roc_auc({1, 0, 1, 0}, {0.4, 0.4, 0.4, 0.4});
    require(std::abs(flat.auc - 0.5) <= kMetricTol, "constant-score auc = " + fmt(flat.auc));
}

// ---- criterion 6: majority baseline on the synthetic corpus ----------------

void criterion_majority_baseline() {
    const double b = big_split().baseline;
    require(std::abs(b - kBaselineCenter) <= kBaselineBand, "baseline accuracy = " + fmt(b));
}

// ---- criterion 7: all three classifiers learn the planted signal -----------

void criterion_separable_learning() {
    const auto t0 = std::chrono::steady_clock::now();
    const BigSplit& s = big_split();
    const double floor_acc = s.baseline + kAccuracyMargin;
    for (ModelKind kind : {ModelKind::nb, ModelKind::lr, ModelKind::svm}) {
        PipelineConfig cfg;
        const LinearModel m = train_pipeline(s.train, Task::relevance, kind, cfg);
        const auto preds = predict_dataset(m, s.test, cfg.prep);
        const MetricReport r = metrics(confusion(s.y_test, preds, classes_of(s.y_test, preds)));
        const std::string name(to_string(kind));
        require(r.accuracy >= floor_acc,
                name + " accuracy " + fmt(r.accuracy) + " < baseline+10pts " + fmt(floor_acc));
        if (kind != ModelKind::nb)
            require(r.weighted_f1 >= kWeightedF1Floor, name + " weighted F1 " + fmt(r.weighted_f1) + " < 0.75");
    }
    const double dt = seconds_since(t0);
    require(dt < kLearnBudgetSec, "took " + fmt(dt) + " s (budget 60 s)");
}

// ---- criterion 8: custom-feature ablation through the CLI ------------------

double f1_of_class_o(const fs::path& metrics_csv) {
    std::istringstream in(slurp(metrics_csv));
    std::string line;
    while (std::getline(in, line))
        if (line.rfind("f1,O,", 0) == 0) return std::stod(line.substr(5));
    throw Fail{"no f1,O row in " + metrics_csv.string()};
}

void criterion_feature_ablation() {
    const fs::path dir = work_dir() / "ablation";
    fs::create_directories(dir);
    save_csv(generate_synthetic(default_synth_spec(), 1200, 7), (dir / "corpus.csv").string());
    const std::string base = "train --data " + (dir / "corpus.csv").string() +
                             " --task category --model lr --seed 7 --custom-features ";
    const CliResult on = run_cli(base + "on --out " + (dir / "on").string());
    const CliResult off = run_cli(base + "off --out " + (dir / "off").string());
    require(on.exit_code == 0 && off.exit_code == 0, "train exit codes " + std::to_string(on.exit_code) + "/" +
                                                         std::to_string(off.exit_code));
    const double f1_on = f1_of_class_o(dir / "on" / "metrics.csv");
    const double f1_off = f1_of_class_o(dir / "off" / "metrics.csv");
    require(f1_on > f1_off, "F1(O) with features " + fmt(f1_on) + " <= without " + fmt(f1_off));
}

// ---- criterion 9: drift state machine --------------------------------------

std::vector<Alert> feed_stream(const std::vector<bool>& effective, const DriftParams& p) {
    DriftState st("c", p);
    std::vector<Alert> out;
    std::int64_t seq = 1;
    for (bool e : effective)
        if (auto a = st.feed(seq++, e)) out.push_back(*a);
    return out;
}

// Seq (1-based position) at which the first alert fires, if any.
std::optional<std::int64_t> first_fire(const std::vector<bool>& effective, const DriftParams& p) {
    DriftState st("c", p);
    std::int64_t seq = 1;
    for (bool e : effective) {
        if (st.feed(seq, e)) return seq;
        ++seq;
    }
    return std::nullopt;
}

void criterion_drift_state_machine() {
    const DriftParams def; // B=6, K=7
    require(def.batch_size == 6 && def.window == 7, "default params are not B=6, K=7");

    // 42 straight non-relevant messages: exactly one alert, on message 42.
    const std::vector<bool> all_nonrel(42, false);
    const auto alerts = feed_stream(all_nonrel, def);
    require(alerts.size() == 1, std::to_string(alerts.size()) + " alerts on the 42-message stream");
    require(alerts[0].last_seq == 42 && alerts[0].first_seq == 1 && alerts[0].batch_index == 6,
            "alert window [" + std::to_string(alerts[0].first_seq) + ", " + std::to_string(alerts[0].last_seq) + "]");

    // One effective-relevant message anywhere suppresses the alert.
    for (std::size_t flip = 0; flip < 42; ++flip) {
        auto s = all_nonrel;
        s[flip] = true;
        require(feed_stream(s, def).empty(), "flip at position " + std::to_string(flip + 1) + " did not suppress");
    }

    // Hand-simulated B=2, K=2 fixture: alert after message 8, window 5..8.
    DriftParams p22;
    p22.batch_size = 2;
    p22.window = 2;
    const auto small = feed_stream({false, false, false, true, false, false, false, false}, p22);
    require(small.size() == 1, std::to_string(small.size()) + " alerts on the B=2,K=2 fixture");
    require(small[0].last_seq == 8 && small[0].first_seq == 5 && small[0].batch_index == 3,
            "B=2,K=2 window [" + std::to_string(small[0].first_seq) + ", " + std::to_string(small[0].last_seq) + "]");

    // Monotone safety: flipping one message to relevant never fires earlier.
    std::mt19937_64 g(909);
    for (int stream = 0; stream < 5; ++stream) {
        std::vector<bool> base(1000);
        for (std::size_t i = 0; i < base.size(); ++i) base[i] = bounded(g, 20) == 0;
        const auto base_fire = first_fire(base, def);
        for (int flip = 0; flip < 40; ++flip) {
            std::size_t at = bounded(g, base.size());
            while (base[at]) at = bounded(g, base.size());
            auto flipped = base;
            flipped[at] = true;
            const auto fire = first_fire(flipped, def);
            if (!base_fire)
                require(!fire, "flip created an alert on an alert-free stream");
            else if (fire)
                require(*fire >= *base_fire, "flip at " + std::to_string(at + 1) + " moved the first alert from " +
                                                 std::to_string(*base_fire) + " to " + std::to_string(*fire));
        }
    }
}

// ---- criterion 10: run statistics and parameter derivation -----------------

void criterion_run_statistics() {
    const auto close = [](std::optional<double> got, double want) {
        return got.has_value() && std::abs(*got - want) <= kMetricTol;
    };

    const RunStats gaps = run_stats(conv("YNNYY"));
    require(close(gaps.avg_gap_raw, 1.0), "YNNYY raw gap = " + (gaps.avg_gap_raw ? fmt(*gaps.avg_gap_raw) : "absent"));
    require(close(gaps.avg_gap_corrected, 2.0),
            "YNNYY corrected gap = " + (gaps.avg_gap_corrected ? fmt(*gaps.avg_gap_corrected) : "absent"));

    const RunStats pre = run_stats(conv("NNM"));
    require(close(pre.avg_pre_intervention, 2.0),
            "NNM pre-intervention = " + (pre.avg_pre_intervention ? fmt(*pre.avg_pre_intervention) : "absent"));

    const RunStats block = run_stats(conv("YYYYNY")); // 4 consecutive Ys merge into one boundary
    require(close(block.avg_gap_corrected, 1.0),
            "YYYYNY corrected gap = " + (block.avg_gap_corrected ? fmt(*block.avg_gap_corrected) : "absent"));

    // Derivation: 4.8 * 1.5 = 7.2 -> 7 and 4.0 * 1.5 = 6.0 -> 6 ...
    RunStats rs;
    rs.avg_pre_intervention = 4.8;
    rs.avg_gap_corrected = 4.0;
    const DriftParams computed = derive_params(rs, 1.5);
    require(computed.batch_size == 7 && computed.window == 6,
            "derived (B, K) = (" + std::to_string(computed.batch_size) + ", " + std::to_string(computed.window) + ")");
    // ... while the shipped defaults stay pinned at (6, 7).
    const DriftParams pinned;
    require(pinned.batch_size == 6 && pinned.window == 7,
            "pinned (B, K) = (" + std::to_string(pinned.batch_size) + ", " + std::to_string(pinned.window) + ")");
}

// ---- criterion 11: end-to-end drift run through the CLI --------------------

void criterion_drift_end_to_end() {
    const auto t0 = std::chrono::steady_clock::now();
    const fs::path synth_dir = work_dir() / "drift_synth";
    const fs::path run_dir = work_dir() / "drift_run";
    const CliResult gen = run_cli("synth --synth-mode drift --synth-n 1000 --seed 42 --out " + synth_dir.string());
    require(gen.exit_code == 0, "synth exit code " + std::to_string(gen.exit_code));
    const CliResult run = run_cli("drift --data " + (synth_dir / "corpus.csv").string() + " --out " + run_dir.string());
    require(run.exit_code == 0, "drift exit code " + std::to_string(run.exit_code));

    // 5-fold CV reported for both models.
    std::istringstream cv(slurp(run_dir / "cv_metrics.csv"));
    std::string line;
    bool rel_folds = false, cat_folds = false;
    while (std::getline(cv, line)) {
        if (line.rfind("svm_relevance,5,", 0) == 0) rel_folds = true;
        if (line.rfind("lr_category,5,", 0) == 0) cat_folds = true;
    }
    require(rel_folds && cat_folds, "cv_metrics.csv lacks 5-fold rows for both models");

    // The stream is the chronological last 30%: 300 prediction records.
    std::istringstream preds(slurp(run_dir / "predictions.jsonl"));
    std::size_t n_preds = 0;
    while (std::getline(preds, line)) ++n_preds;
    require(n_preds == 300, std::to_string(n_preds) + " prediction records (expected 300)");

    // Every alert sits inside the planted span; at least one fires.
    DriftScenarioSpec spec; // defaults match the synth command above
    const DriftScenario sc = generate_drift_scenario(spec, 42);
    std::istringstream alerts(slurp(run_dir / "alerts.jsonl"));
    std::size_t n_alerts = 0;
    while (std::getline(alerts, line)) {
        ++n_alerts;
        const auto j = nlohmann::json::parse(line);
        const auto first = j.at("first_seq").get<std::int64_t>();
        const auto last = j.at("last_seq").get<std::int64_t>();
        require(first >= sc.span_first_seq && last <= sc.span_last_seq,
                "alert [" + std::to_string(first) + ", " + std::to_string(last) + "] outside planted span [" +
                    std::to_string(sc.span_first_seq) + ", " + std::to_string(sc.span_last_seq) + "]");
    }
    require(n_alerts >= 1, "no alerts fired inside the planted span");
    const double dt = seconds_since(t0);
    require(dt < kDriftBudgetSec, "took " + fmt(dt) + " s (budget 120 s)");
}

// ---- criterion 12: model persistence round-trip -----------------------------

void criterion_persistence() {
    const Dataset d = generate_synthetic(default_synth_spec(), 300, 9);
    std::mt19937_64 g(912);
    for (ModelKind kind : {ModelKind::nb, ModelKind::lr, ModelKind::svm}) {
        PipelineConfig cfg;
        cfg.train.svm_epochs = 20;
        cfg.train.lr_epochs = 200;
        const LinearModel m = train_pipeline(d, Task::relevance, kind, cfg);
        const fs::path file = work_dir() / ("model_" + std::string(to_string(kind)) + ".json");
        save_model(m, file.string());
        const LinearModel back = load_model(file.string());
        require(back.weights == m.weights && back.biases == m.biases, "weights changed across save/load");
        require(back.classes == m.classes, "classes changed across save/load");
        for (int trial = 0; trial < 100; ++trial) {
            std::vector<double> row(m.dim(), 0.0);
            for (auto& v : row)
                if (bounded(g, 4) == 0) v = uniform(g, 0.0, 1.0);
            const SparseVector x = dense_to_sparse(row);
            require(predict(m, x) == predict(back, x), "prediction changed across save/load");
            require(decision_scores(m, x) == decision_scores(back, x), "scores changed across save/load");
        }
    }
}

// ---- runner -----------------------------------------------------------------

struct Criterion {
    const char* name;
    void (*body)();
};

} // namespace

int main() {
    const Criterion criteria[] = {
        {"naive Bayes posterior matches a brute-force oracle (50 corpora, tol 1e-9, < 1 s)", criterion_nb_oracle},
        {"logistic gradient matches central differences (20 configs, h=1e-5, rel < 1e-4)", criterion_lr_gradient},
        {"svm objective at trained weights <= objective at zero; symmetric fixture centered", criterion_svm_objective},
        {"tf-idf transform matches a brute-force oracle (20 corpora, tol 1e-12, unit norms)", criterion_tfidf_oracle},
        {"metric fixtures exact; micro-F1 = accuracy x100; auc fixtures 0.75 and 0.5", criterion_metrics},
        {"majority baseline on the synthetic corpus = 0.619 +/- 0.02", criterion_majority_baseline},
        {"nb/lr/svm beat the baseline by 10 points; svm+lr weighted F1 >= 0.75 (< 60 s)", criterion_separable_learning},
        {"custom features strictly improve category-O F1 through the train command", criterion_feature_ablation},
        {"drift state machine: 42-message alert, suppression sweep, B=2 K=2, monotone safety", criterion_drift_state_machine},
        {"run statistics fixtures exact; derived (7,6) vs pinned (6,7) parameters", criterion_run_statistics},
        {"end-to-end drift run: 5-fold CV, alerts only inside the planted span (< 120 s)", criterion_drift_end_to_end},
        {"save/load round-trip: bit-exact weights, identical predictions on 100 vectors", criterion_persistence},
    };

    const int total = static_cast<int>(std::size(criteria));
    int passed = 0;
    for (int i = 0; i < total; ++i) {
        std::string verdict = "PASS";
        std::string why;
        try {
            criteria[i].body();
            ++passed;
        } catch (const Fail& f) {
            verdict = "FAIL";
            why = f.why;
        } catch (const std::exception& e) {
            verdict = "FAIL";
            why = std::string("unexpected error: ") + e.what();
        }
        std::printf("[%2d/%d] %s  %s%s%s\n", i + 1, total, verdict.c_str(), criteria[i].name,
                    why.empty() ? "" : " -- ", why.c_str());
        std::fflush(stdout);
    }
    std::printf("acceptance: %d/%d criteria passed\n", passed, total);
    return passed == total ? 0 : 1;
}

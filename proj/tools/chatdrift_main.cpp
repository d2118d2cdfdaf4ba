// chatdrift command-line front end: train/eval/predict on transcript CSVs,
// run statistics and drift detection, synthetic corpus generation.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "chatdrift/corpus.hpp"
#include "chatdrift/drift.hpp"
#include "chatdrift/eval.hpp"
#include "chatdrift/model_io.hpp"
#include "chatdrift/models.hpp"
#include "chatdrift/reports.hpp"
#include "chatdrift/synth.hpp"
#include "chatdrift/textprep.hpp"

namespace fs = std::filesystem;
using namespace chatdrift;

namespace {

struct Options {
    std::string data;
    std::string out = "out";
    std::string model_file;
    std::string stories;
    std::string lemma;
    std::string stopwords;
    std::string task = "relevance";
    std::string model = "svm";
    std::string custom_features = "on";
    std::string positive_class = "Yes";
    std::uint64_t seed = 42;
    std::int64_t n_train = 0; // 0: use train_fraction
    double train_fraction = 0.7;
    int folds = 5;
    bool strict_stories = false;
    // learner knobs
    double nb_alpha = 1.0;
    double lr_rate = 0.1;
    double lr_lambda = 1e-4;
    int lr_epochs = 1000;
    double lr_tol = 1e-6;
    double svm_lambda = 1e-4;
    int svm_epochs = 50;
    // custom-feature knobs
    int long_word_len = 12;
    int repeat_run_len = 3;
    std::string discussion_words = "lahko,bi";
    std::string identity_words = "kdo,jaz,ime";
    std::string question_words = "ali,kdo,kaj,kje,kam,kdaj,zakaj,kako,koliko";
    // drift knobs
    int batch_size = 6;
    int window = 7;
    int batch_threshold = 1;
    std::string soft_categories = "D,M";
    double inflation = 1.5;
    bool derive_params_flag = false;
    std::string intervention = "category-m";
    // synth knobs
    std::string synth_mode = "mixture";
    int synth_n = 1000;
    int synth_books = 3;
    int synth_pre_span = 90;
    int synth_span = 84;
};

std::set<std::string> split_words(const std::string& csv) {
    std::set<std::string> out;
    std::string cur;
    for (char c : csv) {
        if (c == ',') {
            if (!cur.empty()) out.insert(cur);
            cur.clear();
        } else if (c != ' ') {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) out.insert(cur);
    return out;
}

std::set<Category> parse_soft_categories(const std::string& csv) {
    std::set<Category> out;
    for (const auto& w : split_words(csv)) {
        Category c;
        if (!parse_category(w, c)) fail(Errc::config_error, "unknown category in soft list: " + w);
        out.insert(c);
    }
    return out;
}

Task parse_task_or_fail(const std::string& s) {
    Task t;
    if (!parse_task(s, t)) fail(Errc::config_error, "unknown task: " + s);
    return t;
}

ModelKind parse_kind_or_fail(const std::string& s) {
    ModelKind k;
    if (!parse_model_kind(s, k)) fail(Errc::config_error, "unknown model kind: " + s);
    return k;
}

PipelineConfig pipeline_config(const Options& o) {
    PipelineConfig cfg;
    if (!o.lemma.empty()) cfg.prep.lemmas = LemmaDictionary::load(o.lemma);
    if (!o.stopwords.empty()) {
        cfg.prep.stopwords = load_stopwords(o.stopwords);
        cfg.prep.filter = true; // filtering is opt-in by providing a list
    }
    cfg.custom.long_word_len = o.long_word_len;
    cfg.custom.repeat_run = o.repeat_run_len;
    cfg.custom.discussion_words = split_words(o.discussion_words);
    cfg.custom.identity_words = split_words(o.identity_words);
    cfg.custom.question_words = split_words(o.question_words);
    cfg.use_custom = o.custom_features == "on";
    cfg.train.nb_alpha = o.nb_alpha;
    cfg.train.lr_rate = o.lr_rate;
    cfg.train.lr_lambda = o.lr_lambda;
    cfg.train.lr_epochs = o.lr_epochs;
    cfg.train.lr_tol = o.lr_tol;
    cfg.train.svm_lambda = o.svm_lambda;
    cfg.train.svm_epochs = o.svm_epochs;
    cfg.train.svm_seed = o.seed;
    return cfg;
}

DriftParams drift_params(const Options& o) {
    DriftParams p;
    p.batch_size = o.batch_size;
    p.window = o.window;
    p.relevant_per_batch = o.batch_threshold;
    p.soft_categories = parse_soft_categories(o.soft_categories);
    p.inflation = o.inflation;
    return p;
}

std::vector<Story> load_stories(const std::string& dir) {
    if (!fs::is_directory(dir)) fail(Errc::io_error, "stories path is not a directory: " + dir);
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file()) files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    std::vector<Story> stories;
    for (const auto& p : files) {
        Story s;
        s.book_id = p.extension() == ".txt" ? p.stem().string() : p.filename().string();
        s.text = read_file(p.string());
        stories.push_back(std::move(s));
    }
    return stories;
}

void write_out(const fs::path& out_dir, const std::string& name, const std::string& content) {
    write_file((out_dir / name).string(), content);
}

std::vector<std::string> sorted_union(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    std::set<std::string> s(a.begin(), a.end());
    s.insert(b.begin(), b.end());
    return {s.begin(), s.end()};
}

// Shared by train (on its held-out split) and eval (on a full file).
void emit_report(const fs::path& out_dir, const LinearModel& model, const Preprocessor& prep, const Dataset& train,
                 const Dataset& test, const std::string& positive_class) {
    const auto y_true = labels_of(test, model.task);
    const auto y_pred = predict_dataset(model, test, prep);
    auto classes = sorted_union(model.classes, y_true);
    const auto cm = confusion(y_true, y_pred, classes);
    const auto rep = metrics(cm);
    write_out(out_dir, "metrics.txt", metrics_text(rep));
    write_out(out_dir, "metrics.csv", metrics_csv(rep));
    write_out(out_dir, "confusion.csv", confusion_csv(cm));
    write_out(out_dir, "confusion_normalized.csv", confusion_normalized_csv(cm));
    write_out(out_dir, "class_distribution.csv", class_distribution_csv(train, test, model.task));
    if (classes.size() == 2 &&
        std::find(model.classes.begin(), model.classes.end(), positive_class) != model.classes.end()) {
        std::vector<int> y01;
        std::vector<double> scores;
        y01.reserve(test.size());
        scores.reserve(test.size());
        for (const auto& m : test.messages) {
            y01.push_back(label_of(m, model.task) == positive_class ? 1 : 0);
            scores.push_back(positive_score(model, assemble_message(m, model.assembly, prep), positive_class));
        }
        const auto curve = roc_auc(y01, scores);
        write_out(out_dir, "roc.csv", roc_csv(curve));
        write_out(out_dir, "roc.svg", roc_svg(curve));
        std::cout << "auc(" << positive_class << ") = " << report_detail::num(curve.auc, "%.4f") << "\n";
    }
    std::cout << metrics_text(rep);
}

int cmd_train(const Options& o) {
    const Dataset all = load_csv(o.data);
    const std::size_t n_train =
        o.n_train > 0 ? static_cast<std::size_t>(o.n_train)
                      : static_cast<std::size_t>(static_cast<double>(all.size()) * o.train_fraction);
    auto [train, test] = split_random(all, n_train, o.seed);
    if (!o.stories.empty()) train = augment_with_stories(train, load_stories(o.stories), o.strict_stories);
    const PipelineConfig cfg = pipeline_config(o);
    const Task task = parse_task_or_fail(o.task);
    const LinearModel model = train_pipeline(train, task, parse_kind_or_fail(o.model), cfg);
    const fs::path out_dir(o.out);
    fs::create_directories(out_dir);
    save_model(model, (out_dir / "model.json").string());
    std::cout << "trained " << o.model << " on " << train.size() << " messages (" << test.size() << " held out)\n";
    if (!test.empty()) emit_report(out_dir, model, cfg.prep, train, test, o.positive_class);
    return 0;
}

int cmd_eval(const Options& o, bool task_given) {
    const LinearModel model = load_model(o.model_file);
    if (task_given && parse_task_or_fail(o.task) != model.task)
        fail(Errc::task_mismatch, "model was trained for task \"" + std::string(to_string(model.task)) +
                                      "\", not \"" + o.task + '"');
    const Dataset test = load_csv(o.data);
    const PipelineConfig cfg = pipeline_config(o);
    const fs::path out_dir(o.out);
    fs::create_directories(out_dir);
    emit_report(out_dir, model, cfg.prep, Dataset{}, test, o.positive_class);
    return 0;
}

int cmd_predict(const Options& o) {
    const LinearModel model = load_model(o.model_file);
    const Dataset data = load_csv(o.data);
    const PipelineConfig cfg = pipeline_config(o);
    const auto pred = predict_dataset(model, data, cfg.prep);
    std::vector<std::string> ids;
    ids.reserve(data.size());
    for (const auto& m : data.messages) ids.push_back(m.message_id);
    const fs::path out_dir(o.out);
    fs::create_directories(out_dir);
    write_out(out_dir, "predictions.jsonl", labels_jsonl(ids, model.task, pred));
    std::cout << "predicted " << pred.size() << " labels -> " << (out_dir / "predictions.jsonl").string() << "\n";
    return 0;
}

int cmd_stats(const Options& o, bool out_given) {
    const Dataset d = load_csv(o.data);
    InterventionMark mark;
    if (!parse_intervention_mark(o.intervention, mark)) fail(Errc::config_error, "unknown intervention mode: " + o.intervention);
    const RunStats s = run_stats(d, mark);
    std::cout << run_stats_text(s);
    std::optional<DriftParams> derived;
    try {
        derived = derive_params(s, o.inflation);
        std::cout << "derived batch_size = " << derived->batch_size << ", window = " << derived->window << "\n";
    } catch (const Error& e) {
        if (e.code() != Errc::missing_stats) throw;
        std::cout << "derived parameters unavailable: " << e.what() << "\n";
    }
    if (out_given) {
        const fs::path out_dir(o.out);
        fs::create_directories(out_dir);
        write_out(out_dir, "stats.txt", run_stats_text(s));
    }
    return 0;
}

int cmd_drift(const Options& o) {
    const Dataset all = load_csv(o.data);
    auto [train, stream] = split_chronological(all, o.train_fraction);
    DriftRunConfig cfg;
    cfg.relevance_pipe = pipeline_config(o);
    cfg.category_pipe = cfg.relevance_pipe;
    cfg.params = drift_params(o);
    cfg.derive_from_train = o.derive_params_flag;
    cfg.inflation = o.inflation;
    if (!parse_intervention_mark(o.intervention, cfg.mark)) fail(Errc::config_error, "unknown intervention mode: " + o.intervention);
    cfg.cv_folds = o.folds;
    cfg.cv_seed = o.seed;
    const DriftRunResult res = run_pipeline(train, stream, cfg);
    const fs::path out_dir(o.out);
    fs::create_directories(out_dir);
    write_out(out_dir, "stats.txt", run_stats_text(res.train_stats));
    write_out(out_dir, "drift_params.txt", drift_params_text(res.params, res.derived_params));
    write_out(out_dir, "cv_metrics.csv", cv_metrics_csv(res.cv_relevance, res.cv_category));
    write_out(out_dir, "alerts.jsonl", alerts_jsonl(res.alerts));
    write_out(out_dir, "predictions.jsonl", predictions_jsonl(res.predictions));
    std::cout << "train: " << train.size() << " messages, stream: " << stream.size() << " messages\n"
              << run_stats_text(res.train_stats) << drift_params_text(res.params, res.derived_params)
              << "cv svm relevance: acc " << report_detail::num(res.cv_relevance.mean_accuracy) << ", f1 "
              << report_detail::num(res.cv_relevance.mean_weighted_f1) << "\n"
              << "cv lr category:  acc " << report_detail::num(res.cv_category.mean_accuracy) << ", f1 "
              << report_detail::num(res.cv_category.mean_weighted_f1) << "\n"
              << "alerts: " << res.alerts.size() << "\n";
    for (const auto& a : res.alerts)
        std::cout << "  " << a.conversation << " batch " << a.batch_index << " seq [" << a.first_seq << ", "
                  << a.last_seq << "]\n";
    return 0;
}

int cmd_synth(const Options& o) {
    const fs::path out_dir(o.out);
    fs::create_directories(out_dir);
    const fs::path csv_path = out_dir / "corpus.csv";
    if (o.synth_mode == "mixture") {
        SynthSpec spec = default_synth_spec();
        spec.n_books = o.synth_books;
        const Dataset d = generate_synthetic(spec, o.synth_n, o.seed);
        save_csv(d, csv_path.string());
        std::cout << "wrote " << d.size() << " messages -> " << csv_path.string() << "\n";
    } else if (o.synth_mode == "drift") {
        DriftScenarioSpec spec;
        spec.n = o.synth_n;
        spec.train_fraction = o.train_fraction;
        spec.pre_span = o.synth_pre_span;
        spec.span = o.synth_span;
        const DriftScenario sc = generate_drift_scenario(spec, o.seed);
        save_csv(sc.data, csv_path.string());
        std::cout << "wrote " << sc.data.size() << " messages -> " << csv_path.string() << "\n";
        if (sc.span_first_seq >= 0)
            std::cout << "planted span: seq [" << sc.span_first_seq << ", " << sc.span_last_seq << "]\n";
    } else {
        fail(Errc::config_error, "unknown synth mode: " + o.synth_mode);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    Options o;
    CLI::App app{"text classification and conversation-drift toolkit"};
    app.fallthrough();
    app.require_subcommand(1);
    app.set_config("--config", "", "INI config file (key = value, # comments); flags override file values");
    app.allow_config_extras(false);

    app.add_option("--data", o.data, "input transcript CSV");
    app.add_option("--out", o.out, "output directory")->capture_default_str();
    auto* model_file_opt = app.add_option("--model-file", o.model_file, "trained model JSON (eval/predict)");
    app.add_option("--stories", o.stories, "directory of story texts for training augmentation");
    app.add_flag("--strict-stories", o.strict_stories, "error when a story matches no conversation");
    app.add_option("--lemma", o.lemma, "lemma dictionary TSV");
    app.add_option("--stopwords", o.stopwords, "stop-word list; providing one enables filtering");
    auto* task_opt = app.add_option("--task", o.task, "relevance|type|category")
                         ->check(CLI::IsMember({"relevance", "type", "category"}))
                         ->capture_default_str();
    app.add_option("--model", o.model, "nb|lr|svm")->check(CLI::IsMember({"nb", "lr", "svm"}))->capture_default_str();
    app.add_option("--custom-features", o.custom_features, "on|off")
        ->check(CLI::IsMember({"on", "off"}))
        ->capture_default_str();
    app.add_option("--positive-class", o.positive_class, "positive class for ROC output")->capture_default_str();
    app.add_option("--seed", o.seed, "seed for splits, shuffles and generation")->capture_default_str();
    app.add_option("--n-train", o.n_train, "training split size; 0 uses --train-fraction")->capture_default_str();
    app.add_option("--train-fraction", o.train_fraction, "train share (random split for train, chronological for drift)")
        ->capture_default_str();
    app.add_option("--folds", o.folds, "cross-validation folds")->capture_default_str();
    app.add_option("--nb-alpha", o.nb_alpha, "naive Bayes smoothing")->capture_default_str();
    app.add_option("--lr-rate", o.lr_rate, "logistic regression step size")->capture_default_str();
    app.add_option("--lr-lambda", o.lr_lambda, "logistic regression L2 strength")->capture_default_str();
    app.add_option("--lr-epochs", o.lr_epochs, "logistic regression epochs")->capture_default_str();
    app.add_option("--lr-tol", o.lr_tol, "logistic regression gradient-norm stop")->capture_default_str();
    app.add_option("--svm-lambda", o.svm_lambda, "svm regularization strength")->capture_default_str();
    app.add_option("--svm-epochs", o.svm_epochs, "svm passes over the data")->capture_default_str();
    app.add_option("--long-word-len", o.long_word_len, "long-word feature fires above this length")->capture_default_str();
    app.add_option("--repeat-run-len", o.repeat_run_len, "repeat-run feature fires at this run length")->capture_default_str();
    app.add_option("--discussion-words", o.discussion_words, "comma list")->capture_default_str();
    app.add_option("--identity-words", o.identity_words, "comma list")->capture_default_str();
    app.add_option("--question-words", o.question_words, "comma list")->capture_default_str();
    app.add_option("--batch-size", o.batch_size, "drift batch size B")->capture_default_str();
    app.add_option("--window", o.window, "drift window K in batches")->capture_default_str();
    app.add_option("--batch-threshold", o.batch_threshold, "relevant messages that keep a batch relevant")
        ->capture_default_str();
    app.add_option("--soft-categories", o.soft_categories, "categories counting as relevant when predicted non-relevant")
        ->capture_default_str();
    app.add_option("--inflation", o.inflation, "stat inflation for derived parameters")->capture_default_str();
    app.add_flag("--derive-params", o.derive_params_flag, "derive B/K from training run statistics instead of the pinned defaults");
    app.add_option("--intervention", o.intervention, "category-m|teacher-role")
        ->check(CLI::IsMember({"category-m", "m", "teacher-role", "teacher"}))
        ->capture_default_str();
    app.add_option("--synth-mode", o.synth_mode, "mixture|drift")
        ->check(CLI::IsMember({"mixture", "drift"}))
        ->capture_default_str();
    app.add_option("--synth-n", o.synth_n, "synthetic corpus size")->capture_default_str();
    app.add_option("--synth-books", o.synth_books, "synthetic mixture book count")->capture_default_str();
    app.add_option("--synth-pre-span", o.synth_pre_span, "stream messages before the planted span")->capture_default_str();
    app.add_option("--synth-span", o.synth_span, "planted span length (0 = control stream)")->capture_default_str();

    auto* sub_train = app.add_subcommand("train", "train a model and report on a held-out split");
    auto* sub_eval = app.add_subcommand("eval", "evaluate a saved model on a CSV");
    auto* sub_predict = app.add_subcommand("predict", "write per-message predictions as JSONL");
    auto* sub_drift = app.add_subcommand("drift", "chronological split, train, stream, detect drift");
    auto* sub_stats = app.add_subcommand("stats", "print run statistics of a transcript");
    auto* sub_synth = app.add_subcommand("synth", "generate a synthetic corpus");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2; // bad flags or config file
    }

    try {
        auto need = [&](const std::string& value, const char* what) {
            if (value.empty()) fail(Errc::config_error, std::string("missing required option: ") + what);
        };
        const fs::path out_dir(o.out);
        auto snapshot = [&] {
            fs::create_directories(out_dir);
            write_out(out_dir, "config_used.ini", app.config_to_str(true, false));
        };
        if (sub_train->parsed()) {
            need(o.data, "--data");
            snapshot();
            return cmd_train(o);
        }
        if (sub_eval->parsed()) {
            need(o.data, "--data");
            need(o.model_file, "--model-file");
            snapshot();
            return cmd_eval(o, task_opt->count() > 0);
        }
        if (sub_predict->parsed()) {
            need(o.data, "--data");
            need(o.model_file, "--model-file");
            snapshot();
            return cmd_predict(o);
        }
        if (sub_drift->parsed()) {
            need(o.data, "--data");
            snapshot();
            return cmd_drift(o);
        }
        if (sub_stats->parsed()) {
            need(o.data, "--data");
            return cmd_stats(o, app.count("--out") > 0);
        }
        if (sub_synth->parsed()) {
            snapshot();
            return cmd_synth(o);
        }
        (void)model_file_opt;
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        switch (e.cls()) {
            case ErrorClass::config: return 2;
            case ErrorClass::data: return 3;
            case ErrorClass::training: return 4;
            case ErrorClass::mismatch: return 5;
        }
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

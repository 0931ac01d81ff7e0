// Command-line front end: synth, train, predict, explain, evaluate.
//
// Exit codes: 0 success, 1 computational failure, 2 usage or validation
// error.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "cdaug/data.hpp"
#include "cdaug/explain.hpp"
#include "cdaug/metrics.hpp"
#include "cdaug/predict_pipeline.hpp"
#include "cdaug/serialize.hpp"
#include "cdaug/train_pipeline.hpp"

namespace fs = std::filesystem;
using namespace cdaug;

namespace {

struct TrainFlags {
    std::string model = "softmax_linear";
    std::size_t hidden = 128;
    std::size_t n1 = 20;
    std::size_t n2 = 10;
    std::size_t transforms = 50;
    double alpha = 0.1;
    double clip_ratio = 0.2;
    double segment_ratio = 0.1;
    double spread = 0.5;
    double lr = 1e-3;
    std::size_t batch = 256;
    std::size_t max_epochs = 500;
    std::size_t cawr_period = 50;
    double cawr_mult = 2.0;
    bool no_augment = false;
    bool no_cawr = false;
};

void add_train_flags(CLI::App* cmd, TrainFlags& f) {
    cmd->add_option("--model", f.model, "Reference model kind: softmax_linear or mlp")
        ->check(CLI::IsMember({"softmax_linear", "mlp"}));
    cmd->add_option("--hidden", f.hidden, "MLP hidden width");
    cmd->add_option("--n1", f.n1, "Transforms drawn per training epoch");
    cmd->add_option("--n2", f.n2, "Variants voted at prediction");
    cmd->add_option("--transforms", f.transforms, "Frozen transform set size");
    cmd->add_option("--alpha", f.alpha, "Jitter noise magnitude center");
    cmd->add_option("--clip-ratio", f.clip_ratio, "Clip ratio center");
    cmd->add_option("--segment-ratio", f.segment_ratio, "SegmentOut ratio center");
    cmd->add_option("--spread", f.spread, "Relative parameter range around the centers");
    cmd->add_option("--lr", f.lr, "Initial learning rate");
    cmd->add_option("--batch", f.batch, "Minibatch size");
    cmd->add_option("--max-epochs", f.max_epochs, "Epoch cap");
    cmd->add_option("--cawr-period", f.cawr_period, "Initial CAWR restart period (= patience)");
    cmd->add_option("--cawr-mult", f.cawr_mult, "CAWR period multiplier");
    cmd->add_flag("--no-augment", f.no_augment, "Train without augmentation");
    cmd->add_flag("--no-cawr", f.no_cawr, "Constant learning rate instead of CAWR");
}

CompetitiveConfig to_config(const TrainFlags& f, std::uint64_t seed) {
    CompetitiveConfig cfg;
    cfg.n1 = f.n1;
    cfg.n2 = f.n2;
    cfg.transform_set_size = f.transforms;
    cfg.model_kind = f.model == "mlp" ? ModelKind::Mlp : ModelKind::SoftmaxLinear;
    cfg.mlp_hidden = f.hidden;
    cfg.augment = !f.no_augment;
    cfg.train.lr0 = f.lr;
    cfg.train.batch = f.batch;
    cfg.train.max_epochs = f.max_epochs;
    cfg.train.cawr_period = f.cawr_period;
    cfg.train.cawr_mult = f.cawr_mult;
    cfg.train.patience = f.cawr_period;
    cfg.train.use_cawr = !f.no_cawr;
    cfg.train.seed = seed;
    cfg.set_cfg.alpha_center = f.alpha;
    cfg.set_cfg.clip_ratio_center = f.clip_ratio;
    cfg.set_cfg.segment_ratio_center = f.segment_ratio;
    cfg.set_cfg.spread = f.spread;
    return cfg;
}

int run_synth(const std::string& config_path, const std::string& out_dir,
              std::uint64_t seed) {
    SyntheticSpec spec;
    if (!config_path.empty()) spec = synthetic_spec_from_text(read_text_file(config_path));
    validate_synthetic_spec(spec);
    SeededRng rng(seed);
    const Corpus corpus = synthetic_corpus(spec, rng);
    write_csv_corpus(corpus, out_dir);
    // Ground-truth plant metadata rides along with the corpus.
    write_text_file(fs::path(out_dir) / "spec.json", to_text(spec));
    std::size_t windows = 0;
    for (const Recording& rec : corpus.recordings) windows += rec.length() / spec.timesteps;
    std::cout << "wrote " << corpus.recordings.size() << " recordings (" << windows
              << " windows) to " << out_dir << "\n";
    return 0;
}

int run_train(const std::string& corpus_path, const std::string& out_path,
              const std::string& log_path, const TrainFlags& flags, std::size_t window_len,
              double overlap, std::uint64_t seed) {
    const Corpus corpus = load_csv_corpus(corpus_path);
    const Dataset all = windows_from_corpus(corpus, window_len, overlap);
    const auto [train, val] = stratified_val_split(all);
    const CompetitiveConfig cfg = to_config(flags, seed);
    SeededRng rng(seed);
    const TrainOutcome outcome = train_competitive(train, val, cfg, rng);
    write_text_file(out_path, to_text(outcome.artifact));
    const std::string log_file = log_path.empty() ? out_path + ".log" : log_path;
    write_text_file(log_file, train_log_to_text(outcome.log));
    std::cout << "artifact written to " << out_path << " (best epoch "
              << outcome.log.best_epoch << ", " << outcome.log.entries.size()
              << " epochs run)\n";
    return 0;
}

int run_predict(const std::string& artifact_path, const std::string& corpus_path,
                const std::string& out_path, std::size_t n2, bool no_tta,
                std::size_t window_len, double overlap, std::uint64_t seed) {
    const ModelArtifact artifact = artifact_from_text(read_text_file(artifact_path));
    validate_artifact(artifact);
    const Corpus corpus = load_csv_corpus(corpus_path);
    const Dataset data = windows_from_corpus(corpus, window_len, overlap);
    if (data.empty()) raise(ErrorCode::EmptyDataset, "corpus produced no windows");

    std::vector<Window> windows;
    windows.reserve(data.size());
    for (const LabeledWindow& lw : data.windows) windows.push_back(lw.window);

    const std::size_t variants = no_tta ? 0 : n2;
    const std::vector<VoteRecord> records =
        tta_predict_batch(artifact, windows, variants, seed);

    std::string out;
    std::vector<int> pred, truth;
    for (std::size_t i = 0; i < records.size(); ++i) {
        VoteRow row;
        row.index = i;
        row.truth = data.windows[i].label;
        row.vote = records[i];
        out += vote_row_to_line(row);
        out += '\n';
        pred.push_back(records[i].final_prediction);
        truth.push_back(data.windows[i].label);
    }
    write_text_file(out_path, out);

    const MacroF1Detail detail =
        macro_f1_detail(confusion_matrix(pred, truth, data.class_count()));
    for (std::size_t c = 0; c < detail.degenerate.size(); ++c)
        if (detail.degenerate[c])
            std::cerr << "warning: class " << c << " has no support and no predictions\n";
    char line[64];
    std::snprintf(line, sizeof(line), "macro_f1 %.6f\n", detail.value);
    std::cout << "rows " << records.size() << "\n" << line;
    return 0;
}

int run_explain(const std::string& artifact_path, const std::string& corpus_path,
                long long window_index, const std::string& out_prefix,
                const ExplainConfig& cfg, std::size_t window_len, double overlap,
                std::uint64_t seed) {
    const ModelArtifact artifact = artifact_from_text(read_text_file(artifact_path));
    validate_artifact(artifact);
    const Corpus corpus = load_csv_corpus(corpus_path);
    const Dataset data = windows_from_corpus(corpus, window_len, overlap);
    if (window_index < 0 || static_cast<std::size_t>(window_index) >= data.size())
        raise(ErrorCode::BadConfig, "window index " + std::to_string(window_index) +
                                        " out of range, corpus has " +
                                        std::to_string(data.size()) + " windows");

    const Window& w = data.windows[static_cast<std::size_t>(window_index)].window;
    SeededRng rng(seed);
    const Explanation e = explain(artifact, w, cfg, rng);
    write_text_file(out_prefix + ".json", to_text(e));
    write_text_file(out_prefix + ".svg", render_svg(e, w));
    std::cout << "explained window " << window_index << ": predicted class "
              << e.predicted_class << " ("
              << artifact.class_names[static_cast<std::size_t>(e.predicted_class)] << "), "
              << e.sufficient_segments.size() << " sufficient segment(s), "
              << e.n_variants_used << " probe evaluations\n";
    return 0;
}

struct EvalTask {
    std::string scenario;
    std::size_t fold_index = 0;
    std::uint64_t seed = 0;
};

struct EvalRow {
    std::string scenario;
    std::string fold;
    std::uint64_t seed = 0;
    double macro = 0.0;
};

int run_evaluate(const std::string& corpus_path, const std::string& out_path,
                 std::vector<std::string> scenarios, std::size_t seeds, std::size_t jobs,
                 const TrainFlags& flags, std::size_t window_len, double train_overlap,
                 double test_overlap, const std::string& name_override) {
    const Corpus corpus = load_csv_corpus(corpus_path);
    const std::vector<LosoFold> folds =
        loso_folds_from_corpus(corpus, window_len, train_overlap, test_overlap);

    if (scenarios.empty()) scenarios = {"Base", "DAug", "CAWR", "Opti"};
    std::vector<EvalTask> tasks;
    for (const std::string& scenario : scenarios)
        for (std::size_t f = 0; f < folds.size(); ++f)
            for (std::uint64_t seed = 1; seed <= seeds; ++seed)
                tasks.push_back({scenario, f, seed});

    std::vector<EvalRow> rows(tasks.size());
    std::atomic<std::size_t> next{0};
    std::mutex io_mutex;

    const auto worker = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= tasks.size()) return;
            const EvalTask& task = tasks[i];
            const LosoFold& fold = folds[task.fold_index];

            TrainFlags scenario_flags = flags;
            scenario_flags.no_augment = task.scenario == "Base" || task.scenario == "CAWR";
            scenario_flags.no_cawr = task.scenario == "Base" || task.scenario == "DAug";
            const bool tta = task.scenario == "Opti";

            const CompetitiveConfig cfg = to_config(scenario_flags, task.seed);
            SeededRng rng(mix64(task.seed, task.fold_index));
            const TrainOutcome outcome = train_competitive(fold.train, fold.val, cfg, rng);

            std::vector<int> pred, truth;
            truth.reserve(fold.test.size());
            for (const LabeledWindow& lw : fold.test.windows) truth.push_back(lw.label);
            if (tta) {
                std::vector<Window> windows;
                windows.reserve(fold.test.size());
                for (const LabeledWindow& lw : fold.test.windows)
                    windows.push_back(lw.window);
                const auto records = tta_predict_batch(outcome.artifact, windows, cfg.n2,
                                                       mix64(task.seed, 977));
                for (const VoteRecord& r : records) pred.push_back(r.final_prediction);
            } else {
                for (const LabeledWindow& lw : fold.test.windows)
                    pred.push_back(artifact_predict_class(outcome.artifact, lw.window));
            }
            const double macro =
                macro_f1(confusion_matrix(pred, truth, fold.test.class_count()));
            rows[i] = {task.scenario, fold.held_out_subject, task.seed, macro};

            std::lock_guard<std::mutex> lock(io_mutex);
            std::cerr << task.scenario << " fold=" << fold.held_out_subject
                      << " seed=" << task.seed << " macro_f1=" << macro << "\n";
        }
    };

    const std::size_t n_workers = std::max<std::size_t>(
        1, std::min({jobs, tasks.size(),
                     static_cast<std::size_t>(std::thread::hardware_concurrency())}));
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < n_workers; ++i) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();

    const std::string dataset_name =
        name_override.empty() ? fs::path(corpus_path).parent_path().filename().string()
                              : name_override;
    std::string table = "dataset\tmodel\tscenario\tfold\tseed\tmacro_f1\n";
    char buf[256];
    for (const EvalRow& row : rows) {
        std::snprintf(buf, sizeof(buf), "%s\t%s\t%s\t%s\t%llu\t%.6f\n", dataset_name.c_str(),
                      flags.model.c_str(), row.scenario.c_str(), row.fold.c_str(),
                      static_cast<unsigned long long>(row.seed), row.macro);
        table += buf;
    }
    write_text_file(out_path, table);

    // Per-scenario summary: mean over folds per seed, then mean/std over
    // seeds.
    std::cout << "scenario mean_macro_f1 std_over_seeds\n";
    for (const std::string& scenario : scenarios) {
        std::vector<double> per_seed;
        for (std::uint64_t seed = 1; seed <= seeds; ++seed) {
            double sum = 0.0;
            std::size_t count = 0;
            for (const EvalRow& row : rows)
                if (row.scenario == scenario && row.seed == seed) {
                    sum += row.macro;
                    ++count;
                }
            if (count > 0) per_seed.push_back(sum / static_cast<double>(count));
        }
        double mean = 0.0;
        for (double v : per_seed) mean += v;
        mean /= static_cast<double>(per_seed.size());
        double var = 0.0;
        for (double v : per_seed) var += (v - mean) * (v - mean);
        var /= static_cast<double>(per_seed.size());
        std::snprintf(buf, sizeof(buf), "%s %.6f %.6f\n", scenario.c_str(), mean,
                      std::sqrt(var));
        std::cout << buf;
    }
    return 0;
}

bool is_validation_error(ErrorCode code) {
    switch (code) {
        case ErrorCode::DivergedLoss:
            return false;
        default:
            return true;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Competitive data augmentation for time-series classifiers"};
    app.require_subcommand(1);

    // synth
    std::string synth_config, synth_out;
    std::uint64_t synth_seed = 1;
    CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic interchange corpus");
    synth->add_option("--config", synth_config,
                      "Synthetic spec document (defaults to the built-in spec)");
    synth->add_option("--out", synth_out, "Output directory")->required();
    synth->add_option("--seed", synth_seed, "Generator seed");

    // train
    std::string train_corpus, train_out, train_log;
    TrainFlags train_flags;
    std::size_t train_window = 96;
    double train_overlap = 0.0;
    std::uint64_t train_seed = 1;
    CLI::App* train = app.add_subcommand("train", "Train a competitive-augmentation artifact");
    train->add_option("--corpus", train_corpus, "Corpus manifest path")->required();
    train->add_option("--out", train_out, "Artifact output path")->required();
    train->add_option("--log", train_log, "Training log path (default: <out>.log)");
    add_train_flags(train, train_flags);
    train->add_option("--window-len", train_window, "Window length in timesteps");
    train->add_option("--overlap", train_overlap, "Sliding-window overlap in [0,1)");
    train->add_option("--seed", train_seed, "Training seed");

    // predict
    std::string pred_artifact, pred_corpus, pred_out;
    std::size_t pred_n2 = 10;
    bool pred_no_tta = false;
    std::size_t pred_window = 96;
    double pred_overlap = 0.0;
    std::uint64_t pred_seed = 1;
    CLI::App* predict = app.add_subcommand("predict", "Vote-based prediction over a corpus");
    predict->add_option("--artifact", pred_artifact, "Artifact path")->required();
    predict->add_option("--corpus", pred_corpus, "Corpus manifest path")->required();
    predict->add_option("--out", pred_out, "Vote record output (one JSON per line)")
        ->required();
    predict->add_option("--n2", pred_n2, "Variants per window");
    predict->add_flag("--no-tta", pred_no_tta, "Plain predictions, no augmentation voting");
    predict->add_option("--window-len", pred_window, "Window length in timesteps");
    predict->add_option("--overlap", pred_overlap, "Sliding-window overlap in [0,1)");
    predict->add_option("--seed", pred_seed, "Variant-draw seed");

    // explain
    std::string exp_artifact, exp_corpus, exp_prefix;
    long long exp_index = 0;
    ExplainConfig exp_cfg;
    std::size_t exp_window = 96;
    double exp_overlap = 0.0;
    std::uint64_t exp_seed = 1;
    CLI::App* explain_cmd = app.add_subcommand("explain", "Explain one window's prediction");
    explain_cmd->add_option("--artifact", exp_artifact, "Artifact path")->required();
    explain_cmd->add_option("--corpus", exp_corpus, "Corpus manifest path")->required();
    explain_cmd->add_option("--window", exp_index, "Window index within the corpus")
        ->required();
    explain_cmd->add_option("--out-prefix", exp_prefix, "Writes <prefix>.json and <prefix>.svg")
        ->required();
    explain_cmd->add_option("--probes", exp_cfg.occlusion_probes, "Occlusion probe budget");
    explain_cmd->add_option("--seg-ratio", exp_cfg.seg_ratio, "Occlusion length fraction");
    explain_cmd->add_option("--sufficiency-ratio", exp_cfg.sufficiency_ratio,
                            "Keep-only length fraction");
    explain_cmd->add_option("--bands", exp_cfg.band_count, "Frequency band count");
    explain_cmd->add_option("--trials", exp_cfg.trials_per_band, "Jitter trials per band");
    explain_cmd->add_option("--band-alpha", exp_cfg.band_alpha, "Band jitter magnitude");
    explain_cmd->add_option("--window-len", exp_window, "Window length in timesteps");
    explain_cmd->add_option("--overlap", exp_overlap, "Sliding-window overlap in [0,1)");
    explain_cmd->add_option("--seed", exp_seed, "Probe seed");

    // evaluate
    std::string eval_corpus, eval_out, eval_name;
    std::vector<std::string> eval_scenarios;
    std::size_t eval_seeds = 5, eval_jobs = 2;
    TrainFlags eval_flags;
    std::size_t eval_window = 96;
    double eval_train_overlap = 0.0, eval_test_overlap = 0.0;
    CLI::App* evaluate = app.add_subcommand(
        "evaluate", "LOSO ablation over the Base/DAug/CAWR/Opti scenarios");
    evaluate->add_option("--corpus", eval_corpus, "Corpus manifest path")->required();
    evaluate->add_option("--out", eval_out, "Results table (TSV)")->required();
    evaluate->add_option("--scenario", eval_scenarios, "Subset of scenarios to run")
        ->check(CLI::IsMember({"Base", "DAug", "CAWR", "Opti"}));
    evaluate->add_option("--seeds", eval_seeds, "Number of seeds (1..N)");
    evaluate->add_option("--jobs", eval_jobs, "Concurrent fold workers");
    add_train_flags(evaluate, eval_flags);
    evaluate->add_option("--window-len", eval_window, "Window length in timesteps");
    evaluate->add_option("--train-overlap", eval_train_overlap, "Train/val window overlap");
    evaluate->add_option("--test-overlap", eval_test_overlap, "Test window overlap");
    evaluate->add_option("--name", eval_name, "Dataset name for the results table");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (synth->parsed()) return run_synth(synth_config, synth_out, synth_seed);
        if (train->parsed())
            return run_train(train_corpus, train_out, train_log, train_flags, train_window,
                             train_overlap, train_seed);
        if (predict->parsed())
            return run_predict(pred_artifact, pred_corpus, pred_out, pred_n2, pred_no_tta,
                               pred_window, pred_overlap, pred_seed);
        if (explain_cmd->parsed())
            return run_explain(exp_artifact, exp_corpus, exp_index, exp_prefix, exp_cfg,
                               exp_window, exp_overlap, exp_seed);
        if (evaluate->parsed())
            return run_evaluate(eval_corpus, eval_out, eval_scenarios, eval_seeds, eval_jobs,
                                eval_flags, eval_window, eval_train_overlap,
                                eval_test_overlap, eval_name);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return is_validation_error(e.code()) ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

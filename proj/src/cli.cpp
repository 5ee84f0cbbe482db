#include "triage/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "triage/checkpoint.hpp"
#include "triage/corpus.hpp"
#include "triage/ensemble.hpp"
#include "triage/errors.hpp"
#include "triage/metrics.hpp"
#include "triage/report.hpp"
#include "triage/training.hpp"

namespace triage {

namespace {

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ValidationError("cannot open file for writing: " + path);
    }
    out << content;
    if (!out.flush()) {
        throw ValidationError("write failed: " + path);
    }
}

std::string run_name(const std::string& path) {
    return std::filesystem::path(path).stem().string();
}

Ontology load_ontology(const std::string& labels_path) {
    return labels_path.empty() ? Ontology::defaults() : Ontology::from_file(labels_path);
}

std::vector<double> parse_double_list(const std::string& csv) {
    std::vector<double> values;
    std::stringstream stream(csv);
    std::string item;
    while (std::getline(stream, item, ',')) {
        try {
            values.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw ValidationError("bad numeric list entry '" + item + "'");
        }
    }
    return values;
}

std::vector<std::size_t> parse_size_list(const std::string& csv) {
    std::vector<std::size_t> values;
    std::stringstream stream(csv);
    std::string item;
    while (std::getline(stream, item, ',')) {
        try {
            values.push_back(std::stoul(item));
        } catch (const std::exception&) {
            throw ValidationError("bad integer list entry '" + item + "'");
        }
    }
    return values;
}

struct TrainFlags {
    std::string gold, config, out, history, labels;
    double dev_ratio = 0.1;
    // hyperparameter overrides; only applied when the flag was given
    double lambda = 0.0, lr = 0.0, warmup_ratio = 0.0;
    std::uint64_t seed = 0;
    std::size_t batch_size = 0, epochs = 0, eval_every_steps = 0;
    std::size_t d_model = 0, n_layers = 0, n_heads = 0, d_ff = 0, vocab_size = 0, max_len = 0;
};

void add_hyper_flags(CLI::App* cmd, TrainFlags& flags) {
    cmd->add_option("--lambda", flags.lambda, "Information-type loss weight");
    cmd->add_option("--lr", flags.lr, "Base learning rate");
    cmd->add_option("--batch_size", flags.batch_size, "Mini-batch size");
    cmd->add_option("--epochs", flags.epochs, "Training epochs");
    cmd->add_option("--warmup_ratio", flags.warmup_ratio, "Warmup fraction of total steps");
    cmd->add_option("--eval_every_steps", flags.eval_every_steps, "Dev evaluation cadence");
    cmd->add_option("--seed", flags.seed, "Random seed (split, init, shuffling)");
    cmd->add_option("--d_model", flags.d_model, "Hidden width");
    cmd->add_option("--n_layers", flags.n_layers, "Encoder layers");
    cmd->add_option("--n_heads", flags.n_heads, "Attention heads");
    cmd->add_option("--d_ff", flags.d_ff, "Feed-forward width");
    cmd->add_option("--vocab_size", flags.vocab_size, "Vocabulary size limit");
    cmd->add_option("--max_len", flags.max_len, "Maximum sequence length");
}

FileConfig resolve_config(const CLI::App* cmd, const TrainFlags& flags) {
    FileConfig config;
    if (!flags.config.empty()) {
        config = parse_train_config(flags.config);
    }
    auto given = [&](const char* name) { return cmd->count(name) > 0; };
    if (given("--lambda")) config.train.lambda = flags.lambda;
    if (given("--lr")) config.train.lr = flags.lr;
    if (given("--batch_size")) config.train.batch_size = flags.batch_size;
    if (given("--epochs")) config.train.epochs = flags.epochs;
    if (given("--warmup_ratio")) config.train.warmup_ratio = flags.warmup_ratio;
    if (given("--eval_every_steps")) config.train.eval_every_steps = flags.eval_every_steps;
    if (given("--seed")) config.train.seed = flags.seed;
    if (given("--d_model")) config.model.d_model = flags.d_model;
    if (given("--n_layers")) config.model.n_layers = flags.n_layers;
    if (given("--n_heads")) config.model.n_heads = flags.n_heads;
    if (given("--d_ff")) config.model.d_ff = flags.d_ff;
    if (given("--vocab_size")) config.model.vocab_size = flags.vocab_size;
    if (given("--max_len")) config.model.max_len = flags.max_len;
    return config;
}

int cmd_train(const CLI::App* cmd, const TrainFlags& flags) {
    FileConfig config = resolve_config(cmd, flags);
    Ontology ontology = load_ontology(flags.labels);
    config.model.n_types = ontology.size();

    auto gold = load_gold(flags.gold, ontology);
    CorpusSplit split = split_train_dev(gold, flags.dev_ratio, config.train.seed);
    std::cerr << "training on " << split.train.size() << " examples, " << split.dev.size()
              << " held out\n";

    TrainResult result = train(config.model, config.train, split.train, split.dev, ontology);
    save_checkpoint(result.params, result.vocab, flags.out);
    if (!flags.history.empty()) {
        write_history_csv(result.history, flags.history);
    }
    std::cerr << "finished " << result.history.total_steps << " steps; checkpoint from step "
              << result.history.best_step << " -> " << flags.out << "\n";
    return 0;
}

int cmd_predict(const std::string& checkpoint_path, const std::string& input_path,
                const std::string& out_path, const std::string& labels) {
    Checkpoint checkpoint = load_checkpoint(checkpoint_path);
    Ontology ontology = load_ontology(labels);
    auto tweets = load_tweets(input_path);
    auto run = predict_run(checkpoint.params, checkpoint.vocab, tweets, ontology);
    write_run(run, out_path);
    return 0;
}

int cmd_ensemble(const std::vector<std::string>& run_paths, const std::string& types,
                 const std::string& priority, const std::string& out_path,
                 const std::string& labels) {
    if (run_paths.size() < 2) {
        throw ValidationError("ensemble requires at least two run files");
    }
    Ontology ontology = load_ontology(labels);
    EnsembleConfig config;
    config.types = parse_type_strategy(types);
    config.priority = parse_priority_strategy(priority);
    std::vector<std::vector<RunRecord>> members;
    members.reserve(run_paths.size());
    for (const auto& path : run_paths) {
        members.push_back(load_run(path, ontology));
    }
    write_run(ensemble_runs(members, config), out_path);
    return 0;
}

int cmd_eval(const std::string& run_path, const std::string& gold_path,
             const std::string& out_path, const std::string& per_event_path,
             const std::string& markdown_path, const std::string& labels, std::size_t k,
             bool lenient) {
    Ontology ontology = load_ontology(labels);
    auto run = load_run(run_path, ontology);
    auto gold = load_gold(gold_path, ontology);
    EvalOptions options;
    options.ndcg_k = k;
    options.lenient = lenient;
    MetricReport report = evaluate_all(run, gold, ontology, options);

    const std::string csv = metric_report_csv(report);
    if (out_path.empty()) {
        std::cout << csv;
    } else {
        write_text_file(out_path, csv);
    }
    if (!per_event_path.empty()) {
        std::ostringstream out;
        out << "event,ndcg,aw_hc,aw_a,cf1_h,cf1_a,cacc,perr_h,perr_a,harm\n";
        for (const auto& [event_id, event_report] : evaluate_per_event(run, gold, ontology,
                                                                       options)) {
            std::string row = metric_report_csv(event_report);
            out << event_id << ',' << row.substr(row.find('\n') + 1);
        }
        write_text_file(per_event_path, out.str());
    }
    if (!markdown_path.empty()) {
        write_text_file(markdown_path, render_report_markdown({{run_name(run_path), report}}));
    }
    return 0;
}

int cmd_gridsearch(const CLI::App* cmd, const TrainFlags& flags, const std::string& lr_grid_csv,
                   const std::string& bs_grid_csv, const std::string& out_path) {
    FileConfig config = resolve_config(cmd, flags);
    Ontology ontology = load_ontology(flags.labels);
    config.model.n_types = ontology.size();

    auto gold = load_gold(flags.gold, ontology);
    CorpusSplit split = split_train_dev(gold, flags.dev_ratio, config.train.seed);

    std::vector<double> lr_grid = kDefaultLrGrid;
    if (!lr_grid_csv.empty()) {
        lr_grid = parse_double_list(lr_grid_csv);
    }
    std::vector<std::size_t> bs_grid = kDefaultBatchGrid;
    if (!bs_grid_csv.empty()) {
        bs_grid = parse_size_list(bs_grid_csv);
    }

    auto cells = grid_search(config.model, config.train, split.train, split.dev, lr_grid,
                             bs_grid, ontology);
    write_grid_csv(cells, out_path);
    return 0;
}

int cmd_report(const std::vector<std::string>& run_paths, const std::string& gold_path,
               const std::string& out_path, const std::string& format,
               const std::string& labels, std::size_t k, bool lenient) {
    Ontology ontology = load_ontology(labels);
    auto gold = load_gold(gold_path, ontology);
    EvalOptions options;
    options.ndcg_k = k;
    options.lenient = lenient;

    NamedReports reports;
    for (const auto& path : run_paths) {
        auto run = load_run(path, ontology);
        reports.emplace_back(run_name(path), evaluate_all(run, gold, ontology, options));
    }
    std::string rendered;
    if (format == "markdown") {
        rendered = render_report_markdown(reports);
    } else if (format == "csv") {
        rendered = render_report_csv(reports);
    } else {
        throw ValidationError("unknown report format '" + format + "' (expected csv|markdown)");
    }
    if (out_path.empty()) {
        std::cout << rendered;
    } else {
        write_text_file(out_path, rendered);
    }
    return 0;
}

} // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"Crisis tweet triage: multi-task training, ensembling and evaluation"};
    app.require_subcommand(1);

    // train
    TrainFlags train_flags;
    CLI::App* train_cmd = app.add_subcommand("train", "Train a model and write a checkpoint");
    train_cmd->add_option("--gold", train_flags.gold, "Gold training file")->required();
    train_cmd->add_option("--out", train_flags.out, "Checkpoint output path")->required();
    train_cmd->add_option("--config", train_flags.config, "Training config file");
    train_cmd->add_option("--history", train_flags.history, "Training history CSV output");
    train_cmd->add_option("--dev-ratio", train_flags.dev_ratio,
                          "Fraction held out for model selection");
    train_cmd->add_option("--labels", train_flags.labels, "Ontology override file");
    add_hyper_flags(train_cmd, train_flags);

    // predict
    std::string predict_checkpoint, predict_input, predict_out, predict_labels;
    CLI::App* predict_cmd = app.add_subcommand("predict", "Write a run file for input tweets");
    predict_cmd->add_option("--checkpoint", predict_checkpoint, "Model checkpoint")->required();
    predict_cmd->add_option("--gold", predict_input, "Input tweets (gold or bare text lines)")
        ->required();
    predict_cmd->add_option("--out", predict_out, "Run file output path")->required();
    predict_cmd->add_option("--labels", predict_labels, "Ontology override file");

    // ensemble
    std::vector<std::string> ensemble_runs_paths;
    std::string ensemble_types = "union", ensemble_priority = "highest", ensemble_out,
                ensemble_labels;
    CLI::App* ensemble_cmd = app.add_subcommand("ensemble", "Merge member runs into one run");
    ensemble_cmd->add_option("runs", ensemble_runs_paths, "Member run files (2+)")->required();
    ensemble_cmd->add_option("--types", ensemble_types, "union|intersection");
    ensemble_cmd->add_option("--priority", ensemble_priority, "highest|average|lowest");
    ensemble_cmd->add_option("--out", ensemble_out, "Merged run output path")->required();
    ensemble_cmd->add_option("--labels", ensemble_labels, "Ontology override file");

    // eval
    std::string eval_run, eval_gold, eval_out, eval_per_event, eval_markdown, eval_labels;
    std::size_t eval_k = 100;
    bool eval_lenient = false;
    CLI::App* eval_cmd = app.add_subcommand("eval", "Score a run against gold labels");
    eval_cmd->add_option("--run", eval_run, "Run file")->required();
    eval_cmd->add_option("--gold", eval_gold, "Gold file")->required();
    eval_cmd->add_option("--out", eval_out, "Metric CSV output (stdout when omitted)");
    eval_cmd->add_option("--per-event", eval_per_event, "Per-event breakdown CSV");
    eval_cmd->add_option("--markdown", eval_markdown, "Markdown table output");
    eval_cmd->add_option("--labels", eval_labels, "Ontology override file");
    eval_cmd->add_option("--k", eval_k, "NDCG cutoff");
    eval_cmd->add_flag("--lenient", eval_lenient,
                       "Treat missing tweets as no types, priority 0");

    // gridsearch
    TrainFlags grid_flags;
    std::string grid_lr_csv, grid_bs_csv, grid_out;
    CLI::App* grid_cmd = app.add_subcommand("gridsearch",
                                            "Train every (lr, batch size) cell and rank by "
                                            "dev harmonic mean");
    grid_cmd->add_option("--gold", grid_flags.gold, "Gold training file")->required();
    grid_cmd->add_option("--out", grid_out, "Results CSV output")->required();
    grid_cmd->add_option("--config", grid_flags.config, "Training config file");
    grid_cmd->add_option("--dev-ratio", grid_flags.dev_ratio,
                         "Fraction held out for model selection");
    grid_cmd->add_option("--labels", grid_flags.labels, "Ontology override file");
    grid_cmd->add_option("--lr-grid", grid_lr_csv, "Comma-separated learning rates");
    grid_cmd->add_option("--bs-grid", grid_bs_csv, "Comma-separated batch sizes");
    add_hyper_flags(grid_cmd, grid_flags);

    // report
    std::vector<std::string> report_runs;
    std::string report_gold, report_out, report_format = "markdown", report_labels;
    std::size_t report_k = 100;
    bool report_lenient = false;
    CLI::App* report_cmd = app.add_subcommand("report", "Tabulate several runs side by side");
    report_cmd->add_option("runs", report_runs, "Run files (1+)")->required();
    report_cmd->add_option("--gold", report_gold, "Gold file")->required();
    report_cmd->add_option("--out", report_out, "Output path (stdout when omitted)");
    report_cmd->add_option("--format", report_format, "csv|markdown");
    report_cmd->add_option("--labels", report_labels, "Ontology override file");
    report_cmd->add_option("--k", report_k, "NDCG cutoff");
    report_cmd->add_flag("--lenient", report_lenient,
                         "Treat missing tweets as no types, priority 0");

    try {
        app.parse(argc, const_cast<char**>(argv));
    } catch (const CLI::CallForHelp& e) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n\n" << app.help() << '\n';
        return 1;
    }

    try {
        if (train_cmd->parsed()) {
            return cmd_train(train_cmd, train_flags);
        }
        if (predict_cmd->parsed()) {
            return cmd_predict(predict_checkpoint, predict_input, predict_out, predict_labels);
        }
        if (ensemble_cmd->parsed()) {
            return cmd_ensemble(ensemble_runs_paths, ensemble_types, ensemble_priority,
                                ensemble_out, ensemble_labels);
        }
        if (eval_cmd->parsed()) {
            return cmd_eval(eval_run, eval_gold, eval_out, eval_per_event, eval_markdown,
                            eval_labels, eval_k, eval_lenient);
        }
        if (grid_cmd->parsed()) {
            return cmd_gridsearch(grid_cmd, grid_flags, grid_lr_csv, grid_bs_csv, grid_out);
        }
        if (report_cmd->parsed()) {
            return cmd_report(report_runs, report_gold, report_out, report_format,
                              report_labels, report_k, report_lenient);
        }
        std::cerr << app.help();
        return 1;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 2;
    }
}

} // namespace triage

// faast: flow-augmented AST clone detection toolkit, single CLI entry point.
//
// Subcommands: graph | synth | train | tune | eval | predict | attention.
// Exit codes: 0 ok, 1 usage/config, 2 data error, 3 runtime/numeric error.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "faast/checkpoint.hpp"
#include "faast/dataset.hpp"
#include "faast/errors.hpp"
#include "faast/flow_graph.hpp"
#include "faast/io_util.hpp"
#include "faast/java_parser.hpp"
#include "faast/metrics.hpp"
#include "faast/pipeline.hpp"

namespace {

using faast::Error;
using faast::ErrorCode;
using nlohmann::json;

int exit_code_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::Config:
            return 1;
        case ErrorCode::Parse:
        case ErrorCode::Granularity:
        case ErrorCode::Io:
        case ErrorCode::DuplicateId:
        case ErrorCode::UnknownFragment:
        case ErrorCode::EmptyCorpus:
        case ErrorCode::EmptyDataset:
        case ErrorCode::MissingTypeTags:
        case ErrorCode::SingleClass:
        case ErrorCode::DegenerateValidation:
        case ErrorCode::ModelKindMismatch:
        case ErrorCode::LengthMismatch:
            return 2;
        default:
            return 3;
    }
}

void echo_config(const std::string& command, const json& resolved) {
    std::cerr << "[faast] " << command << " config: " << resolved.dump() << "\n";
}

faast::Granularity parse_granularity(const std::string& g) {
    if (g == "method") return faast::Granularity::Method;
    if (g == "class") return faast::Granularity::Class;
    throw Error(ErrorCode::Config, "granularity must be 'method' or 'class'");
}

struct CommonOpts {
    std::string input;
    std::string pairs;
    std::string out;
    std::string granularity = "method";
    int workers = 1;
    bool deterministic = false;
    std::uint64_t seed = 42;

    int effective_workers() const { return deterministic ? 1 : workers; }
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool needs_input, bool needs_pairs,
                bool needs_out) {
    auto* input = cmd->add_option("--input", opts.input,
                                  "Fragment source: record file, directory tree, or .java file");
    if (needs_input) input->required();
    auto* pairs = cmd->add_option("--pairs", opts.pairs, "Pair list file");
    if (needs_pairs) pairs->required();
    auto* out = cmd->add_option("--out", opts.out, "Output path");
    if (needs_out) out->required();
    cmd->add_option("--granularity", opts.granularity,
                    "Granularity for bare .java inputs: method|class")
        ->envname("FAAST_GRANULARITY");
    cmd->add_option("--workers", opts.workers, "Worker threads for scoring/eval")
        ->envname("FAAST_WORKERS");
    cmd->add_flag("--deterministic", opts.deterministic,
                  "Single-threaded numeric paths for bit-identical runs")
        ->envname("FAAST_DETERMINISTIC");
    cmd->add_option("--seed", opts.seed, "Seed for every random choice")->envname("FAAST_SEED");
}

faast::FragmentStore load_store(const CommonOpts& opts, bool report_skips = true) {
    faast::LoadResult loaded =
        faast::load_corpus(opts.input, parse_granularity(opts.granularity));
    if (report_skips && !loaded.skipped.empty()) {
        std::cerr << "[faast] skipped " << loaded.skipped.size() << " fragment(s):\n";
        for (auto& s : loaded.skipped) std::cerr << "  " << s.id << ": " << s.error << "\n";
        if (!opts.out.empty())
            faast::save_skip_report(
                (std::filesystem::path(opts.out) / "skip_report.jsonl").string(),
                loaded.skipped);
    }
    return std::move(loaded.store);
}

// --- graph -----------------------------------------------------------------

int cmd_graph(const CommonOpts& opts, const std::string& format) {
    echo_config("graph", {{"input", opts.input},
                          {"out", opts.out},
                          {"format", format},
                          {"granularity", opts.granularity}});
    faast::LoadResult loaded =
        faast::load_corpus(opts.input, parse_granularity(opts.granularity));
    std::filesystem::create_directories(opts.out);
    if (!loaded.skipped.empty())
        faast::save_skip_report(
            (std::filesystem::path(opts.out) / "skip_report.jsonl").string(), loaded.skipped);

    auto fmt = format == "dot" ? faast::fa_ast::ExportFormat::DOT
                               : faast::fa_ast::ExportFormat::JsonGraph;
    std::vector<int> histogram(faast::kNumEdgeTypes, 0);
    int count = 0;
    for (const std::string& id : loaded.store.ids()) {
        const faast::FlowGraph& graph = loaded.store.graph(id);
        std::vector<int> h = faast::fa_ast::edge_type_histogram(graph);
        for (int i = 0; i < faast::kNumEdgeTypes; ++i) histogram[i] += h[i];
        std::string name = id;
        for (char& c : name)
            if (c == '/' || c == '\\') c = '_';
        std::filesystem::path file = std::filesystem::path(opts.out) /
                                     (name + (fmt == faast::fa_ast::ExportFormat::DOT
                                                  ? ".dot"
                                                  : ".json"));
        faast::io::atomic_write(file.string(), faast::fa_ast::export_graph(graph, fmt));
        ++count;
    }
    std::cout << "wrote " << count << " graph file(s) to " << opts.out << "\n";
    std::cout << "edge histogram:";
    for (int i = 0; i < faast::kNumEdgeTypes; ++i)
        if (histogram[i] > 0)
            std::cout << " " << faast::edge_type_name(static_cast<faast::EdgeType>(i)) << "="
                      << histogram[i];
    std::cout << "\n";
    if (!loaded.skipped.empty()) {
        std::cerr << "[faast] " << loaded.skipped.size() << " fragment(s) skipped\n";
        return 2;
    }
    return 0;
}

// --- synth -------------------------------------------------------------------

int cmd_synth(const std::string& out, int functionalities, int variants, std::uint64_t seed) {
    echo_config("synth", {{"out", out},
                          {"functionalities", functionalities},
                          {"variants", variants},
                          {"seed", seed}});
    faast::SynthSpec spec{functionalities, variants, seed};
    faast::SynthCorpus corpus = faast::gen_synthetic_corpus(spec);
    std::filesystem::create_directories(out);
    std::filesystem::path dir(out);
    faast::save_fragments((dir / "fragments.jsonl").string(), corpus.store);
    faast::save_pairs((dir / "pairs.jsonl").string(), corpus.pairs);
    faast::save_synth_manifest((dir / "manifest.json").string(), spec, corpus);
    long trues = 0;
    for (auto& p : corpus.pairs)
        if (p.label > 0) ++trues;
    std::cout << "synthetic corpus: " << corpus.store.size() << " fragments, " << trues
              << " true / " << (corpus.pairs.size() - static_cast<size_t>(trues))
              << " false pairs -> " << out << "\n";
    return 0;
}

// --- train ---------------------------------------------------------------------

struct SplitRatio {
    double train = 8, valid = 1, test = 1;
};

SplitRatio parse_split(const std::string& text) {
    SplitRatio r;
    if (std::sscanf(text.c_str(), "%lf:%lf:%lf", &r.train, &r.valid, &r.test) != 3)
        throw Error(ErrorCode::Config, "split must look like 8:1:1");
    return r;
}

int cmd_train(const CommonOpts& opts, const std::string& model_name, int dim, int steps,
              double lr, int batch, int epochs, const std::string& split,
              std::uint64_t split_seed, double balance, int min_count, bool flip_sign) {
    echo_config("train", {{"input", opts.input},
                          {"pairs", opts.pairs},
                          {"out", opts.out},
                          {"model", model_name},
                          {"dim", dim},
                          {"steps", steps},
                          {"lr", lr},
                          {"batch", batch},
                          {"epochs", epochs},
                          {"seed", opts.seed},
                          {"split", split},
                          {"split_seed", split_seed},
                          {"balance", balance},
                          {"min_count", min_count},
                          {"deterministic", opts.deterministic}});

    faast::FragmentStore store = load_store(opts);
    std::vector<faast::FragmentPair> pairs = faast::load_pairs(opts.pairs);
    SplitRatio ratio = parse_split(split);
    faast::PairSplit splits =
        faast::split_pairs(pairs, {ratio.train, ratio.valid, ratio.test, split_seed});

    faast::ModelConfig model;
    model.kind = faast::model_kind_from_name(model_name);
    model.dim = dim;
    model.steps = steps;
    model.flip_match_sign = flip_sign;
    faast::TrainHyper hyper;
    hyper.lr = lr;
    hyper.batch_size = batch;
    hyper.epochs = epochs;
    hyper.balance_ratio = balance;
    hyper.min_count = min_count;

    faast::pipeline::TrainResult result =
        faast::pipeline::train(model, hyper, opts.seed, store, splits.train, splits.valid);

    std::filesystem::path dir(opts.out);
    std::filesystem::create_directories(dir);
    faast::save_checkpoint(result.checkpoint, (dir / "checkpoint.json").string());
    faast::io::atomic_write((dir / "train_log.jsonl").string(),
                            faast::pipeline::train_log_to_jsonl(result.log));
    faast::save_pairs((dir / "train_pairs.jsonl").string(), splits.train);
    faast::save_pairs((dir / "valid_pairs.jsonl").string(), splits.valid);
    faast::save_pairs((dir / "test_pairs.jsonl").string(), splits.test);
    faast::io::atomic_write((dir / "sigma.json").string(),
                            json{{"sigma", result.best_sigma},
                                 {"valid_f1", result.best_f1},
                                 {"epoch", result.best_epoch}}
                                    .dump() +
                                "\n");
    std::cout << "best validation F1 " << result.best_f1 << " at epoch " << result.best_epoch
              << " (sigma " << result.best_sigma << "); artifacts in " << opts.out << "\n";
    return 0;
}

// --- tune / eval / predict / attention --------------------------------------

int cmd_tune(const CommonOpts& opts, const std::string& checkpoint_path) {
    echo_config("tune", {{"input", opts.input},
                         {"pairs", opts.pairs},
                         {"checkpoint", checkpoint_path},
                         {"out", opts.out},
                         {"workers", opts.effective_workers()}});
    faast::Checkpoint checkpoint = faast::load_checkpoint(checkpoint_path);
    faast::FragmentStore store = load_store(opts);
    std::vector<faast::FragmentPair> pairs = faast::load_pairs(opts.pairs);
    std::vector<double> scores =
        faast::pipeline::score_pairs(checkpoint, store, pairs, opts.effective_workers());
    std::vector<int> labels;
    for (auto& p : pairs) labels.push_back(p.label);
    faast::pipeline::ThresholdResult tuned = faast::pipeline::tune_threshold(scores, labels);
    faast::io::atomic_write(opts.out,
                            json{{"sigma", tuned.sigma}, {"f1", tuned.f1}}.dump() + "\n");
    std::cout << "tuned sigma " << tuned.sigma << " (F1 " << tuned.f1 << ") -> " << opts.out
              << "\n";
    return 0;
}

int cmd_eval(const CommonOpts& opts, const std::string& checkpoint_path,
             std::optional<double> threshold, const std::string& sigma_file,
             const std::string& model_flag, double grid_step, bool plots) {
    echo_config("eval", {{"input", opts.input},
                         {"pairs", opts.pairs},
                         {"checkpoint", checkpoint_path},
                         {"out", opts.out},
                         {"threshold", threshold ? json(*threshold) : json(nullptr)},
                         {"sigma_file", sigma_file},
                         {"grid_step", grid_step},
                         {"workers", opts.effective_workers()},
                         {"plots", plots}});
    faast::Checkpoint checkpoint = faast::load_checkpoint(checkpoint_path);
    if (!model_flag.empty() &&
        faast::model_kind_from_name(model_flag) != checkpoint.model.kind)
        throw Error(ErrorCode::ModelKindMismatch,
                    "checkpoint is a " + faast::model_kind_name(checkpoint.model.kind) +
                        " model, but --model " + model_flag + " was requested");
    double sigma;
    if (threshold) {
        sigma = *threshold;
    } else if (!sigma_file.empty()) {
        sigma = json::parse(faast::io::read_file(sigma_file)).at("sigma").get<double>();
    } else {
        throw Error(ErrorCode::Config, "eval needs --threshold or --sigma-file");
    }

    faast::FragmentStore store = load_store(opts);
    std::vector<faast::FragmentPair> pairs = faast::load_pairs(opts.pairs);
    std::vector<double> scores =
        faast::pipeline::score_pairs(checkpoint, store, pairs, opts.effective_workers());
    std::vector<int> labels;
    std::vector<std::optional<faast::CloneType>> types;
    for (auto& p : pairs) {
        labels.push_back(p.label);
        types.push_back(p.clone_type);
    }
    faast::metrics::EvalReport report = faast::metrics::evaluate(
        scores, labels, types, sigma, faast::metrics::default_grid(grid_step));

    std::filesystem::path dir(opts.out);
    std::filesystem::create_directories(dir);
    faast::io::atomic_write((dir / "report.json").string(),
                            faast::metrics::report_json(report).dump(2) + "\n");
    faast::io::atomic_write((dir / "report.txt").string(), faast::metrics::report_text(report));
    faast::io::atomic_write((dir / "sweep.csv").string(),
                            faast::metrics::sweep_csv(report.curve));
    faast::io::atomic_write((dir / "roc.csv").string(), faast::metrics::roc_csv(report.roc));
    if (plots) {
        faast::io::atomic_write((dir / "sweep.svg").string(),
                                faast::metrics::sweep_svg(report.curve));
        faast::io::atomic_write((dir / "roc.svg").string(), faast::metrics::roc_svg(report.roc));
    }
    std::cout << faast::metrics::report_text(report);
    return 0;
}

int cmd_predict(const CommonOpts& opts, const std::string& checkpoint_path, double threshold) {
    echo_config("predict", {{"input", opts.input},
                            {"pairs", opts.pairs},
                            {"checkpoint", checkpoint_path},
                            {"out", opts.out},
                            {"threshold", threshold},
                            {"workers", opts.effective_workers()}});
    faast::Checkpoint checkpoint = faast::load_checkpoint(checkpoint_path);
    faast::FragmentStore store = load_store(opts);
    std::vector<faast::FragmentPair> pairs = faast::load_pairs(opts.pairs);
    std::vector<faast::pipeline::Prediction> preds = faast::pipeline::predict(
        checkpoint, threshold, pairs, store, opts.effective_workers());
    std::string out;
    for (auto& p : preds)
        out += json{{"id1", p.id1}, {"id2", p.id2}, {"score", p.score}, {"verdict", p.verdict}}
                   .dump() +
               "\n";
    faast::io::atomic_write(opts.out, out);
    std::cout << "wrote " << preds.size() << " prediction(s) to " << opts.out << "\n";
    return 0;
}

int cmd_attention(const CommonOpts& opts, const std::string& checkpoint_path,
                  const std::string& id1, const std::string& id2, int k) {
    echo_config("attention", {{"input", opts.input},
                              {"checkpoint", checkpoint_path},
                              {"id1", id1},
                              {"id2", id2},
                              {"k", k},
                              {"out", opts.out}});
    faast::Checkpoint checkpoint = faast::load_checkpoint(checkpoint_path);
    faast::FragmentStore store = load_store(opts);
    faast::GmnPairResult result =
        faast::pipeline::attention_for_pair(checkpoint, store, id1, id2);
    std::vector<faast::AttentionEntry> top = faast::export_attention(
        result.final_attention, store.graph(id1), store.graph(id2), k);
    std::string out;
    for (auto& e : top)
        out += json{{"i", e.i},
                    {"j", e.j},
                    {"direction", e.direction},
                    {"score", e.score},
                    {"label_i", e.label_i},
                    {"label_j", e.label_j}}
                   .dump() +
               "\n";
    faast::io::atomic_write(opts.out, out);
    std::cout << "wrote top-" << top.size() << " attention cells to " << opts.out << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"faast: code clone detection over flow-augmented ASTs"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Key=value config file (flags take precedence)");
    app.allow_config_extras(false);
    app.footer("Environment overrides use the FAAST_ prefix (e.g. FAAST_SEED).");

    CommonOpts graph_opts;
    auto* graph = app.add_subcommand("graph", "Build FA-AST graphs and export DOT/JSON");
    std::string graph_format = "json";
    add_common(graph, graph_opts, true, false, true);
    graph->add_option("--format", graph_format, "Export format: dot|json")
        ->check(CLI::IsMember({"dot", "json"}));

    auto* synth = app.add_subcommand("synth", "Generate the bundled synthetic clone corpus");
    std::string synth_out;
    int synth_func = 4, synth_variants = 10;
    std::uint64_t synth_seed = 20240101;
    synth->add_option("--out", synth_out, "Output directory")->required();
    synth->add_option("--functionalities", synth_func, "Number of functionality templates");
    synth->add_option("--variants", synth_variants, "Variants per functionality");
    synth->add_option("--seed", synth_seed, "Corpus seed")->envname("FAAST_SEED");

    CommonOpts train_opts;
    auto* train = app.add_subcommand("train", "Train a model on labeled pairs");
    std::string train_model = "gmn", train_split = "8:1:1";
    int train_dim = 100, train_steps = 4, train_batch = 32, train_epochs = 10,
        train_min_count = 1;
    double train_lr = 0.001, train_balance = 1.0;
    std::uint64_t train_split_seed = 7;
    bool train_flip = false;
    add_common(train, train_opts, true, true, true);
    train->add_option("--model", train_model, "Model: ggnn|gmn")
        ->check(CLI::IsMember({"ggnn", "gmn"}))
        ->envname("FAAST_MODEL");
    train->add_option("--dim", train_dim, "Hidden and embedding dimension");
    train->add_option("--steps", train_steps, "Propagation steps");
    train->add_option("--lr", train_lr, "Adam learning rate");
    train->add_option("--batch", train_batch, "Minibatch size");
    train->add_option("--epochs", train_epochs, "Training epochs");
    train->add_option("--split", train_split, "train:valid:test ratio");
    train->add_option("--split-seed", train_split_seed, "Seed for the pair split");
    train->add_option("--balance", train_balance, "False:true ratio after downsampling");
    train->add_option("--min-count", train_min_count, "Vocabulary frequency cutoff");
    train->add_flag("--flip-match-sign", train_flip,
                    "Negate the cross-graph matching vector (ablation)");

    CommonOpts tune_opts;
    auto* tune = app.add_subcommand("tune", "Tune the similarity threshold on labeled pairs");
    std::string tune_checkpoint;
    add_common(tune, tune_opts, true, true, true);
    tune->add_option("--checkpoint", tune_checkpoint, "Model checkpoint")->required();

    CommonOpts eval_opts;
    auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on labeled pairs");
    std::string eval_checkpoint, eval_sigma_file, eval_model;
    double eval_grid_step = 0.01;
    bool eval_plots = false;
    std::optional<double> eval_threshold;
    add_common(eval, eval_opts, true, true, true);
    eval->add_option("--checkpoint", eval_checkpoint, "Model checkpoint")->required();
    eval->add_option("--threshold", eval_threshold, "Decision threshold sigma");
    eval->add_option("--sigma-file", eval_sigma_file, "JSON file with {\"sigma\": ...}");
    eval->add_option("--model", eval_model, "Assert the checkpoint model kind: ggnn|gmn")
        ->check(CLI::IsMember({"ggnn", "gmn"}));
    eval->add_option("--grid-step", eval_grid_step, "Sweep grid step over [-1, 1]");
    eval->add_flag("--plots", eval_plots, "Also render sweep.svg and roc.svg");

    CommonOpts predict_opts;
    auto* predict = app.add_subcommand("predict", "Score pairs and apply a threshold");
    std::string predict_checkpoint;
    double predict_threshold = 0.0;
    add_common(predict, predict_opts, true, true, true);
    predict->add_option("--checkpoint", predict_checkpoint, "Model checkpoint")->required();
    predict->add_option("--threshold", predict_threshold, "Decision threshold sigma")
        ->required();

    CommonOpts att_opts;
    auto* attention =
        app.add_subcommand("attention", "Export top-k cross-graph attention for one pair");
    std::string att_checkpoint, att_id1, att_id2;
    int att_k = 10;
    add_common(attention, att_opts, true, false, true);
    attention->add_option("--checkpoint", att_checkpoint, "GMN checkpoint")->required();
    attention->add_option("--id1", att_id1, "First fragment id")->required();
    attention->add_option("--id2", att_id2, "Second fragment id")->required();
    attention->add_option("--k", att_k, "Number of attention cells");

    CLI11_PARSE(app, argc, argv);

    try {
        if (graph->parsed()) return cmd_graph(graph_opts, graph_format);
        if (synth->parsed()) return cmd_synth(synth_out, synth_func, synth_variants, synth_seed);
        if (train->parsed())
            return cmd_train(train_opts, train_model, train_dim, train_steps, train_lr,
                             train_batch, train_epochs, train_split, train_split_seed,
                             train_balance, train_min_count, train_flip);
        if (tune->parsed()) return cmd_tune(tune_opts, tune_checkpoint);
        if (eval->parsed())
            return cmd_eval(eval_opts, eval_checkpoint, eval_threshold, eval_sigma_file,
                            eval_model, eval_grid_step, eval_plots);
        if (predict->parsed())
            return cmd_predict(predict_opts, predict_checkpoint, predict_threshold);
        if (attention->parsed())
            return cmd_attention(att_opts, att_checkpoint, att_id1, att_id2, att_k);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 1;
}

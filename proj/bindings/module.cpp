// Python bindings for the main toolkit operations.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <filesystem>

#include "faast/checkpoint.hpp"
#include "faast/dataset.hpp"
#include "faast/errors.hpp"
#include "faast/flow_graph.hpp"
#include "faast/io_util.hpp"
#include "faast/java_parser.hpp"
#include "faast/metrics.hpp"
#include "faast/pipeline.hpp"

namespace py = pybind11;
using namespace faast;

namespace {

Granularity granularity_from(const std::string& g) {
    if (g == "method") return Granularity::Method;
    if (g == "class") return Granularity::Class;
    throw Error(ErrorCode::Config, "granularity must be 'method' or 'class'");
}

SourceFragment fragment_from(const std::string& code, const std::string& granularity,
                             const std::string& id) {
    return {id, code, granularity_from(granularity)};
}

py::dict graph_to_dict(const FlowGraph& g) {
    py::dict out;
    out["fragment_id"] = g.fragment_id;
    out["num_nodes"] = g.num_nodes;
    out["labels"] = g.node_labels;
    py::list edges;
    for (const Edge& e : g.edges)
        edges.append(py::make_tuple(e.src, e.dst, std::string(edge_type_name(e.type))));
    out["edges"] = edges;
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Clone detection over flow-augmented ASTs (C++ core)";

    py::register_exception<Error>(m, "FaastError");

    m.def(
        "parse_tokens",
        [](const std::string& code, const std::string& granularity) {
            AstTree tree = parse_fragment(fragment_from(code, granularity, "py"));
            std::vector<std::string> tokens;
            for (int id : terminals_in_order(tree)) tokens.push_back(tree.node(id).token);
            return tokens;
        },
        py::arg("code"), py::arg("granularity") = "method",
        "Terminal token sequence of a parsed fragment");

    m.def(
        "build_graph",
        [](const std::string& code, const std::string& granularity, const std::string& id) {
            return graph_to_dict(
                fa_ast::build(parse_fragment(fragment_from(code, granularity, id))));
        },
        py::arg("code"), py::arg("granularity") = "method", py::arg("id") = "py",
        "Flow-augmented AST as a dict of labels and typed edges");

    m.def(
        "graph_dot",
        [](const std::string& code, const std::string& granularity) {
            return fa_ast::export_graph(
                fa_ast::build(parse_fragment(fragment_from(code, granularity, "py"))),
                fa_ast::ExportFormat::DOT);
        },
        py::arg("code"), py::arg("granularity") = "method", "DOT text of the FA-AST");

    m.def(
        "graph_json",
        [](const std::string& code, const std::string& granularity) {
            return fa_ast::export_graph(
                fa_ast::build(parse_fragment(fragment_from(code, granularity, "py"))),
                fa_ast::ExportFormat::JsonGraph);
        },
        py::arg("code"), py::arg("granularity") = "method", "JSON record of the FA-AST");

    m.def(
        "gen_synthetic_corpus",
        [](const std::string& out_dir, int functionalities, int variants, std::uint64_t seed) {
            SynthSpec spec{functionalities, variants, seed};
            SynthCorpus corpus = gen_synthetic_corpus(spec);
            std::filesystem::create_directories(out_dir);
            std::filesystem::path dir(out_dir);
            save_fragments((dir / "fragments.jsonl").string(), corpus.store);
            save_pairs((dir / "pairs.jsonl").string(), corpus.pairs);
            save_synth_manifest((dir / "manifest.json").string(), spec, corpus);
            py::dict out;
            out["fragments"] = corpus.store.size();
            out["pairs"] = corpus.pairs.size();
            return out;
        },
        py::arg("out_dir"), py::arg("functionalities") = 4, py::arg("variants") = 10,
        py::arg("seed") = 20240101, "Write the bundled synthetic corpus to a directory");

    m.def(
        "train",
        [](const std::string& fragments_path, const std::string& pairs_path,
           const std::string& out_dir, const std::string& model, int dim, int steps,
           double lr, int batch, int epochs, std::uint64_t seed, std::uint64_t split_seed) {
            LoadResult loaded = load_corpus(fragments_path);
            std::vector<FragmentPair> pairs = load_pairs(pairs_path);
            PairSplit split = split_pairs(pairs, {8, 1, 1, split_seed});
            ModelConfig config;
            config.kind = model_kind_from_name(model);
            config.dim = dim;
            config.steps = steps;
            TrainHyper hyper;
            hyper.lr = lr;
            hyper.batch_size = batch;
            hyper.epochs = epochs;
            pipeline::TrainResult result =
                pipeline::train(config, hyper, seed, loaded.store, split.train, split.valid);
            std::filesystem::create_directories(out_dir);
            std::filesystem::path dir(out_dir);
            save_checkpoint(result.checkpoint, (dir / "checkpoint.json").string());
            io::atomic_write((dir / "train_log.jsonl").string(),
                             pipeline::train_log_to_jsonl(result.log));
            save_pairs((dir / "test_pairs.jsonl").string(), split.test);
            py::dict out;
            out["best_epoch"] = result.best_epoch;
            out["best_valid_f1"] = result.best_f1;
            out["sigma"] = result.best_sigma;
            out["checkpoint"] = (dir / "checkpoint.json").string();
            return out;
        },
        py::arg("fragments"), py::arg("pairs"), py::arg("out_dir"), py::arg("model") = "gmn",
        py::arg("dim") = 100, py::arg("steps") = 4, py::arg("lr") = 0.001,
        py::arg("batch") = 32, py::arg("epochs") = 10, py::arg("seed") = 42,
        py::arg("split_seed") = 7, "Train on a fragment/pair file with an 8:1:1 split");

    m.def(
        "score_pair",
        [](const std::string& checkpoint_path, const std::string& code1,
           const std::string& code2, const std::string& granularity) {
            Checkpoint checkpoint = load_checkpoint(checkpoint_path);
            FragmentStore store;
            store.insert(fragment_from(code1, granularity, "a"));
            store.insert(fragment_from(code2, granularity, "b"));
            std::vector<FragmentPair> pairs{{"a", "b", 1, std::nullopt}};
            return pipeline::score_pairs(checkpoint, store, pairs)[0];
        },
        py::arg("checkpoint"), py::arg("code1"), py::arg("code2"),
        py::arg("granularity") = "method", "Similarity score of two fragments");

    m.def(
        "evaluate",
        [](const std::string& checkpoint_path, const std::string& fragments_path,
           const std::string& pairs_path, double sigma) {
            Checkpoint checkpoint = load_checkpoint(checkpoint_path);
            LoadResult loaded = load_corpus(fragments_path);
            std::vector<FragmentPair> pairs = load_pairs(pairs_path);
            std::vector<double> scores = pipeline::score_pairs(checkpoint, loaded.store, pairs);
            std::vector<int> labels;
            std::vector<std::optional<CloneType>> types;
            for (auto& p : pairs) {
                labels.push_back(p.label);
                types.push_back(p.clone_type);
            }
            metrics::EvalReport report =
                metrics::evaluate(scores, labels, types, sigma, metrics::default_grid());
            py::dict out;
            out["precision"] = report.overall.precision;
            out["recall"] = report.overall.recall;
            out["f1"] = report.overall.f1;
            out["auc"] = report.roc.auc;
            out["sigma"] = sigma;
            return out;
        },
        py::arg("checkpoint"), py::arg("fragments"), py::arg("pairs"), py::arg("sigma"),
        "Precision/recall/F1/AUC of a checkpoint on labeled pairs");

    m.def(
        "tune_threshold",
        [](const std::vector<double>& scores, const std::vector<int>& labels) {
            pipeline::ThresholdResult r = pipeline::tune_threshold(scores, labels);
            return py::make_tuple(r.sigma, r.f1);
        },
        py::arg("scores"), py::arg("labels"),
        "Best-F1 threshold over observed scores; returns (sigma, f1)");

    m.attr("__version__") = "0.1.0";
}

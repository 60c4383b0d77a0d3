#include "faast/vocab.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include <nlohmann/json.hpp>

#include "faast/errors.hpp"
#include "faast/io_util.hpp"

namespace faast {

Vocabulary::Vocabulary() : labels_{kUnkLabel} { index_[kUnkLabel] = 0; }

Vocabulary::Vocabulary(std::vector<std::string> labels) : labels_(std::move(labels)) {
    if (labels_.empty() || labels_[0] != kUnkLabel)
        raise(ErrorCode::Config, "vocabulary must start with the UNK label");
    for (int i = 0; i < static_cast<int>(labels_.size()); ++i)
        index_[labels_[static_cast<size_t>(i)]] = i;
}

int Vocabulary::lookup(const std::string& label) const {
    auto it = index_.find(label);
    return it == index_.end() ? kUnk : it->second;
}

Vocabulary build_vocab(const std::vector<const FlowGraph*>& corpus, int min_count) {
    if (corpus.empty()) raise(ErrorCode::EmptyCorpus, "build_vocab: empty corpus");
    if (min_count < 1) raise(ErrorCode::Config, "build_vocab: min_count must be >= 1");
    std::map<std::string, long> counts;
    for (const FlowGraph* g : corpus)
        for (const std::string& label : g->node_labels) ++counts[label];
    std::vector<std::string> kept{Vocabulary::kUnkLabel};
    for (auto& [label, count] : counts)
        if (count >= min_count && label != Vocabulary::kUnkLabel) kept.push_back(label);
    return Vocabulary(std::move(kept));
}

void save_vocab(const Vocabulary& vocab, const std::string& path) {
    std::string out;
    out += nlohmann::json{{"format", "faast.vocab"}, {"version", 1}}.dump() + "\n";
    for (int i = 0; i < vocab.size(); ++i)
        out += nlohmann::json{{"index", i}, {"label", vocab.label(i)}}.dump() + "\n";
    io::atomic_write(path, out);
}

Vocabulary load_vocab(const std::string& path) {
    std::vector<std::string> lines = io::read_lines(path);
    if (lines.empty()) raise(ErrorCode::Io, "empty vocab file: " + path);
    auto header = nlohmann::json::parse(lines[0]);
    if (header.value("format", "") != "faast.vocab")
        raise(ErrorCode::Io, "not a vocab file: " + path);
    std::vector<std::string> labels(lines.size() - 1);
    for (size_t i = 1; i < lines.size(); ++i) {
        auto j = nlohmann::json::parse(lines[i]);
        int index = j.at("index").get<int>();
        if (index < 0 || index >= static_cast<int>(labels.size()))
            raise(ErrorCode::Io, "vocab index out of range");
        labels[static_cast<size_t>(index)] = j.at("label").get<std::string>();
    }
    return Vocabulary(std::move(labels));
}

EncodedGraph encode_graph(const FlowGraph& graph, const Vocabulary& vocab) {
    EncodedGraph out;
    out.num_nodes = graph.num_nodes;
    out.label_index.reserve(graph.node_labels.size());
    for (const std::string& label : graph.node_labels)
        out.label_index.push_back(vocab.lookup(label));
    out.in_edges.assign(static_cast<size_t>(graph.num_nodes), {});
    for (const Edge& e : graph.edges) {
        int id = static_cast<int>(out.edge_src.size());
        out.edge_src.push_back(e.src);
        out.edge_dst.push_back(e.dst);
        out.edge_type.push_back(static_cast<int>(e.type));
        out.in_edges[static_cast<size_t>(e.dst)].push_back(id);
    }
    out.source = &graph;
    return out;
}

void init_embeddings(nn::ParamStore& store, int vocab_size, int dim, nn::Rng& rng,
                     double scale) {
    Eigen::MatrixXd& node = store.add(kNodeTable, vocab_size, dim);
    nn::init_uniform(node, rng, scale);
    Eigen::MatrixXd& edge = store.add(kEdgeTable, kNumEdgeTypes, dim);
    nn::init_uniform(edge, rng, scale);
}

Eigen::MatrixXd encode(const EncodedGraph& graph, const nn::ParamStore& store) {
    const Eigen::MatrixXd& table = store.value(kNodeTable);
    Eigen::MatrixXd h(graph.num_nodes, table.cols());
    for (int i = 0; i < graph.num_nodes; ++i)
        h.row(i) = table.row(graph.label_index[static_cast<size_t>(i)]);
    return h;
}

}  // namespace faast

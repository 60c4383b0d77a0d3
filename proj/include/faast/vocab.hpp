#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "faast/flow_graph.hpp"
#include "faast/nn.hpp"

namespace faast {

/// Label -> dense index map with a reserved UNK slot at index 0. Labels are
/// node-kind names for nonterminals and token text for terminals.
class Vocabulary {
public:
    static constexpr int kUnk = 0;
    static constexpr const char* kUnkLabel = "<UNK>";

    Vocabulary();
    explicit Vocabulary(std::vector<std::string> labels);  // labels[0] must be UNK

    int size() const { return static_cast<int>(labels_.size()); }
    int lookup(const std::string& label) const;
    const std::string& label(int index) const { return labels_[static_cast<size_t>(index)]; }
    const std::vector<std::string>& labels() const { return labels_; }

private:
    std::vector<std::string> labels_;
    std::unordered_map<std::string, int> index_;
};

/// Count labels over the corpus and keep those seen at least `min_count`
/// times; everything else falls back to UNK at lookup time. Deterministic:
/// retained labels are indexed in lexicographic order after UNK.
Vocabulary build_vocab(const std::vector<const FlowGraph*>& corpus, int min_count);

void save_vocab(const Vocabulary& vocab, const std::string& path);
Vocabulary load_vocab(const std::string& path);

/// FlowGraph with labels resolved to vocabulary indices and edges unpacked
/// into arrays, ready for the models.
struct EncodedGraph {
    int num_nodes = 0;
    std::vector<int> label_index;               // per node
    std::vector<int> edge_src, edge_dst, edge_type;
    std::vector<std::vector<int>> in_edges;     // per node: edge ids with dst == node
    const FlowGraph* source = nullptr;

    int num_edges() const { return static_cast<int>(edge_src.size()); }
};

EncodedGraph encode_graph(const FlowGraph& graph, const Vocabulary& vocab);

/// Embedding tables live in the ParamStore under these names.
inline constexpr const char* kNodeTable = "embed.node";
inline constexpr const char* kEdgeTable = "embed.edge";

/// Create and uniformly initialize node/edge embedding tables.
void init_embeddings(nn::ParamStore& store, int vocab_size, int dim, nn::Rng& rng,
                     double scale = 0.05);

/// Initial node-state matrix h^(0): row i is the node table row of node i's
/// label (UNK row for unseen labels).
Eigen::MatrixXd encode(const EncodedGraph& graph, const nn::ParamStore& store);

}  // namespace faast

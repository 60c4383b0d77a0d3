#pragma once

#include "faast/model.hpp"

namespace faast {

/// Cross-graph attention of the final (or every) propagation step.
/// a1: rows are G1 nodes attending over G2 nodes; a2 the other direction.
struct AttentionMatrix {
    Eigen::MatrixXd a1;  // |V1| x |V2|
    Eigen::MatrixXd a2;  // |V2| x |V1|
};

struct CrossAttentionResult {
    Eigen::MatrixXd mu1;  // per-G1-node matching vector sum: h_i - sum_j a_ij h_j
    Eigen::MatrixXd mu2;
    AttentionMatrix attention;
};

/// Softmax-normalized dot-product attention between two state sets, plus
/// the summed matching vectors. Content-canonical in both node orders.
/// `pair_touches`, when given, counts score computations (one per node
/// pair per direction).
CrossAttentionResult cross_attention(const Eigen::MatrixXd& h1, const Eigen::MatrixXd& h2,
                                     long long* pair_touches = nullptr);

struct GmnStepCache {
    MessageCache msg1, msg2;
    AttentionMatrix att;
    nn::GruCache gru1, gru2;
};

struct GmnTrace {
    std::vector<Eigen::MatrixXd> states1, states2;
    std::vector<GmnStepCache> steps;
    nn::ReadoutCache readout1, readout2;
};

struct GmnPairResult {
    Eigen::VectorXd hg1, hg2;
    AttentionMatrix final_attention;
    std::vector<AttentionMatrix> history;  // filled when keep_history is set
};

/// One joint propagation round over the pair; weights fully shared.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> gmn_propagate_pair_once(
    const EncodedGraph& g1, const EncodedGraph& g2, const Eigen::MatrixXd& h1,
    const Eigen::MatrixXd& h2, const ModelConfig& config, nn::ParamStore& store,
    GmnStepCache* cache, long long* pair_touches = nullptr);

/// T joint rounds then per-graph readout. Attention of the final step is
/// always returned; set keep_history for all steps.
GmnPairResult gmn_embed_pair(const EncodedGraph& g1, const EncodedGraph& g2,
                             const ModelConfig& config, nn::ParamStore& store,
                             GmnTrace* trace, bool keep_history = false,
                             long long* pair_touches = nullptr);

void gmn_backward(const EncodedGraph& g1, const EncodedGraph& g2, const ModelConfig& config,
                  nn::ParamStore& store, const GmnTrace& trace, const Eigen::VectorXd& dhg1,
                  const Eigen::VectorXd& dhg2);

/// Top-k attention cells across both directions, sorted by descending
/// score; ties broken by (direction, i, j) for determinism.
struct AttentionEntry {
    int i = 0;
    int j = 0;
    int direction = 1;  // 1: G1 node i attends to G2 node j; 2: the reverse
    double score = 0.0;
    std::string label_i, label_j;
};

std::vector<AttentionEntry> export_attention(const AttentionMatrix& attention,
                                             const FlowGraph& g1, const FlowGraph& g2, int k);

}  // namespace faast

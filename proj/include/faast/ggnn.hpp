#pragma once

#include "faast/model.hpp"

namespace faast {

struct GgnnStepCache {
    MessageCache msg;
    nn::GruCache gru;
};

struct GgnnTrace {
    std::vector<Eigen::MatrixXd> states;  // h^(0) .. h^(T)
    std::vector<GgnnStepCache> steps;
    nn::ReadoutCache readout;
};

/// One round of gated message passing: h_i' = GRU(h_i, sum of incoming
/// messages).
Eigen::MatrixXd ggnn_propagate_once(const EncodedGraph& graph, const Eigen::MatrixXd& h,
                                    nn::ParamStore& store, GgnnStepCache* cache);

/// T propagation rounds from the embedded labels, then gated readout.
Eigen::VectorXd ggnn_embed_graph(const EncodedGraph& graph, const ModelConfig& config,
                                 nn::ParamStore& store, GgnnTrace* trace);

/// Accumulate gradients for d(loss)/d(h_G) through the whole forward pass,
/// including the embedding tables.
void ggnn_backward(const EncodedGraph& graph, const ModelConfig& config,
                   nn::ParamStore& store, const GgnnTrace& trace,
                   const Eigen::VectorXd& dhg);

}  // namespace faast

#pragma once

#include <cstdint>
#include <string>

#include "faast/nn.hpp"
#include "faast/vocab.hpp"

namespace faast {

enum class ModelKind { Ggnn, Gmn };

std::string model_kind_name(ModelKind kind);
ModelKind model_kind_from_name(const std::string& name);

/// Architecture hyperparameters shared by both models. `flip_match_sign`
/// negates the cross-graph matching vector (ablation switch, GMN only).
struct ModelConfig {
    ModelKind kind = ModelKind::Gmn;
    int dim = 100;
    int steps = 4;
    bool flip_match_sign = false;

    void validate() const;
};

/// Message MLP input is [h_dst || h_src || e_type]: 3d -> d with one hidden
/// layer of width d and ReLU.
nn::MlpSpec message_mlp_spec(int dim);

/// Create all trainable parameters (embedding tables, message MLP, GRU,
/// readout) with a seeded init. GRU input width is d for GGNN and 2d for
/// GMN (message sum concatenated with the matching vector).
void init_model_params(nn::ParamStore& store, const ModelConfig& config, int vocab_size,
                       nn::Rng& rng);

inline constexpr const char* kMsgPrefix = "msg";
inline constexpr const char* kGruPrefix = "gru";
inline constexpr const char* kReadoutPrefix = "readout";

struct MessageCache {
    nn::MlpCache mlp;
    Eigen::MatrixXd x;  // per-edge MLP input rows
};

/// Per-edge messages MLP([h_dst || h_src || e_type]) aggregated by
/// order-canonical summation into each destination node; nodes without
/// in-edges get the zero vector.
Eigen::MatrixXd message_aggregate(const EncodedGraph& graph, const Eigen::MatrixXd& h,
                                  nn::ParamStore& store, MessageCache* cache);

/// Backward of message_aggregate; returns the gradient wrt the input node
/// states and accumulates MLP and edge-embedding gradients.
Eigen::MatrixXd message_backward(const EncodedGraph& graph, nn::ParamStore& store,
                                 const Eigen::MatrixXd& dm, const MessageCache& cache);

/// Gradient of the initial states h^(0) scattered into the node table.
void scatter_embedding_grads(const EncodedGraph& graph, nn::ParamStore& store,
                             const Eigen::MatrixXd& dh0);

}  // namespace faast

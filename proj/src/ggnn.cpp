#include "faast/ggnn.hpp"

#include "faast/canon.hpp"
#include "faast/errors.hpp"

namespace faast {

std::string model_kind_name(ModelKind kind) {
    return kind == ModelKind::Ggnn ? "ggnn" : "gmn";
}

ModelKind model_kind_from_name(const std::string& name) {
    if (name == "ggnn") return ModelKind::Ggnn;
    if (name == "gmn") return ModelKind::Gmn;
    raise(ErrorCode::Config, "unknown model kind '" + name + "'");
}

void ModelConfig::validate() const {
    if (dim < 1) raise(ErrorCode::Config, "model dim must be >= 1");
    if (steps < 1) raise(ErrorCode::Config, "propagation steps must be >= 1");
}

nn::MlpSpec message_mlp_spec(int dim) {
    nn::MlpSpec spec;
    spec.input_dim = 3 * dim;
    spec.hidden_dims = {dim};
    spec.output_dim = dim;
    spec.hidden_activation = nn::Activation::ReLU;
    spec.output_activation = nn::Activation::Identity;
    return spec;
}

void init_model_params(nn::ParamStore& store, const ModelConfig& config, int vocab_size,
                       nn::Rng& rng) {
    config.validate();
    init_embeddings(store, vocab_size, config.dim, rng);
    nn::mlp_init(store, kMsgPrefix, message_mlp_spec(config.dim), rng);
    int gru_input = config.kind == ModelKind::Gmn ? 2 * config.dim : config.dim;
    nn::gru_init(store, kGruPrefix, gru_input, config.dim, rng);
    nn::readout_init(store, kReadoutPrefix, config.dim, rng);
}

Eigen::MatrixXd message_aggregate(const EncodedGraph& graph, const Eigen::MatrixXd& h,
                                  nn::ParamStore& store, MessageCache* cache) {
    int n = graph.num_nodes;
    int d = static_cast<int>(h.cols());
    int num_edges = graph.num_edges();
    if (h.rows() != n) raise(ErrorCode::Shape, "state rows != num_nodes");

    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, d);
    if (num_edges == 0) {
        if (cache) cache->x.resize(0, 3 * d);
        return m;
    }

    const Eigen::MatrixXd& edge_table = store.value(kEdgeTable);
    Eigen::MatrixXd x(num_edges, 3 * d);
    for (int e = 0; e < num_edges; ++e) {
        x.block(e, 0, 1, d) = h.row(graph.edge_dst[static_cast<size_t>(e)]);
        x.block(e, d, 1, d) = h.row(graph.edge_src[static_cast<size_t>(e)]);
        x.block(e, 2 * d, 1, d) = edge_table.row(graph.edge_type[static_cast<size_t>(e)]);
    }
    MessageCache local;
    MessageCache* c = cache ? cache : &local;
    c->x = x;
    Eigen::MatrixXd msg =
        nn::mlp_forward(message_mlp_spec(d), store, kMsgPrefix, x, &c->mlp);
    for (int i = 0; i < n; ++i) {
        const auto& in = graph.in_edges[static_cast<size_t>(i)];
        if (!in.empty()) m.row(i) = canon::sum_rows_subset(msg, in);
    }
    return m;
}

Eigen::MatrixXd message_backward(const EncodedGraph& graph, nn::ParamStore& store,
                                 const Eigen::MatrixXd& dm, const MessageCache& cache) {
    int n = graph.num_nodes;
    int d = static_cast<int>(dm.cols());
    int num_edges = graph.num_edges();
    Eigen::MatrixXd dh = Eigen::MatrixXd::Zero(n, d);
    if (num_edges == 0) return dh;

    Eigen::MatrixXd dmsg(num_edges, d);
    for (int e = 0; e < num_edges; ++e)
        dmsg.row(e) = dm.row(graph.edge_dst[static_cast<size_t>(e)]);

    Eigen::MatrixXd dx = nn::mlp_backward(message_mlp_spec(d), store, kMsgPrefix, dmsg, cache.mlp);
    Eigen::MatrixXd& dedge = store.grad(kEdgeTable);
    for (int e = 0; e < num_edges; ++e) {
        dh.row(graph.edge_dst[static_cast<size_t>(e)]) += dx.block(e, 0, 1, d);
        dh.row(graph.edge_src[static_cast<size_t>(e)]) += dx.block(e, d, 1, d);
        dedge.row(graph.edge_type[static_cast<size_t>(e)]) += dx.block(e, 2 * d, 1, d);
    }
    return dh;
}

void scatter_embedding_grads(const EncodedGraph& graph, nn::ParamStore& store,
                             const Eigen::MatrixXd& dh0) {
    Eigen::MatrixXd& dnode = store.grad(kNodeTable);
    for (int i = 0; i < graph.num_nodes; ++i)
        dnode.row(graph.label_index[static_cast<size_t>(i)]) += dh0.row(i);
}

Eigen::MatrixXd ggnn_propagate_once(const EncodedGraph& graph, const Eigen::MatrixXd& h,
                                    nn::ParamStore& store, GgnnStepCache* cache) {
    GgnnStepCache local;
    GgnnStepCache* c = cache ? cache : &local;
    Eigen::MatrixXd m = message_aggregate(graph, h, store, &c->msg);
    return nn::gru_forward(store, kGruPrefix, h, m, &c->gru);
}

Eigen::VectorXd ggnn_embed_graph(const EncodedGraph& graph, const ModelConfig& config,
                                 nn::ParamStore& store, GgnnTrace* trace) {
    config.validate();
    if (graph.num_nodes == 0) raise(ErrorCode::EmptyGraph, "ggnn on empty graph");
    GgnnTrace local;
    GgnnTrace* t = trace ? trace : &local;
    t->states.clear();
    t->steps.assign(static_cast<size_t>(config.steps), {});
    t->states.push_back(encode(graph, store));
    for (int step = 0; step < config.steps; ++step)
        t->states.push_back(ggnn_propagate_once(graph, t->states.back(), store,
                                                &t->steps[static_cast<size_t>(step)]));
    return nn::readout_forward(store, kReadoutPrefix, t->states.back(), &t->readout);
}

void ggnn_backward(const EncodedGraph& graph, const ModelConfig& config,
                   nn::ParamStore& store, const GgnnTrace& trace,
                   const Eigen::VectorXd& dhg) {
    Eigen::MatrixXd dh = nn::readout_backward(store, kReadoutPrefix, dhg, trace.readout);
    for (int step = config.steps - 1; step >= 0; --step) {
        const GgnnStepCache& cache = trace.steps[static_cast<size_t>(step)];
        auto [dh_state, dm] = nn::gru_backward(store, kGruPrefix, dh, cache.gru);
        dh = dh_state + message_backward(graph, store, dm, cache.msg);
    }
    scatter_embedding_grads(graph, store, dh);
}

}  // namespace faast

#include "faast/gmn.hpp"

#include <algorithm>
#include <cmath>

#include "faast/canon.hpp"
#include "faast/errors.hpp"

namespace faast {

namespace {

/// One attention direction: rows of `from` attend over rows of `to`.
/// Scores are computed once per distinct row pair and broadcast, keeping
/// every value a function of content only.
void attention_direction(const Eigen::MatrixXd& from, const Eigen::MatrixXd& to,
                         Eigen::MatrixXd& a, Eigen::MatrixXd& mu, long long* pair_touches) {
    int n_from = static_cast<int>(from.rows());
    int n_to = static_cast<int>(to.rows());
    canon::RowGroups gf = canon::group_rows(from);
    canon::RowGroups gt = canon::group_rows(to);
    Eigen::MatrixXd scores_u = gf.unique * gt.unique.transpose();
    if (pair_touches) *pair_touches += static_cast<long long>(n_from) * n_to;

    a.resize(n_from, n_to);
    mu.resize(n_from, from.cols());
    std::vector<double> expd(static_cast<size_t>(n_to));
    for (int i = 0; i < n_from; ++i) {
        int gi = gf.group_of[static_cast<size_t>(i)];
        double max_score = -std::numeric_limits<double>::infinity();
        for (int j = 0; j < n_to; ++j)
            max_score = std::max(max_score, scores_u(gi, gt.group_of[static_cast<size_t>(j)]));
        for (int j = 0; j < n_to; ++j)
            expd[static_cast<size_t>(j)] =
                std::exp(scores_u(gi, gt.group_of[static_cast<size_t>(j)]) - max_score);
        double denom = canon::sum_values(expd);
        for (int j = 0; j < n_to; ++j) a(i, j) = expd[static_cast<size_t>(j)] / denom;
        mu.row(i) = from.row(i) - canon::weighted_sum_rows(a.row(i).transpose(), to);
    }
}

/// Backward through one direction given d(mu); accumulates into dfrom/dto.
void attention_direction_backward(const Eigen::MatrixXd& from, const Eigen::MatrixXd& to,
                                  const Eigen::MatrixXd& a, const Eigen::MatrixXd& dmu,
                                  Eigen::MatrixXd& dfrom, Eigen::MatrixXd& dto) {
    // mu = from - a*to
    dfrom += dmu;
    Eigen::MatrixXd dp = -dmu;                       // p = a*to
    Eigen::MatrixXd da = dp * to.transpose();
    dto.noalias() += a.transpose() * dp;
    // softmax backward per row: ds = a .* (da - rowsum(a .* da))
    Eigen::VectorXd rowdot = (a.array() * da.array()).rowwise().sum();
    Eigen::MatrixXd ds = a.array() * (da.array().colwise() - rowdot.array());
    // s(i,j) = from_i . to_j
    dfrom.noalias() += ds * to;
    dto.noalias() += ds.transpose() * from;
}

}  // namespace

CrossAttentionResult cross_attention(const Eigen::MatrixXd& h1, const Eigen::MatrixXd& h2,
                                     long long* pair_touches) {
    if (h1.rows() == 0 || h2.rows() == 0)
        raise(ErrorCode::EmptyGraph, "cross attention over empty graph");
    if (h1.cols() != h2.cols()) raise(ErrorCode::Shape, "cross attention dim mismatch");
    CrossAttentionResult out;
    attention_direction(h1, h2, out.attention.a1, out.mu1, pair_touches);
    attention_direction(h2, h1, out.attention.a2, out.mu2, pair_touches);
    return out;
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> gmn_propagate_pair_once(
    const EncodedGraph& g1, const EncodedGraph& g2, const Eigen::MatrixXd& h1,
    const Eigen::MatrixXd& h2, const ModelConfig& config, nn::ParamStore& store,
    GmnStepCache* cache, long long* pair_touches) {
    GmnStepCache local;
    GmnStepCache* c = cache ? cache : &local;
    Eigen::MatrixXd m1 = message_aggregate(g1, h1, store, &c->msg1);
    Eigen::MatrixXd m2 = message_aggregate(g2, h2, store, &c->msg2);
    CrossAttentionResult att = cross_attention(h1, h2, pair_touches);
    c->att = att.attention;
    double sign = config.flip_match_sign ? -1.0 : 1.0;

    int d = config.dim;
    Eigen::MatrixXd in1(h1.rows(), 2 * d);
    in1.leftCols(d) = m1;
    in1.rightCols(d) = sign * att.mu1;
    Eigen::MatrixXd in2(h2.rows(), 2 * d);
    in2.leftCols(d) = m2;
    in2.rightCols(d) = sign * att.mu2;

    Eigen::MatrixXd next1 = nn::gru_forward(store, kGruPrefix, h1, in1, &c->gru1);
    Eigen::MatrixXd next2 = nn::gru_forward(store, kGruPrefix, h2, in2, &c->gru2);
    return {next1, next2};
}

GmnPairResult gmn_embed_pair(const EncodedGraph& g1, const EncodedGraph& g2,
                             const ModelConfig& config, nn::ParamStore& store,
                             GmnTrace* trace, bool keep_history, long long* pair_touches) {
    config.validate();
    if (g1.num_nodes == 0 || g2.num_nodes == 0)
        raise(ErrorCode::EmptyGraph, "gmn on empty graph");
    GmnTrace local;
    GmnTrace* t = trace ? trace : &local;
    t->states1.clear();
    t->states2.clear();
    t->steps.assign(static_cast<size_t>(config.steps), {});
    t->states1.push_back(encode(g1, store));
    t->states2.push_back(encode(g2, store));

    GmnPairResult result;
    for (int step = 0; step < config.steps; ++step) {
        GmnStepCache& c = t->steps[static_cast<size_t>(step)];
        auto [next1, next2] = gmn_propagate_pair_once(g1, g2, t->states1.back(),
                                                      t->states2.back(), config, store, &c,
                                                      pair_touches);
        t->states1.push_back(std::move(next1));
        t->states2.push_back(std::move(next2));
        if (keep_history) result.history.push_back(c.att);
    }
    result.final_attention = t->steps.back().att;
    result.hg1 = nn::readout_forward(store, kReadoutPrefix, t->states1.back(), &t->readout1);
    result.hg2 = nn::readout_forward(store, kReadoutPrefix, t->states2.back(), &t->readout2);
    return result;
}

void gmn_backward(const EncodedGraph& g1, const EncodedGraph& g2, const ModelConfig& config,
                  nn::ParamStore& store, const GmnTrace& trace, const Eigen::VectorXd& dhg1,
                  const Eigen::VectorXd& dhg2) {
    Eigen::MatrixXd dh1 = nn::readout_backward(store, kReadoutPrefix, dhg1, trace.readout1);
    Eigen::MatrixXd dh2 = nn::readout_backward(store, kReadoutPrefix, dhg2, trace.readout2);
    double sign = config.flip_match_sign ? -1.0 : 1.0;
    int d = config.dim;

    for (int step = config.steps - 1; step >= 0; --step) {
        const GmnStepCache& c = trace.steps[static_cast<size_t>(step)];
        auto [dh1_state, din1] = nn::gru_backward(store, kGruPrefix, dh1, c.gru1);
        auto [dh2_state, din2] = nn::gru_backward(store, kGruPrefix, dh2, c.gru2);
        Eigen::MatrixXd dm1 = din1.leftCols(d);
        Eigen::MatrixXd dmu1 = sign * din1.rightCols(d);
        Eigen::MatrixXd dm2 = din2.leftCols(d);
        Eigen::MatrixXd dmu2 = sign * din2.rightCols(d);

        const Eigen::MatrixXd& h1 = trace.states1[static_cast<size_t>(step)];
        const Eigen::MatrixXd& h2 = trace.states2[static_cast<size_t>(step)];
        Eigen::MatrixXd datt1 = Eigen::MatrixXd::Zero(h1.rows(), d);
        Eigen::MatrixXd datt2 = Eigen::MatrixXd::Zero(h2.rows(), d);
        attention_direction_backward(h1, h2, c.att.a1, dmu1, datt1, datt2);
        attention_direction_backward(h2, h1, c.att.a2, dmu2, datt2, datt1);

        dh1 = dh1_state + datt1 + message_backward(g1, store, dm1, c.msg1);
        dh2 = dh2_state + datt2 + message_backward(g2, store, dm2, c.msg2);
    }
    scatter_embedding_grads(g1, store, dh1);
    scatter_embedding_grads(g2, store, dh2);
}

std::vector<AttentionEntry> export_attention(const AttentionMatrix& attention,
                                             const FlowGraph& g1, const FlowGraph& g2, int k) {
    std::vector<AttentionEntry> all;
    for (int i = 0; i < attention.a1.rows(); ++i)
        for (int j = 0; j < attention.a1.cols(); ++j)
            all.push_back({i, j, 1, attention.a1(i, j),
                           g1.node_labels[static_cast<size_t>(i)],
                           g2.node_labels[static_cast<size_t>(j)]});
    for (int i = 0; i < attention.a2.rows(); ++i)
        for (int j = 0; j < attention.a2.cols(); ++j)
            all.push_back({i, j, 2, attention.a2(i, j),
                           g2.node_labels[static_cast<size_t>(i)],
                           g1.node_labels[static_cast<size_t>(j)]});
    std::sort(all.begin(), all.end(), [](const AttentionEntry& a, const AttentionEntry& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.direction != b.direction) return a.direction < b.direction;
        if (a.i != b.i) return a.i < b.i;
        return a.j < b.j;
    });
    if (k >= 0 && static_cast<size_t>(k) < all.size()) all.resize(static_cast<size_t>(k));
    return all;
}

}  // namespace faast

#include <doctest.h>

#include <cmath>
#include <vector>

#include "bits.hpp"
#include "faast/errors.hpp"
#include "faast/gmn.hpp"

using namespace faast;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

FlowGraph make_graph(std::vector<std::string> labels, std::vector<Edge> edges) {
    FlowGraph g;
    g.fragment_id = "g";
    g.num_nodes = static_cast<int>(labels.size());
    g.node_labels = std::move(labels);
    g.edges = std::move(edges);
    return g;
}

FlowGraph permute_graph(const FlowGraph& g, const std::vector<int>& perm) {
    FlowGraph out;
    out.fragment_id = g.fragment_id;
    out.num_nodes = g.num_nodes;
    out.node_labels.resize(g.node_labels.size());
    for (int i = 0; i < g.num_nodes; ++i)
        out.node_labels[static_cast<size_t>(perm[static_cast<size_t>(i)])] =
            g.node_labels[static_cast<size_t>(i)];
    for (const Edge& e : g.edges)
        out.edges.push_back({perm[static_cast<size_t>(e.src)],
                             perm[static_cast<size_t>(e.dst)], e.type});
    return out;
}

struct PairFixture {
    FlowGraph g1, g2;
    Vocabulary vocab;
    nn::ParamStore store;
    ModelConfig config;
    EncodedGraph e1, e2;

    PairFixture(FlowGraph a, FlowGraph b, int dim, int steps, std::uint64_t seed)
        : g1(std::move(a)), g2(std::move(b)) {
        vocab = build_vocab({&g1, &g2}, 1);
        config.kind = ModelKind::Gmn;
        config.dim = dim;
        config.steps = steps;
        nn::Rng rng(seed);
        init_model_params(store, config, vocab.size(), rng);
        e1 = encode_graph(g1, vocab);
        e2 = encode_graph(g2, vocab);
    }
};

FlowGraph small_graph_a() {
    return make_graph({"A", "B", "C"}, {{0, 1, EdgeType::Child},
                                        {1, 0, EdgeType::Parent},
                                        {1, 2, EdgeType::NextToken},
                                        {2, 1, EdgeType::PrevToken}});
}

FlowGraph small_graph_b() {
    return make_graph({"A", "C", "D"}, {{0, 1, EdgeType::Child},
                                        {1, 0, EdgeType::Parent},
                                        {0, 2, EdgeType::Child},
                                        {2, 0, EdgeType::Parent}});
}

}  // namespace

TEST_CASE("cross attention over a singleton puts weight one on it") {
    MatrixXd h1(2, 3), h2(1, 3);
    h1 << 0.3, -0.2, 0.9, 1.1, 0.4, -0.5;
    h2 << 0.25, 0.5, -1.0;
    CrossAttentionResult r = cross_attention(h1, h2);
    CHECK(r.attention.a1(0, 0) == 1.0);
    CHECK(r.attention.a1(1, 0) == 1.0);
    CHECK((r.mu1.row(0) - (h1.row(0) - h2.row(0))).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((r.mu1.row(1) - (h1.row(1) - h2.row(0))).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("identical states give vanishing matching vectors") {
    MatrixXd h = MatrixXd::Constant(4, 3, 0.7);
    CrossAttentionResult r = cross_attention(h, h);
    CHECK(r.mu1.cwiseAbs().maxCoeff() < 1e-15);
    CHECK(r.mu2.cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("2x2 attention matches the closed-form softmax of dot products") {
    MatrixXd h1(2, 2), h2(2, 2);
    h1 << 1.0, 0.0, 0.0, 2.0;
    h2 << 0.5, -0.5, 1.5, 0.25;
    CrossAttentionResult r = cross_attention(h1, h2);
    for (int i = 0; i < 2; ++i) {
        double s0 = h1.row(i).dot(h2.row(0));
        double s1 = h1.row(i).dot(h2.row(1));
        double m = std::max(s0, s1);
        double e0 = std::exp(s0 - m), e1 = std::exp(s1 - m);
        CHECK(r.attention.a1(i, 0) == doctest::Approx(e0 / (e0 + e1)).epsilon(1e-12));
        CHECK(r.attention.a1(i, 1) == doctest::Approx(e1 / (e0 + e1)).epsilon(1e-12));
        Eigen::RowVectorXd mu = h1.row(i) - (r.attention.a1(i, 0) * h2.row(0) +
                                             r.attention.a1(i, 1) * h2.row(1));
        CHECK((r.mu1.row(i) - mu).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("attention rows sum to one") {
    nn::Rng rng(61);
    MatrixXd h1(7, 5), h2(9, 5);
    nn::init_uniform(h1, rng, 2.0);
    nn::init_uniform(h2, rng, 2.0);
    CrossAttentionResult r = cross_attention(h1, h2);
    for (int i = 0; i < 7; ++i)
        CHECK(std::abs(r.attention.a1.row(i).sum() - 1.0) < 1e-9);
    for (int i = 0; i < 9; ++i)
        CHECK(std::abs(r.attention.a2.row(i).sum() - 1.0) < 1e-9);
}

TEST_CASE("joint propagation of an identical pair keeps both sides equal") {
    PairFixture f(small_graph_a(), small_graph_a(), 4, 1, 71);
    MatrixXd h1 = encode(f.e1, f.store);
    MatrixXd h2 = encode(f.e2, f.store);
    auto [n1, n2] = gmn_propagate_pair_once(f.e1, f.e2, h1, h2, f.config, f.store, nullptr);
    CHECK(bits_equal(n1, n2));
}

TEST_CASE("with equal states everywhere the update reduces to GRU(h, [m || 0])") {
    // one shared label -> every initial state identical -> matching vector 0
    FlowGraph g = make_graph({"A", "A", "A"},
                             {{0, 1, EdgeType::Child}, {1, 0, EdgeType::Parent}});
    PairFixture f(g, g, 4, 1, 73);
    MatrixXd h = encode(f.e1, f.store);
    auto [n1, n2] = gmn_propagate_pair_once(f.e1, f.e2, h, h, f.config, f.store, nullptr);

    MessageCache mc;
    MatrixXd m = message_aggregate(f.e1, h, f.store, &mc);
    MatrixXd in(h.rows(), 8);
    in.leftCols(4) = m;
    in.rightCols(4).setZero();
    MatrixXd expected = nn::gru_forward(f.store, kGruPrefix, h, in, nullptr);
    CHECK(bits_equal(n1, expected));
}

TEST_CASE("tiny pair matches an independent step-by-step calculation") {
    PairFixture f(small_graph_a(), small_graph_b(), 2, 1, 79);
    MatrixXd h1 = encode(f.e1, f.store);
    MatrixXd h2 = encode(f.e2, f.store);
    auto [n1, n2] = gmn_propagate_pair_once(f.e1, f.e2, h1, h2, f.config, f.store, nullptr);

    // naive within-graph messages
    auto naive_messages = [&](const EncodedGraph& g, const MatrixXd& h) {
        MatrixXd msum = MatrixXd::Zero(h.rows(), 2);
        for (int e = 0; e < g.num_edges(); ++e) {
            Eigen::RowVectorXd x(6);
            x << h.row(g.edge_dst[size_t(e)]), h.row(g.edge_src[size_t(e)]),
                f.store.value(kEdgeTable).row(g.edge_type[size_t(e)]);
            Eigen::RowVectorXd hid =
                (x * f.store.value("msg.w0") + f.store.value("msg.b0")).cwiseMax(0.0);
            Eigen::RowVectorXd msg = hid * f.store.value("msg.w1") + f.store.value("msg.b1");
            msum.row(g.edge_dst[size_t(e)]) += msg;
        }
        return msum;
    };
    // naive cross attention
    auto naive_mu = [&](const MatrixXd& from, const MatrixXd& to) {
        MatrixXd mu(from.rows(), 2);
        for (int i = 0; i < from.rows(); ++i) {
            Eigen::VectorXd scores(to.rows());
            for (int j = 0; j < to.rows(); ++j) scores(j) = from.row(i).dot(to.row(j));
            double m = scores.maxCoeff();
            Eigen::VectorXd e = (scores.array() - m).exp();
            Eigen::VectorXd a = e / e.sum();
            Eigen::RowVectorXd avg = Eigen::RowVectorXd::Zero(2);
            for (int j = 0; j < to.rows(); ++j) avg += a(j) * to.row(j);
            mu.row(i) = from.row(i) - avg;
        }
        return mu;
    };
    auto naive_gru = [&](const MatrixXd& h, const MatrixXd& m) {
        auto sigmoid = [](const MatrixXd& x) {
            return MatrixXd(((-x.array()).exp() + 1.0).inverse());
        };
        MatrixXd z = sigmoid(m * f.store.value("gru.wz") + h * f.store.value("gru.uz") +
                             f.store.value("gru.bz").replicate(h.rows(), 1));
        MatrixXd r = sigmoid(m * f.store.value("gru.wr") + h * f.store.value("gru.ur") +
                             f.store.value("gru.br").replicate(h.rows(), 1));
        MatrixXd c = (m * f.store.value("gru.wc") +
                      r.cwiseProduct(h) * f.store.value("gru.uc") +
                      f.store.value("gru.bc").replicate(h.rows(), 1))
                         .array()
                         .tanh();
        return MatrixXd((1.0 - z.array()).matrix().cwiseProduct(h) + z.cwiseProduct(c));
    };

    MatrixXd in1(3, 4), in2(3, 4);
    in1.leftCols(2) = naive_messages(f.e1, h1);
    in1.rightCols(2) = naive_mu(h1, h2);
    in2.leftCols(2) = naive_messages(f.e2, h2);
    in2.rightCols(2) = naive_mu(h2, h1);
    CHECK((n1 - naive_gru(h1, in1)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((n2 - naive_gru(h2, in2)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("embed_pair of a fragment with itself has cosine similarity 1") {
    PairFixture f(small_graph_a(), small_graph_a(), 5, 3, 83);
    GmnPairResult r = gmn_embed_pair(f.e1, f.e2, f.config, f.store, nullptr);
    double cos = r.hg1.dot(r.hg2) / (r.hg1.norm() * r.hg2.norm());
    CHECK(std::abs(cos - 1.0) < 1e-9);
}

TEST_CASE("swapping the argument order swaps the outputs exactly") {
    PairFixture f(small_graph_a(), small_graph_b(), 4, 2, 89);
    GmnPairResult ab = gmn_embed_pair(f.e1, f.e2, f.config, f.store, nullptr);
    GmnPairResult ba = gmn_embed_pair(f.e2, f.e1, f.config, f.store, nullptr);
    CHECK(bits_equal(ab.hg1, ba.hg2));
    CHECK(bits_equal(ab.hg2, ba.hg1));
    CHECK(bits_equal(ab.final_attention.a1, ba.final_attention.a2));
    CHECK(bits_equal(ab.final_attention.a2, ba.final_attention.a1));
}

TEST_CASE("embed_pair is exactly invariant under node renumbering of either side") {
    PairFixture f(small_graph_a(), small_graph_b(), 4, 2, 97);
    GmnPairResult base = gmn_embed_pair(f.e1, f.e2, f.config, f.store, nullptr);

    nn::Rng rng(3);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<int> p1 = {0, 1, 2}, p2 = {0, 1, 2};
        rng.shuffle(p1);
        rng.shuffle(p2);
        EncodedGraph e1p = encode_graph(permute_graph(f.g1, p1), f.vocab);
        EncodedGraph e2p = encode_graph(permute_graph(f.g2, p2), f.vocab);
        GmnPairResult out = gmn_embed_pair(e1p, e2p, f.config, f.store, nullptr);
        CHECK(bits_equal(out.hg1, base.hg1));
        CHECK(bits_equal(out.hg2, base.hg2));
    }
}

TEST_CASE("cross attention touches each node pair once per direction per step") {
    PairFixture f(small_graph_a(), small_graph_b(), 4, 3, 101);
    long long touches = 0;
    gmn_embed_pair(f.e1, f.e2, f.config, f.store, nullptr, false, &touches);
    CHECK(touches == 2LL * 3 * 3 * 3);  // directions * n1 * n2 * steps
}

TEST_CASE("attention history is retained only on request") {
    PairFixture f(small_graph_a(), small_graph_b(), 4, 3, 103);
    GmnPairResult without = gmn_embed_pair(f.e1, f.e2, f.config, f.store, nullptr, false);
    CHECK(without.history.empty());
    GmnPairResult with = gmn_embed_pair(f.e1, f.e2, f.config, f.store, nullptr, true);
    CHECK(with.history.size() == 3);
    CHECK(bits_equal(with.history.back().a1, with.final_attention.a1));
}

TEST_CASE("flip_match_sign negates the matching vector") {
    PairFixture f(small_graph_a(), small_graph_b(), 4, 1, 107);
    MatrixXd h1 = encode(f.e1, f.store);
    MatrixXd h2 = encode(f.e2, f.store);
    ModelConfig flipped = f.config;
    flipped.flip_match_sign = true;
    auto [n1, _] = gmn_propagate_pair_once(f.e1, f.e2, h1, h2, flipped, f.store, nullptr);

    MessageCache mc;
    MatrixXd m = message_aggregate(f.e1, h1, f.store, &mc);
    CrossAttentionResult att = cross_attention(h1, h2);
    MatrixXd in(3, 8);
    in.leftCols(4) = m;
    in.rightCols(4) = -att.mu1;
    CHECK(bits_equal(n1, nn::gru_forward(f.store, kGruPrefix, h1, in, nullptr)));
}

TEST_CASE("export_attention orders scores and clamps k") {
    AttentionMatrix att;
    att.a1.resize(1, 2);
    att.a1 << 0.75, 0.25;
    att.a2.resize(2, 1);
    att.a2 << 1.0, 1.0;
    FlowGraph g1 = make_graph({"x"}, {});
    FlowGraph g2 = make_graph({"y", "z"}, {});
    auto top = export_attention(att, g1, g2, 100);
    CHECK(top.size() == 4);
    for (size_t i = 1; i < top.size(); ++i) CHECK(top[i - 1].score >= top[i].score);
    auto top1 = export_attention(att, g1, g2, 1);
    REQUIRE(top1.size() == 1);
    CHECK(top1[0].score == 1.0);

    // singleton vs singleton: the single cell has score 1
    AttentionMatrix single;
    single.a1 = MatrixXd::Constant(1, 1, 1.0);
    single.a2 = MatrixXd::Constant(1, 1, 1.0);
    auto cells = export_attention(single, make_graph({"a"}, {}), make_graph({"b"}, {}), 1);
    REQUIRE(cells.size() == 1);
    CHECK(cells[0].score == 1.0);
}

TEST_CASE("end-to-end gmn gradient check on a small pair") {
    PairFixture f(small_graph_a(), small_graph_b(), 3, 2, 109);
    GmnTrace trace;
    auto loss_fn = [&] {
        GmnPairResult r = gmn_embed_pair(f.e1, f.e2, f.config, f.store, &trace);
        return 0.5 * (r.hg1.squaredNorm() + r.hg2.squaredNorm());
    };
    auto backward_fn = [&] {
        GmnPairResult r = gmn_embed_pair(f.e1, f.e2, f.config, f.store, &trace);
        gmn_backward(f.e1, f.e2, f.config, f.store, trace, r.hg1, r.hg2);
    };
    auto report = nn::grad_check(f.store, loss_fn, backward_fn, 1e-4, 13, 10);
    CHECK(report.max_rel_error < 1e-4);
}

TEST_CASE("empty side raises EmptyGraph") {
    MatrixXd h(0, 3), h2(2, 3);
    h2.setZero();
    CHECK_THROWS_AS(cross_attention(h, h2), Error);
}

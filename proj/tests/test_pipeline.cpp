#include <doctest.h>

#include <cmath>

#include "bits.hpp"
#include "faast/errors.hpp"
#include "faast/metrics.hpp"
#include "faast/nn.hpp"
#include "faast/pipeline.hpp"

using namespace faast;
using Eigen::VectorXd;

namespace {

/// Exhaustive threshold oracle: try a cut at every observed score plus one
/// above the maximum, report the best F1.
double exhaustive_best_f1(const std::vector<double>& scores, const std::vector<int>& labels) {
    std::vector<double> cuts = scores;
    double above = *std::max_element(scores.begin(), scores.end()) + 1.0;
    cuts.push_back(above);
    double best = -1.0;
    for (double cut : cuts) {
        best = std::max(best, metrics::prf(scores, labels, cut).f1);
    }
    return best;
}

struct TrainedFixture {
    SynthCorpus corpus;
    PairSplit split;
    pipeline::TrainResult result;

    TrainedFixture(ModelKind kind, int dim, int steps, int epochs, std::uint64_t seed) {
        corpus = gen_synthetic_corpus({2, 3, 500});
        // hand-rolled split so valid and test always hold both classes
        std::vector<FragmentPair> trues, falses;
        for (auto& p : corpus.pairs) (p.label > 0 ? trues : falses).push_back(p);
        split.valid = {trues[0], falses[0]};
        split.test = {trues[1], falses[1]};
        split.train.assign(trues.begin() + 2, trues.end());
        split.train.insert(split.train.end(), falses.begin() + 2, falses.end());
        ModelConfig model;
        model.kind = kind;
        model.dim = dim;
        model.steps = steps;
        TrainHyper hyper;
        hyper.batch_size = 4;
        hyper.epochs = epochs;
        result = pipeline::train(model, hyper, seed, corpus.store, split.train, split.valid);
    }
};

}  // namespace

TEST_CASE("cosine similarity closed forms and zero-vector error") {
    VectorXd v(3);
    v << 1.0, 2.0, -1.0;
    CHECK(pipeline::similarity(v, v) == doctest::Approx(1.0));
    CHECK(pipeline::similarity(v, VectorXd(-v)) == doctest::Approx(-1.0));

    VectorXd a(2), b(2);
    a << 1.0, 0.0;
    b << 0.0, 5.0;
    CHECK(pipeline::similarity(a, b) == doctest::Approx(0.0));

    VectorXd zero = VectorXd::Zero(3);
    CHECK_THROWS_AS(pipeline::similarity(v, zero), Error);
}

TEST_CASE("tune_threshold: separated scores give the gap midpoint with F1 1") {
    std::vector<double> scores = {0.9, 0.8, 0.1, -0.5};
    std::vector<int> labels = {1, 1, -1, -1};
    auto r = pipeline::tune_threshold(scores, labels);
    CHECK(r.f1 == doctest::Approx(1.0));
    CHECK(r.sigma == doctest::Approx((0.1 + 0.8) / 2.0));
}

TEST_CASE("tune_threshold: identical scores return that score") {
    std::vector<double> scores = {0.4, 0.4, 0.4};
    std::vector<int> labels = {1, -1, 1};
    auto r = pipeline::tune_threshold(scores, labels);
    CHECK(r.sigma == doctest::Approx(0.4));
    // all-positive baseline: P=2/3, R=1
    CHECK(r.f1 == doctest::Approx(0.8));
}

TEST_CASE("tune_threshold: four-pair hand case") {
    std::vector<double> scores = {0.9, 0.8, 0.7, 0.1};
    std::vector<int> labels = {1, -1, 1, -1};
    auto r = pipeline::tune_threshold(scores, labels);
    CHECK(r.f1 == doctest::Approx(0.8));
    CHECK(r.sigma > 0.1);
    CHECK(r.sigma <= 0.7);
    CHECK(r.f1 == doctest::Approx(exhaustive_best_f1(scores, labels)));
}

TEST_CASE("tune_threshold matches the exhaustive oracle on random sets") {
    nn::Rng rng(777);
    for (int trial = 0; trial < 100; ++trial) {
        int n = 4 + static_cast<int>(rng.below(30));
        std::vector<double> scores;
        std::vector<int> labels;
        bool pos = false, neg = false;
        for (int i = 0; i < n; ++i) {
            scores.push_back(std::round(rng.uniform(-1, 1) * 10.0) / 10.0);
            labels.push_back(rng.uniform() < 0.5 ? 1 : -1);
            (labels.back() > 0 ? pos : neg) = true;
        }
        if (!pos || !neg) continue;
        auto tuned = pipeline::tune_threshold(scores, labels);
        double oracle = exhaustive_best_f1(scores, labels);
        CHECK(tuned.f1 == doctest::Approx(oracle).epsilon(1e-12));
        // the returned sigma actually achieves the optimum
        CHECK(metrics::prf(scores, labels, tuned.sigma).f1 ==
              doctest::Approx(oracle).epsilon(1e-12));
    }
}

TEST_CASE("tune_threshold rejects single-class validation") {
    CHECK_THROWS_AS(pipeline::tune_threshold({0.5, 0.6}, {1, 1}), Error);
}

TEST_CASE("training on a toy corpus logs per epoch and does not regress loss") {
    TrainedFixture f(ModelKind::Gmn, 8, 2, 3, 321);
    REQUIRE(f.result.log.size() == 3);
    CHECK(f.result.log.back().train_loss <= f.result.log.front().train_loss + 1e-9);
    CHECK(f.result.best_f1 >= 0.0);
    for (auto& entry : f.result.log) CHECK(std::isfinite(entry.train_loss));
}

TEST_CASE("zero learning rate leaves parameters at their init") {
    SynthCorpus corpus = gen_synthetic_corpus({2, 3, 501});
    PairSplit split;
    {
        std::vector<FragmentPair> ts, fs;
        for (auto& p : corpus.pairs) (p.label > 0 ? ts : fs).push_back(p);
        split.valid = {ts[0], fs[0]};
        split.train.assign(ts.begin() + 1, ts.end());
        split.train.insert(split.train.end(), fs.begin() + 1, fs.end());
    }
    ModelConfig model;
    model.kind = ModelKind::Ggnn;
    model.dim = 6;
    model.steps = 1;
    TrainHyper hyper;
    hyper.lr = 0.0;
    hyper.epochs = 1;
    hyper.batch_size = 4;
    auto result = pipeline::train(model, hyper, 999, corpus.store, split.train, split.valid);

    // re-create the untouched init: same seed, same vocabulary
    std::vector<const FlowGraph*> graphs;
    for (const std::string& id : corpus.store.ids()) graphs.push_back(&corpus.store.graph(id));
    Vocabulary vocab = build_vocab(graphs, 1);
    nn::ParamStore init;
    nn::Rng rng(999);
    init_model_params(init, model, vocab.size(), rng);
    for (const std::string& name : init.names())
        CHECK(bits_equal(init.value(name), result.checkpoint.params.value(name)));
}

TEST_CASE("identical seeds give bit-identical training logs and parameters") {
    TrainedFixture a(ModelKind::Gmn, 8, 2, 2, 2024);
    TrainedFixture b(ModelKind::Gmn, 8, 2, 2, 2024);
    CHECK(pipeline::train_log_to_jsonl(a.result.log) ==
          pipeline::train_log_to_jsonl(b.result.log));
    for (const std::string& name : a.result.checkpoint.params.names())
        CHECK(bits_equal(a.result.checkpoint.params.value(name),
                         b.result.checkpoint.params.value(name)));

    TrainedFixture c(ModelKind::Gmn, 8, 2, 2, 2025);
    CHECK(pipeline::train_log_to_jsonl(a.result.log) !=
          pipeline::train_log_to_jsonl(c.result.log));
}

TEST_CASE("training requires both classes") {
    SynthCorpus corpus = gen_synthetic_corpus({2, 3, 502});
    std::vector<FragmentPair> only_true;
    for (auto& p : corpus.pairs)
        if (p.label > 0) only_true.push_back(p);
    ModelConfig model;
    model.kind = ModelKind::Ggnn;
    model.dim = 4;
    model.steps = 1;
    TrainHyper hyper;
    CHECK_THROWS_AS(
        pipeline::train(model, hyper, 1, corpus.store, only_true, corpus.pairs), Error);
    CHECK_THROWS_AS(pipeline::train(model, hyper, 1, corpus.store, {}, corpus.pairs), Error);
}

TEST_CASE("config violations are reported together") {
    SynthCorpus corpus = gen_synthetic_corpus({2, 2, 503});
    ModelConfig model;
    model.kind = ModelKind::Ggnn;
    model.dim = 0;
    model.steps = 0;
    TrainHyper hyper;
    hyper.lr = -1;
    hyper.batch_size = 0;
    try {
        pipeline::train(model, hyper, 1, corpus.store, corpus.pairs, {});
        FAIL("expected config error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Config);
        std::string msg = e.what();
        CHECK(msg.find("dim") != std::string::npos);
        CHECK(msg.find("steps") != std::string::npos);
        CHECK(msg.find("lr") != std::string::npos);
        CHECK(msg.find("batch_size") != std::string::npos);
    }
}

TEST_CASE("predict applies the inclusive threshold and flags unknown fragments") {
    TrainedFixture f(ModelKind::Ggnn, 8, 2, 1, 606);
    std::vector<FragmentPair> pairs = {f.split.test.begin(), f.split.test.end()};
    REQUIRE(!pairs.empty());
    std::vector<double> scores =
        pipeline::score_pairs(f.result.checkpoint, f.corpus.store, pairs);
    // sigma exactly at a score: that pair is a positive
    auto preds =
        pipeline::predict(f.result.checkpoint, scores[0], pairs, f.corpus.store);
    CHECK(preds[0].verdict);

    auto empty = pipeline::predict(f.result.checkpoint, 0.0, {}, f.corpus.store);
    CHECK(empty.empty());

    std::vector<FragmentPair> unknown = {{"nope", pairs[0].id2, 1, std::nullopt}};
    CHECK_THROWS_AS(pipeline::predict(f.result.checkpoint, 0.0, unknown, f.corpus.store),
                    Error);
}

TEST_CASE("raising the threshold never increases the positive count") {
    TrainedFixture f(ModelKind::Ggnn, 8, 2, 1, 607);
    std::vector<double> scores =
        pipeline::score_pairs(f.result.checkpoint, f.corpus.store, f.corpus.pairs);
    long prev = -1;
    for (double sigma : {-1.0, -0.5, 0.0, 0.5, 1.0}) {
        long count = 0;
        for (auto& p :
             pipeline::predict(f.result.checkpoint, sigma, f.corpus.pairs, f.corpus.store))
            if (p.verdict) ++count;
        if (prev >= 0) CHECK(count <= prev);
        prev = count;
        (void)scores;
    }
}

TEST_CASE("scores are identical across worker counts and batch groupings") {
    TrainedFixture f(ModelKind::Gmn, 8, 2, 1, 608);
    std::vector<double> serial =
        pipeline::score_pairs(f.result.checkpoint, f.corpus.store, f.corpus.pairs, 1);
    std::vector<double> parallel =
        pipeline::score_pairs(f.result.checkpoint, f.corpus.store, f.corpus.pairs, 3);
    REQUIRE(serial.size() == parallel.size());
    for (size_t i = 0; i < serial.size(); ++i) CHECK(serial[i] == parallel[i]);

    // scoring the same pairs in two different groupings changes nothing
    std::vector<FragmentPair> first_half(f.corpus.pairs.begin(),
                                         f.corpus.pairs.begin() + 5);
    std::vector<double> split_scores =
        pipeline::score_pairs(f.result.checkpoint, f.corpus.store, first_half, 1);
    for (size_t i = 0; i < split_scores.size(); ++i) CHECK(split_scores[i] == serial[i]);
}

TEST_CASE("checkpoints round-trip through disk bit-identically") {
    TrainedFixture f(ModelKind::Gmn, 6, 2, 1, 609);
    std::string path = "pipeline_ck_tmp.json";
    save_checkpoint(f.result.checkpoint, path);
    Checkpoint loaded = load_checkpoint(path);
    CHECK(loaded.model.kind == ModelKind::Gmn);
    CHECK(loaded.vocab.labels() == f.result.checkpoint.vocab.labels());
    for (const std::string& name : f.result.checkpoint.params.names())
        CHECK(bits_equal(loaded.params.value(name), f.result.checkpoint.params.value(name)));

    // scores from the restored checkpoint are bit-identical
    std::vector<double> a =
        pipeline::score_pairs(f.result.checkpoint, f.corpus.store, f.corpus.pairs);
    std::vector<double> b = pipeline::score_pairs(loaded, f.corpus.store, f.corpus.pairs);
    for (size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
    std::remove(path.c_str());
}

TEST_CASE("ggnn and gmn checkpoints are distinguishable for attention export") {
    TrainedFixture f(ModelKind::Ggnn, 6, 1, 1, 610);
    CHECK_THROWS_AS(pipeline::attention_for_pair(f.result.checkpoint, f.corpus.store,
                                                 f.corpus.pairs[0].id1,
                                                 f.corpus.pairs[0].id2),
                    Error);
}

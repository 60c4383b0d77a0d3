#include "faast/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

#include <nlohmann/json.hpp>

#include "faast/errors.hpp"
#include "faast/ggnn.hpp"
#include "faast/metrics.hpp"

namespace faast::pipeline {

double similarity(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    if (a.size() != b.size()) raise(ErrorCode::Shape, "similarity dim mismatch");
    double na = a.norm(), nb = b.norm();
    if (na == 0.0 || nb == 0.0) raise(ErrorCode::ZeroVector, "cosine of zero vector");
    return a.dot(b) / (na * nb);
}

namespace {

/// d(cosine)/d(a) for fixed b.
Eigen::VectorXd cosine_grad(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double s) {
    double na = a.norm(), nb = b.norm();
    return b / (na * nb) - s * a / (na * na);
}

/// Graphs encoded against one vocabulary, cached per fragment id.
class EncodedStore {
public:
    EncodedStore(FragmentStore& store, const Vocabulary& vocab)
        : store_(store), vocab_(vocab) {}

    const EncodedGraph& get(const std::string& id) {
        auto it = cache_.find(id);
        if (it != cache_.end()) return it->second;
        const FlowGraph& graph = store_.graph(id);
        auto [pos, _] = cache_.emplace(id, encode_graph(graph, vocab_));
        return pos->second;
    }

private:
    FragmentStore& store_;
    const Vocabulary& vocab_;
    std::map<std::string, EncodedGraph> cache_;
};

double forward_score(const ModelConfig& model, nn::ParamStore& params,
                     const EncodedGraph& g1, const EncodedGraph& g2, GgnnTrace* t1,
                     GgnnTrace* t2, GmnTrace* tp, Eigen::VectorXd* hg1,
                     Eigen::VectorXd* hg2) {
    if (model.kind == ModelKind::Ggnn) {
        *hg1 = ggnn_embed_graph(g1, model, params, t1);
        *hg2 = ggnn_embed_graph(g2, model, params, t2);
    } else {
        GmnPairResult r = gmn_embed_pair(g1, g2, model, params, tp);
        *hg1 = r.hg1;
        *hg2 = r.hg2;
    }
    return similarity(*hg1, *hg2);
}

void backward_score(const ModelConfig& model, nn::ParamStore& params, const EncodedGraph& g1,
                    const EncodedGraph& g2, const GgnnTrace& t1, const GgnnTrace& t2,
                    const GmnTrace& tp, const Eigen::VectorXd& hg1, const Eigen::VectorXd& hg2,
                    double score, double dscore) {
    Eigen::VectorXd dh1 = dscore * cosine_grad(hg1, hg2, score);
    Eigen::VectorXd dh2 = dscore * cosine_grad(hg2, hg1, score);
    if (model.kind == ModelKind::Ggnn) {
        ggnn_backward(g1, model, params, t1, dh1);
        ggnn_backward(g2, model, params, t2, dh2);
    } else {
        gmn_backward(g1, g2, model, params, tp, dh1, dh2);
    }
}

void validate_hyper(const ModelConfig& model, const TrainHyper& hyper) {
    std::vector<std::string> violations;
    if (model.dim < 1) violations.push_back("dim must be >= 1");
    if (model.steps < 1) violations.push_back("steps must be >= 1");
    if (hyper.lr < 0 || !std::isfinite(hyper.lr)) violations.push_back("lr must be nonnegative");
    if (hyper.batch_size < 1) violations.push_back("batch_size must be >= 1");
    if (hyper.epochs < 1) violations.push_back("epochs must be >= 1");
    if (hyper.balance_ratio <= 0) violations.push_back("balance_ratio must be positive");
    if (hyper.min_count < 1) violations.push_back("min_count must be >= 1");
    if (!violations.empty()) {
        std::string msg = "invalid training config:";
        for (auto& v : violations) msg += "\n  - " + v;
        raise(ErrorCode::Config, msg);
    }
}

}  // namespace

TrainResult train(const ModelConfig& model, const TrainHyper& hyper, std::uint64_t seed,
                  FragmentStore& store, const std::vector<FragmentPair>& train_pairs,
                  const std::vector<FragmentPair>& valid_pairs) {
    validate_hyper(model, hyper);
    if (train_pairs.empty()) raise(ErrorCode::EmptyDataset, "no training pairs");

    std::vector<FragmentPair> trues, falses;
    for (const FragmentPair& p : train_pairs)
        (p.label > 0 ? trues : falses).push_back(p);
    if (trues.empty() || falses.empty())
        raise(ErrorCode::EmptyDataset, "training needs both true and false pairs");

    // Graphs for every referenced fragment; vocabulary over the whole store.
    std::vector<const FlowGraph*> graphs;
    for (const std::string& id : store.ids()) graphs.push_back(&store.graph(id));
    for (const FragmentPair& p : train_pairs) {
        store.fragment(p.id1);
        store.fragment(p.id2);
    }
    Vocabulary vocab = build_vocab(graphs, hyper.min_count);

    nn::Rng rng(seed);
    Checkpoint current;
    current.model = model;
    current.hyper = hyper;
    current.seed = seed;
    current.vocab = vocab;
    init_model_params(current.params, model, vocab.size(), rng);

    EncodedStore encoded(store, vocab);
    std::vector<int> valid_labels;
    for (const FragmentPair& p : valid_pairs) valid_labels.push_back(p.label);

    TrainResult result;
    result.checkpoint = current;
    result.best_f1 = -1.0;

    GgnnTrace t1, t2;
    GmnTrace tp;
    for (int epoch = 1; epoch <= hyper.epochs; ++epoch) {
        // Fresh balanced view: keep all true pairs, re-draw false pairs.
        size_t want_false = std::min(
            falses.size(),
            static_cast<size_t>(std::llround(hyper.balance_ratio * double(trues.size()))));
        std::vector<FragmentPair> epoch_pairs = trues;
        for (size_t idx : rng.sample_indices(falses.size(), want_false))
            epoch_pairs.push_back(falses[idx]);
        rng.shuffle(epoch_pairs);

        double loss_sum = 0.0;
        size_t done = 0;
        while (done < epoch_pairs.size()) {
            size_t batch = std::min(static_cast<size_t>(hyper.batch_size),
                                    epoch_pairs.size() - done);
            for (size_t b = 0; b < batch; ++b) {
                const FragmentPair& pair = epoch_pairs[done + b];
                const EncodedGraph& g1 = encoded.get(pair.id1);
                const EncodedGraph& g2 = encoded.get(pair.id2);
                Eigen::VectorXd hg1, hg2;
                double score = forward_score(model, current.params, g1, g2, &t1, &t2, &tp,
                                             &hg1, &hg2);
                auto [loss, dscore] = nn::mse_loss(score, pair.label);
                if (!std::isfinite(loss))
                    raise(ErrorCode::NonFiniteLoss,
                          "non-finite loss at epoch " + std::to_string(epoch) + ", pair (" +
                              pair.id1 + ", " + pair.id2 + ")");
                loss_sum += loss;
                backward_score(model, current.params, g1, g2, t1, t2, tp, hg1, hg2, score,
                               dscore / static_cast<double>(batch));
            }
            nn::adam_step(current.params, hyper.lr);
            done += batch;
        }
        if (!current.params.finite())
            raise(ErrorCode::NonFiniteLoss,
                  "parameters left the finite range after epoch " + std::to_string(epoch));

        TrainLogEntry entry;
        entry.epoch = epoch;
        entry.train_loss = loss_sum / static_cast<double>(epoch_pairs.size());
        if (!valid_pairs.empty()) {
            std::vector<double> scores = score_pairs(current, store, valid_pairs, 1);
            ThresholdResult tuned = tune_threshold(scores, valid_labels);
            metrics::PrfResult r = metrics::prf(scores, valid_labels, tuned.sigma);
            entry.valid_p = r.precision;
            entry.valid_r = r.recall;
            entry.valid_f1 = r.f1;
            entry.sigma = tuned.sigma;
            if (r.f1 > result.best_f1) {
                result.best_f1 = r.f1;
                result.best_sigma = tuned.sigma;
                result.best_epoch = epoch;
                result.checkpoint = current;
            }
        } else {
            result.checkpoint = current;
            result.best_epoch = epoch;
        }
        result.log.push_back(entry);
    }
    if (valid_pairs.empty()) result.checkpoint = current;
    return result;
}

std::vector<double> score_pairs(const Checkpoint& checkpoint, FragmentStore& store,
                                const std::vector<FragmentPair>& pairs, int workers) {
    // Graph building and encoding stay on this thread; scoring is pure.
    EncodedStore encoded(store, checkpoint.vocab);
    std::vector<std::pair<const EncodedGraph*, const EncodedGraph*>> jobs;
    jobs.reserve(pairs.size());
    for (const FragmentPair& p : pairs) jobs.emplace_back(&encoded.get(p.id1), &encoded.get(p.id2));

    std::vector<double> scores(pairs.size(), 0.0);
    // ParamStore is read-only during forward passes.
    nn::ParamStore& params = const_cast<nn::ParamStore&>(checkpoint.params);
    auto run_range = [&](size_t begin, size_t end) {
        for (size_t i = begin; i < end; ++i) {
            Eigen::VectorXd hg1, hg2;
            scores[i] = forward_score(checkpoint.model, params, *jobs[i].first,
                                      *jobs[i].second, nullptr, nullptr, nullptr, &hg1, &hg2);
        }
    };
    if (workers <= 1 || pairs.size() < 2) {
        run_range(0, jobs.size());
        return scores;
    }
    size_t n_threads = std::min(static_cast<size_t>(workers), jobs.size());
    std::vector<std::thread> threads;
    size_t chunk = (jobs.size() + n_threads - 1) / n_threads;
    for (size_t t = 0; t < n_threads; ++t) {
        size_t begin = t * chunk;
        size_t end = std::min(jobs.size(), begin + chunk);
        if (begin < end) threads.emplace_back(run_range, begin, end);
    }
    for (auto& th : threads) th.join();
    return scores;
}

ThresholdResult tune_threshold(const std::vector<double>& scores,
                               const std::vector<int>& labels) {
    if (scores.size() != labels.size())
        raise(ErrorCode::LengthMismatch, "tune_threshold scores/labels");
    long pos = std::count_if(labels.begin(), labels.end(), [](int y) { return y > 0; });
    long neg = static_cast<long>(labels.size()) - pos;
    if (pos == 0 || neg == 0)
        raise(ErrorCode::DegenerateValidation,
              "threshold tuning needs both classes in the validation set");

    // Candidate cuts at every observed score (verdict is score >= sigma).
    std::vector<double> cuts = scores;
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    std::vector<size_t> order(scores.size());
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return scores[a] < scores[b]; });

    // For cut k: positives are all samples with score >= cuts[k].
    // Walk ascending, maintaining suffix true/total counts.
    size_t n = scores.size();
    std::vector<long> suffix_tp(cuts.size()), suffix_pos_count(cuts.size());
    {
        size_t i = n;  // index into order, walking backwards
        long tp = 0, cnt = 0;
        for (size_t k = cuts.size(); k-- > 0;) {
            while (i > 0 && scores[order[i - 1]] >= cuts[k]) {
                --i;
                ++cnt;
                if (labels[order[i]] > 0) ++tp;
            }
            suffix_tp[k] = tp;
            suffix_pos_count[k] = cnt;
        }
    }

    // F1 = 2TP / (2TP + FP + FN); compare exactly via cross multiplication.
    auto f1_num_den = [&](size_t k) -> std::pair<long, long> {
        long tp = suffix_tp[k];
        long fp = suffix_pos_count[k] - tp;
        long fn = pos - tp;
        return {2 * tp, 2 * tp + fp + fn};
    };
    size_t best = 0;
    std::vector<size_t> optimal;
    for (size_t k = 0; k < cuts.size(); ++k) {
        auto [n1, d1] = f1_num_den(k);
        auto [n0, d0] = f1_num_den(best);
        long long lhs = static_cast<long long>(n1) * d0;
        long long rhs = static_cast<long long>(n0) * d1;
        if (lhs > rhs) {
            best = k;
            optimal.assign(1, k);
        } else if (lhs == rhs) {
            optimal.push_back(k);
        }
    }
    // First contiguous run of optimal cuts; sigma at the midpoint of the
    // score interval that realizes it.
    size_t lo = optimal[0], hi = optimal[0];
    for (size_t i = 1; i < optimal.size() && optimal[i] == hi + 1; ++i) hi = optimal[i];
    double lower = lo > 0 ? cuts[lo - 1] : cuts[lo];
    double sigma = (lower + cuts[hi]) / 2.0;

    std::vector<int> labels_copy = labels;
    metrics::PrfResult r = metrics::prf(scores, labels_copy, sigma);
    return {sigma, r.f1};
}

std::vector<Prediction> predict(const Checkpoint& checkpoint, double sigma,
                                const std::vector<FragmentPair>& pairs, FragmentStore& store,
                                int workers) {
    std::vector<double> scores = score_pairs(checkpoint, store, pairs, workers);
    std::vector<Prediction> out;
    out.reserve(pairs.size());
    for (size_t i = 0; i < pairs.size(); ++i)
        out.push_back({pairs[i].id1, pairs[i].id2, scores[i], scores[i] >= sigma});
    return out;
}

GmnPairResult attention_for_pair(const Checkpoint& checkpoint, FragmentStore& store,
                                 const std::string& id1, const std::string& id2) {
    if (checkpoint.model.kind != ModelKind::Gmn)
        raise(ErrorCode::ModelKindMismatch, "attention export needs a gmn checkpoint");
    EncodedStore encoded(store, checkpoint.vocab);
    nn::ParamStore& params = const_cast<nn::ParamStore&>(checkpoint.params);
    return gmn_embed_pair(encoded.get(id1), encoded.get(id2), checkpoint.model, params,
                          nullptr);
}

std::string train_log_to_jsonl(const std::vector<TrainLogEntry>& log) {
    std::string out;
    for (const TrainLogEntry& e : log) {
        out += nlohmann::json{{"epoch", e.epoch},
                              {"train_loss", e.train_loss},
                              {"valid_P", e.valid_p},
                              {"valid_R", e.valid_r},
                              {"valid_F1", e.valid_f1},
                              {"sigma", e.sigma}}
                   .dump() +
               "\n";
    }
    return out;
}

}  // namespace faast::pipeline

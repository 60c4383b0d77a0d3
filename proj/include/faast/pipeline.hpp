#pragma once

#include <string>
#include <vector>

#include "faast/checkpoint.hpp"
#include "faast/dataset.hpp"
#include "faast/gmn.hpp"

namespace faast::pipeline {

/// Cosine similarity; throws Error{ZeroVector} on a zero-norm input.
double similarity(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

struct TrainLogEntry {
    int epoch = 0;
    double train_loss = 0;
    double valid_p = 0, valid_r = 0, valid_f1 = 0;
    double sigma = 0;
};

struct TrainResult {
    Checkpoint checkpoint;  // best validation-F1 parameters
    std::vector<TrainLogEntry> log;
    int best_epoch = 0;
    double best_f1 = 0;
    double best_sigma = 0;
};

/// Full training loop: per epoch, downsample false pairs to the configured
/// ratio (fresh seeded draw), shuffle, minibatch MSE against +-1 labels,
/// Adam; evaluate on the validation pairs with the best threshold and keep
/// the best-F1 parameter snapshot. Throws Error{NonFiniteLoss} with
/// diagnostics when the loss leaves the finite range.
TrainResult train(const ModelConfig& model, const TrainHyper& hyper, std::uint64_t seed,
                  FragmentStore& store, const std::vector<FragmentPair>& train_pairs,
                  const std::vector<FragmentPair>& valid_pairs);

/// Similarity scores for the pairs, in order. `workers` > 1 scores in
/// parallel; results are identical to the serial path.
std::vector<double> score_pairs(const Checkpoint& checkpoint, FragmentStore& store,
                                const std::vector<FragmentPair>& pairs, int workers = 1);

struct ThresholdResult {
    double sigma = 0;
    double f1 = 0;
};

/// The threshold maximizing F1 on the given scores, candidates taken at
/// every observed score; within the optimal interval the midpoint is
/// returned. Throws Error{DegenerateValidation} when one class is absent.
ThresholdResult tune_threshold(const std::vector<double>& scores,
                               const std::vector<int>& labels);

struct Prediction {
    std::string id1, id2;
    double score = 0;
    bool verdict = false;
};

/// Inclusive decision rule: verdict = (score >= sigma).
std::vector<Prediction> predict(const Checkpoint& checkpoint, double sigma,
                                const std::vector<FragmentPair>& pairs, FragmentStore& store,
                                int workers = 1);

/// Attention of the final propagation step for one pair (GMN checkpoints).
GmnPairResult attention_for_pair(const Checkpoint& checkpoint, FragmentStore& store,
                                 const std::string& id1, const std::string& id2);

std::string train_log_to_jsonl(const std::vector<TrainLogEntry>& log);

}  // namespace faast::pipeline

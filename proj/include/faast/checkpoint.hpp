#pragma once

#include <cstdint>
#include <string>

#include "faast/model.hpp"
#include "faast/nn.hpp"
#include "faast/vocab.hpp"

namespace faast {

/// Optimization hyperparameters; architecture lives in ModelConfig.
struct TrainHyper {
    double lr = 0.001;
    int batch_size = 32;
    int epochs = 10;
    double balance_ratio = 1.0;  // false:true ratio after per-epoch downsampling
    int min_count = 1;           // vocabulary cutoff
};

/// Everything needed to restore bit-identical inference: parameters,
/// vocabulary, architecture, hyperparameter block and seed.
struct Checkpoint {
    ModelConfig model;
    TrainHyper hyper;
    std::uint64_t seed = 0;
    Vocabulary vocab;
    nn::ParamStore params;
};

void save_checkpoint(const Checkpoint& checkpoint, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace faast

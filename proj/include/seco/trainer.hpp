#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "seco/dataset.hpp"
#include "seco/encoder.hpp"
#include "seco/losses.hpp"
#include "seco/memory_queue.hpp"
#include "seco/rng.hpp"

namespace seco {

struct TrainConfig {
    std::uint32_t epochs = 200;
    std::uint32_t batch_size = 32;
    double lr0 = 0.05;
    double sgd_momentum = 0.9;
    double tau = 0.1;
    double alpha = 0.999;  // key-encoder momentum
    std::uint32_t queue_capacity = 1024;
    std::array<double, 3> loss_weights = {1.0, 1.0, 1.0};
    std::uint64_t seed = 1;
    std::vector<std::uint32_t> backbone_widths = {64, 64};
    std::uint32_t head_hidden_width = 64;
    std::uint32_t embed_dim = 16;
    AugmentConfig augment;

    void validate() const;
    EncoderArch arch(std::uint32_t raw_dim) const;
};

// Everything the training loop mutates. The key encoder starts as an exact
// copy of the query encoder and afterwards moves only through momentum
// updates; gradients never touch it.
struct TrainState {
    EncoderParams query_encoder;
    EncoderParams key_encoder;
    OrderClassifierParams order_classifier;
    std::vector<Tensor> velocities;  // parallel to optimized_tensors()
    KeyQueue queue;
    std::uint64_t step = 0;
    Rng rng;

    // Tensors the optimizer updates, in checkpoint order: query encoder
    // layers then the order classifier.
    std::vector<Tensor*> optimized_tensors();
};

struct EpochMetrics {
    std::uint32_t epoch = 0;
    double lr = 0.0;
    double inter = 0.0;
    double intra = 0.0;
    double temporal = 0.0;
    double total = 0.0;
};

struct TrainResult {
    TrainState state;
    std::vector<EpochMetrics> metrics;
};

TrainState init_state(const TrainConfig& cfg, std::uint32_t raw_dim);

// lr0 * (1 + cos(pi * step / total_steps)) / 2.
double cosine_lr(std::uint64_t step, std::uint64_t total_steps, double lr0);

// One optimization step over a batch: encode, losses on a pre-step queue
// snapshot, backward, SGD-with-momentum on the query path, momentum update
// of the key encoder, then enqueue all three keys of every sample. Returns
// the loss breakdown averaged over the batch (raw components; weighted total).
LossBreakdown train_step(TrainState& state, const TrainConfig& cfg,
                         std::span<const TripletSample> batch, double lr);

// Full loop: epochs x ceil(N / batch_size) steps with per-epoch reshuffles.
// Deterministic given cfg and the dataset.
TrainResult train(const TrainConfig& cfg, const std::vector<SequenceRecord>& records);

// Metrics text: header "epoch,lr,inter,intra,temporal,total" then one row per
// epoch, reals at 9 significant digits.
std::string format_metrics(const std::vector<EpochMetrics>& metrics);

// Checkpoint file, little-endian: magic "SECK", u32 version (= 1), u32 layer
// count, per layer u32 rows and cols, then query encoder, key encoder, and
// order classifier as f64 in descriptor order. Queue and velocities are not
// persisted.
struct Checkpoint {
    EncoderParams query_encoder;
    EncoderParams key_encoder;
    OrderClassifierParams order_classifier;
};

void save_checkpoint(const TrainState& state, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace seco

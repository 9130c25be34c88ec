#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "seco/dataset.hpp"
#include "seco/encoder.hpp"

namespace seco {

// One row per sequence: the frozen backbone features averaged over frames.
struct FeatureMatrix {
    std::vector<std::vector<double>> rows;
    std::vector<std::uint32_t> labels;

    std::size_t width() const { return rows.empty() ? 0 : rows.front().size(); }
};

struct ProbeConfig {
    std::uint32_t iterations = 500;
    double lr = 0.5;
    std::uint32_t order_samples = 2000;
    std::uint64_t seed = 1;
    // When false (default) the order triplets are evaluated un-augmented;
    // when true they go through the train-time augmentation.
    bool eval_augment = false;
};

struct ProbeResult {
    double top1 = 0.0;
    std::vector<double> per_class;  // accuracy per class id
    std::size_t train_rows = 0;
    std::size_t eval_rows = 0;
};

// Frozen-feature extraction: every frame through the backbone only (no
// augmentation, no head, no normalization), averaged per sequence.
FeatureMatrix extract_features(const EncoderParams& encoder,
                               const std::vector<SequenceRecord>& records);

// Multinomial logistic probe: features standardized by train-split mean and
// stddev only, then a single linear layer fit by full-batch gradient descent
// on softmax cross-entropy for a fixed iteration budget. Reports eval top-1.
ProbeResult linear_probe(const FeatureMatrix& train, const FeatureMatrix& eval,
                         const ProbeConfig& cfg);

// Fraction of sampled triplets whose order the scorer gets right, with the
// query through the query encoder and keys through the key encoder.
double order_accuracy(const EncoderParams& query_encoder, const EncoderParams& key_encoder,
                      const OrderClassifierParams& classifier,
                      const std::vector<SequenceRecord>& records, const AugmentConfig& augment,
                      std::uint32_t n_samples, std::uint64_t seed);

// Text report: rows "metric,value" with 6 decimal places: top1, per-class
// acc_c<k>, order_acc.
std::string format_probe_report(const ProbeResult& probe, double order_acc);

}  // namespace seco

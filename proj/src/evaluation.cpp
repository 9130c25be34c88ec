#include "seco/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "seco/errors.hpp"
#include "seco/graph.hpp"
#include "seco/rng.hpp"

namespace seco {

FeatureMatrix extract_features(const EncoderParams& encoder,
                               const std::vector<SequenceRecord>& records) {
    if (records.empty()) throw ArgumentError("extract_features: no records");
    FeatureMatrix fm;
    fm.rows.reserve(records.size());
    fm.labels.reserve(records.size());
    for (const SequenceRecord& rec : records) {
        if (rec.frames.front().size() != encoder.raw_dim()) {
            throw ConfigError("extract_features: dataset raw_dim " +
                              std::to_string(rec.frames.front().size()) +
                              " does not match encoder input dim " +
                              std::to_string(encoder.raw_dim()));
        }
        std::vector<double> mean(encoder.feature_dim(), 0.0);
        for (const FrameVector& frame : rec.frames) {
            const std::vector<double> f = backbone_features(encoder, frame);
            for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += f[i];
        }
        for (double& v : mean) v /= static_cast<double>(rec.frames.size());
        fm.rows.push_back(std::move(mean));
        fm.labels.push_back(rec.class_id);
    }
    return fm;
}

ProbeResult linear_probe(const FeatureMatrix& train, const FeatureMatrix& eval,
                         const ProbeConfig& cfg) {
    if (train.rows.empty() || eval.rows.empty()) throw ArgumentError("linear_probe: empty split");
    if (train.width() != eval.width()) {
        throw ConfigError("linear_probe: train width " + std::to_string(train.width()) +
                          " does not match eval width " + std::to_string(eval.width()));
    }
    const std::size_t width = train.width();

    std::set<std::uint32_t> class_set(train.labels.begin(), train.labels.end());
    const std::uint32_t num_classes = *class_set.rbegin() + 1;
    for (std::uint32_t c = 0; c < num_classes; ++c) {
        if (!class_set.count(c)) {
            throw ConfigError("linear_probe: class " + std::to_string(c) +
                              " is absent from the train split");
        }
    }
    for (std::uint32_t label : eval.labels) {
        if (label >= num_classes) {
            throw ConfigError("linear_probe: eval label " + std::to_string(label) +
                              " is absent from the train split");
        }
    }

    // Standardization statistics come from the train split alone.
    std::vector<double> mean(width, 0.0), stddev(width, 0.0);
    for (const auto& row : train.rows) {
        for (std::size_t i = 0; i < width; ++i) mean[i] += row[i];
    }
    for (double& v : mean) v /= static_cast<double>(train.rows.size());
    for (const auto& row : train.rows) {
        for (std::size_t i = 0; i < width; ++i) {
            stddev[i] += (row[i] - mean[i]) * (row[i] - mean[i]);
        }
    }
    for (double& v : stddev) v = std::sqrt(v / static_cast<double>(train.rows.size()));

    auto standardize = [&](const FeatureMatrix& fm) {
        Tensor out({fm.rows.size(), width});
        for (std::size_t r = 0; r < fm.rows.size(); ++r) {
            for (std::size_t i = 0; i < width; ++i) {
                out.at(r, i) = stddev[i] > 1e-12 ? (fm.rows[r][i] - mean[i]) / stddev[i] : 0.0;
            }
        }
        return out;
    };
    const Tensor train_x = standardize(train);
    const Tensor eval_x = standardize(eval);
    std::vector<int> train_y(train.labels.begin(), train.labels.end());

    // Full-batch gradient descent on softmax cross-entropy, zero init.
    Tensor weight({width, num_classes});
    Tensor bias({num_classes});
    for (std::uint32_t it = 0; it < cfg.iterations; ++it) {
        Graph g;
        NodeRef w = g.parameter(weight);
        NodeRef b = g.parameter(bias);
        NodeRef logits = g.linear(g.constant(train_x), w, b);
        NodeRef loss = g.softmax_cross_entropy_mean(logits, train_y);
        g.backward(loss);
        const Tensor& gw = g.grad(w);
        const Tensor& gb = g.grad(b);
        for (std::size_t i = 0; i < weight.size(); ++i) weight[i] -= cfg.lr * gw[i];
        for (std::size_t i = 0; i < bias.size(); ++i) bias[i] -= cfg.lr * gb[i];
    }

    ProbeResult result;
    result.train_rows = train.rows.size();
    result.eval_rows = eval.rows.size();
    result.per_class.assign(num_classes, 0.0);
    std::vector<std::size_t> class_counts(num_classes, 0);
    std::size_t correct = 0;
    for (std::size_t r = 0; r < eval.rows.size(); ++r) {
        std::size_t best = 0;
        double best_score = -1e300;
        for (std::uint32_t c = 0; c < num_classes; ++c) {
            double score = bias[c];
            for (std::size_t i = 0; i < width; ++i) score += eval_x.at(r, i) * weight.at(i, c);
            if (score > best_score) {
                best_score = score;
                best = c;
            }
        }
        class_counts[eval.labels[r]] += 1;
        if (best == eval.labels[r]) {
            correct += 1;
            result.per_class[eval.labels[r]] += 1.0;
        }
    }
    for (std::uint32_t c = 0; c < num_classes; ++c) {
        if (class_counts[c] > 0) result.per_class[c] /= static_cast<double>(class_counts[c]);
    }
    result.top1 = static_cast<double>(correct) / static_cast<double>(eval.rows.size());
    return result;
}

double order_accuracy(const EncoderParams& query_encoder, const EncoderParams& key_encoder,
                      const OrderClassifierParams& classifier,
                      const std::vector<SequenceRecord>& records, const AugmentConfig& augment,
                      std::uint32_t n_samples, std::uint64_t seed) {
    if (records.empty()) throw ArgumentError("order_accuracy: no records");
    if (n_samples == 0) throw ArgumentError("order_accuracy: n_samples must be positive");
    Rng rng(seed);
    std::size_t correct = 0;
    for (std::uint32_t i = 0; i < n_samples; ++i) {
        const SequenceRecord& seq = records[rng.below(records.size())];
        const TripletSample sample = sample_triplet(seq, rng, augment);
        const Embedding q = encode(query_encoder, sample.query);
        const Embedding k2 = encode(key_encoder, sample.key2);
        const Embedding k3 = encode(key_encoder, sample.key3);
        const int predicted = order_probability(q, k2, k3, classifier) >= 0.5 ? 1 : 0;
        if (predicted == sample.label) correct += 1;
    }
    return static_cast<double>(correct) / static_cast<double>(n_samples);
}

std::string format_probe_report(const ProbeResult& probe, double order_acc) {
    std::string out;
    char buf[64];
    std::snprintf(buf, sizeof(buf), "top1,%.6f\n", probe.top1);
    out += buf;
    for (std::size_t c = 0; c < probe.per_class.size(); ++c) {
        std::snprintf(buf, sizeof(buf), "acc_c%zu,%.6f\n", c, probe.per_class[c]);
        out += buf;
    }
    std::snprintf(buf, sizeof(buf), "order_acc,%.6f\n", order_acc);
    out += buf;
    return out;
}

}  // namespace seco

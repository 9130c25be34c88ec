#include "seco/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <utility>

#include "seco/errors.hpp"
#include "wire.hpp"

namespace seco {

namespace {

constexpr char kCheckpointMagic[4] = {'S', 'E', 'C', 'K'};
constexpr std::uint32_t kCheckpointVersion = 1;

std::vector<const Tensor*> checkpoint_order(const EncoderParams& q, const EncoderParams& k,
                                            const OrderClassifierParams& phi) {
    std::vector<const Tensor*> list = q.tensors();
    for (const Tensor* t : k.tensors()) list.push_back(t);
    list.push_back(&phi.weight);
    list.push_back(&phi.bias);
    return list;
}

}  // namespace

void TrainConfig::validate() const {
    if (!(lr0 > 0.0)) throw ConfigError("lr0 must be positive");
    if (!(tau > 0.0)) throw ConfigError("tau must be positive");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha must be in [0, 1]");
    if (!(sgd_momentum >= 0.0 && sgd_momentum < 1.0)) {
        throw ConfigError("sgd_momentum must be in [0, 1)");
    }
    if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
    if (queue_capacity < 1) throw ConfigError("queue_capacity must be at least 1");
    for (double w : loss_weights) {
        if (w < 0.0) throw ConfigError("loss weights must be nonnegative");
    }
    if (backbone_widths.empty()) throw ConfigError("backbone_widths must not be empty");
    for (std::uint32_t w : backbone_widths) {
        if (w == 0) throw ConfigError("backbone widths must be positive");
    }
    if (head_hidden_width == 0 || embed_dim == 0) {
        throw ConfigError("head widths must be positive");
    }
    augment.validate();
}

EncoderArch TrainConfig::arch(std::uint32_t raw_dim) const {
    EncoderArch arch;
    arch.raw_dim = raw_dim;
    arch.backbone_widths = backbone_widths;
    arch.head_hidden_width = head_hidden_width;
    arch.embed_dim = embed_dim;
    return arch;
}

std::vector<Tensor*> TrainState::optimized_tensors() {
    std::vector<Tensor*> list = query_encoder.tensors();
    list.push_back(&order_classifier.weight);
    list.push_back(&order_classifier.bias);
    return list;
}

TrainState init_state(const TrainConfig& cfg, std::uint32_t raw_dim) {
    cfg.validate();
    if (raw_dim == 0) throw ConfigError("raw_dim must be positive");
    Rng init_rng(cfg.seed);
    TrainState state{
        .query_encoder = init_encoder(cfg.arch(raw_dim), init_rng),
        .key_encoder = {},
        .order_classifier = zero_order_classifier(cfg.embed_dim),
        .velocities = {},
        .queue = KeyQueue(cfg.queue_capacity),
        .step = 0,
        .rng = Rng::stream(cfg.seed, 1),
    };
    state.key_encoder = state.query_encoder;  // exact copy
    for (Tensor* t : state.optimized_tensors()) state.velocities.push_back(Tensor::zeros_like(*t));
    return state;
}

double cosine_lr(std::uint64_t step, std::uint64_t total_steps, double lr0) {
    if (total_steps == 0) throw ArgumentError("cosine_lr: total_steps must be positive");
    if (step > total_steps) {
        throw ArgumentError("cosine_lr: step " + std::to_string(step) + " exceeds total_steps " +
                            std::to_string(total_steps));
    }
    const double progress = static_cast<double>(step) / static_cast<double>(total_steps);
    return lr0 * (1.0 + std::cos(std::numbers::pi * progress)) / 2.0;
}

LossBreakdown train_step(TrainState& state, const TrainConfig& cfg,
                         std::span<const TripletSample> batch, double lr) {
    if (batch.empty()) throw ArgumentError("train_step: empty batch");
    const std::size_t batch_size = batch.size();

    // Negatives are frozen before any of this step's keys are enqueued, so a
    // sample never serves as its own negative.
    std::shared_ptr<const Tensor> negatives = state.queue.snapshot_matrix();

    Graph g;
    EncoderLeaves query_leaves = make_encoder_leaves(g, state.query_encoder, true);
    NodeRef phi_w = g.parameter(state.order_classifier.weight);
    NodeRef phi_b = g.parameter(state.order_classifier.bias);

    std::vector<Embedding> step_keys;
    step_keys.reserve(3 * batch_size);
    NodeRef total_sum;
    LossBreakdown sums;
    try {
        for (const TripletSample& sample : batch) {
            NodeRef s_q = encode_node(g, query_leaves, sample.query);
            const Embedding k1 = encode(state.key_encoder, sample.key1);
            const Embedding k2 = encode(state.key_encoder, sample.key2);
            const Embedding k3 = encode(state.key_encoder, sample.key3);

            const Embedding keys[] = {k1, k2, k3};
            NodeRef inter = inter_frame_loss(g, s_q, keys, negatives, cfg.tau);
            NodeRef intra = intra_frame_loss(g, s_q, k1, k2, k3, cfg.tau);
            NodeRef logit = order_logit_node(g, s_q, k2, k3, phi_w, phi_b);
            NodeRef temporal = temporal_order_loss(g, g.sigmoid(logit), sample.label);
            auto [weighted, breakdown] =
                total_loss(g, inter, intra, temporal, cfg.loss_weights, cfg.tau);

            total_sum = total_sum.valid() ? g.add(total_sum, weighted) : weighted;
            sums.inter += breakdown.inter;
            sums.intra += breakdown.intra;
            sums.temporal += breakdown.temporal;
            sums.total += breakdown.total;
            step_keys.push_back(k1);
            step_keys.push_back(k2);
            step_keys.push_back(k3);
        }
    } catch (const ContractError& e) {
        // Inputs are validated dataset frames, so a broken embedding contract
        // here means the optimizer drove the encoder into a degenerate state.
        throw DivergenceError("degenerate forward pass at step " + std::to_string(state.step) +
                              ": " + e.what());
    } catch (const ArgumentError& e) {
        throw DivergenceError("degenerate forward pass at step " + std::to_string(state.step) +
                              ": " + e.what());
    }
    NodeRef batch_loss = g.scale(total_sum, 1.0 / static_cast<double>(batch_size));

    LossBreakdown averaged;
    averaged.inter = sums.inter / static_cast<double>(batch_size);
    averaged.intra = sums.intra / static_cast<double>(batch_size);
    averaged.temporal = sums.temporal / static_cast<double>(batch_size);
    averaged.total = sums.total / static_cast<double>(batch_size);
    averaged.temperature = cfg.tau;
    if (!std::isfinite(averaged.total) || !std::isfinite(averaged.inter) ||
        !std::isfinite(averaged.intra) || !std::isfinite(averaged.temporal)) {
        throw DivergenceError("non-finite loss at step " + std::to_string(state.step));
    }

    g.backward(batch_loss);

    // SGD with momentum: v <- mu * v + grad; p <- p - lr * v.
    std::vector<NodeRef> leaves = query_leaves.all();
    leaves.push_back(phi_w);
    leaves.push_back(phi_b);
    std::vector<Tensor*> params = state.optimized_tensors();
    for (std::size_t t = 0; t < params.size(); ++t) {
        const Tensor& grad = g.grad(leaves[t]);
        Tensor& velocity = state.velocities[t];
        Tensor& param = *params[t];
        for (std::size_t i = 0; i < param.size(); ++i) {
            velocity[i] = cfg.sgd_momentum * velocity[i] + grad[i];
            param[i] -= lr * velocity[i];
        }
        if (!param.all_finite()) {
            throw DivergenceError("non-finite parameters after update at step " +
                                  std::to_string(state.step));
        }
    }

    momentum_update(state.key_encoder, state.query_encoder, cfg.alpha);
    state.queue.enqueue(step_keys);
    state.step += 1;
    return averaged;
}

TrainResult train(const TrainConfig& cfg, const std::vector<SequenceRecord>& records) {
    cfg.validate();
    if (records.empty()) throw ConfigError("train: dataset is empty");
    const std::uint32_t raw_dim = static_cast<std::uint32_t>(records.front().frames.front().size());

    TrainResult result{.state = init_state(cfg, raw_dim), .metrics = {}};
    TrainState& state = result.state;

    const std::size_t n = records.size();
    const std::uint64_t steps_per_epoch = (n + cfg.batch_size - 1) / cfg.batch_size;
    const std::uint64_t total_steps = static_cast<std::uint64_t>(cfg.epochs) * steps_per_epoch;

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;

    for (std::uint32_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        state.rng.shuffle(order);
        EpochMetrics row{.epoch = epoch,
                         .lr = cosine_lr(state.step, total_steps, cfg.lr0),
                         .inter = 0.0,
                         .intra = 0.0,
                         .temporal = 0.0,
                         .total = 0.0};
        std::size_t cursor = 0;
        std::size_t samples_seen = 0;
        while (cursor < n) {
            const std::size_t take = std::min<std::size_t>(cfg.batch_size, n - cursor);
            std::vector<TripletSample> batch;
            batch.reserve(take);
            for (std::size_t b = 0; b < take; ++b) {
                batch.push_back(sample_triplet(records[order[cursor + b]], state.rng, cfg.augment));
            }
            const double lr = cosine_lr(state.step, total_steps, cfg.lr0);
            const LossBreakdown bd = train_step(state, cfg, batch, lr);
            row.inter += bd.inter * static_cast<double>(take);
            row.intra += bd.intra * static_cast<double>(take);
            row.temporal += bd.temporal * static_cast<double>(take);
            cursor += take;
            samples_seen += take;
        }
        row.inter /= static_cast<double>(samples_seen);
        row.intra /= static_cast<double>(samples_seen);
        row.temporal /= static_cast<double>(samples_seen);
        row.total = cfg.loss_weights[0] * row.inter + cfg.loss_weights[1] * row.intra +
                    cfg.loss_weights[2] * row.temporal;
        result.metrics.push_back(row);
    }
    return result;
}

std::string format_metrics(const std::vector<EpochMetrics>& metrics) {
    std::string out = "epoch,lr,inter,intra,temporal,total\n";
    char buf[160];
    for (const EpochMetrics& row : metrics) {
        std::snprintf(buf, sizeof(buf), "%u,%.9g,%.9g,%.9g,%.9g,%.9g\n", row.epoch, row.lr,
                      row.inter, row.intra, row.temporal, row.total);
        out += buf;
    }
    return out;
}

void save_checkpoint(const TrainState& state, const std::string& path) {
    const std::vector<const Tensor*> q = state.query_encoder.tensors();

    std::vector<std::uint8_t> bytes;
    bytes.insert(bytes.end(), kCheckpointMagic, kCheckpointMagic + 4);
    detail::put_u32(bytes, kCheckpointVersion);
    const std::uint32_t layer_count = static_cast<std::uint32_t>(q.size() / 2);
    detail::put_u32(bytes, layer_count);
    for (std::uint32_t l = 0; l < layer_count; ++l) {
        const Tensor& w = *q[2 * l];
        detail::put_u32(bytes, static_cast<std::uint32_t>(w.extent(0)));
        detail::put_u32(bytes, static_cast<std::uint32_t>(w.extent(1)));
    }
    for (const Tensor* t :
         checkpoint_order(state.query_encoder, state.key_encoder, state.order_classifier)) {
        for (std::size_t i = 0; i < t->size(); ++i) detail::put_f64(bytes, (*t)[i]);
    }
    detail::write_file(path, bytes);
}

Checkpoint load_checkpoint(const std::string& path) {
    const std::vector<std::uint8_t> bytes = detail::read_file(path);
    detail::ByteReader reader(bytes.data(), bytes.size(), path);
    reader.expect_magic(kCheckpointMagic);
    const std::uint32_t version = reader.u32("version");
    if (version != kCheckpointVersion) {
        throw FormatError(path + ": unsupported checkpoint version " + std::to_string(version) +
                          ", expected " + std::to_string(kCheckpointVersion));
    }
    const std::uint32_t layer_count = reader.u32("layer count");
    if (layer_count < 3) {
        throw FormatError(path + ": descriptor needs at least 3 layers (backbone + head), got " +
                          std::to_string(layer_count));
    }
    std::vector<std::pair<std::uint32_t, std::uint32_t>> dims;
    for (std::uint32_t l = 0; l < layer_count; ++l) {
        const std::uint32_t rows = reader.u32("layer rows");
        const std::uint32_t cols = reader.u32("layer cols");
        if (rows == 0 || cols == 0) throw FormatError(path + ": zero-sized layer in descriptor");
        if (l > 0 && dims.back().second != rows) {
            throw FormatError(path + ": layer " + std::to_string(l) + " rows " +
                              std::to_string(rows) + " do not chain with previous cols " +
                              std::to_string(dims.back().second));
        }
        dims.emplace_back(rows, cols);
    }

    auto read_encoder = [&]() {
        EncoderParams params;
        for (std::uint32_t l = 0; l < layer_count; ++l) {
            DenseLayer layer{Tensor({dims[l].first, dims[l].second}), Tensor({dims[l].second})};
            for (std::size_t i = 0; i < layer.weight.size(); ++i) {
                layer.weight[i] = reader.f64("weight");
            }
            for (std::size_t i = 0; i < layer.bias.size(); ++i) layer.bias[i] = reader.f64("bias");
            if (l + 2 == layer_count) {
                params.head_hidden = std::move(layer);
            } else if (l + 1 == layer_count) {
                params.head_out = std::move(layer);
            } else {
                params.backbone.push_back(std::move(layer));
            }
        }
        return params;
    };

    Checkpoint ckpt;
    ckpt.query_encoder = read_encoder();
    ckpt.key_encoder = read_encoder();
    const std::size_t d = ckpt.query_encoder.embed_dim();
    ckpt.order_classifier.weight = Tensor({3 * d});
    ckpt.order_classifier.bias = Tensor({1});
    for (std::size_t i = 0; i < 3 * d; ++i) ckpt.order_classifier.weight[i] = reader.f64("classifier weight");
    ckpt.order_classifier.bias[0] = reader.f64("classifier bias");
    reader.expect_consumed();
    return ckpt;
}

}  // namespace seco

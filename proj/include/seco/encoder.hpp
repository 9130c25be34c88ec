#pragma once

#include <cstdint>
#include <vector>

#include "seco/embedding.hpp"
#include "seco/graph.hpp"
#include "seco/rng.hpp"
#include "seco/tensor.hpp"

namespace seco {

struct DenseLayer {
    Tensor weight;  // [in x out]
    Tensor bias;    // [out]
};

// Widths of the encoder stack: raw input -> backbone layers -> projection
// head (hidden layer + output layer). The backbone output (post-activation)
// is the feature used by downstream evaluation; the head only shapes the
// embedding space.
struct EncoderArch {
    std::uint32_t raw_dim = 64;
    std::vector<std::uint32_t> backbone_widths = {64, 64};
    std::uint32_t head_hidden_width = 64;
    std::uint32_t embed_dim = 16;
};

// Full weight set of one encoder. Both the query and key encoders use this
// shape; they differ only in how they are updated.
struct EncoderParams {
    std::vector<DenseLayer> backbone;
    DenseLayer head_hidden;
    DenseLayer head_out;

    std::size_t raw_dim() const { return backbone.front().weight.extent(0); }
    std::size_t feature_dim() const { return backbone.back().weight.extent(1); }
    std::size_t embed_dim() const { return head_out.weight.extent(1); }

    // All tensors in a fixed order: backbone (weight, bias)..., head hidden,
    // head out. The same order is used by the optimizer and the checkpoint.
    std::vector<const Tensor*> tensors() const;
    std::vector<Tensor*> tensors();
    bool same_arch(const EncoderParams& other) const;
};

// Linear scorer over the concatenated (query, key2, key3) embeddings,
// deciding whether the query precedes or follows the keys.
struct OrderClassifierParams {
    Tensor weight;  // [3 * embed_dim]
    Tensor bias;    // [1]
};

// Fan-in uniform initialization: weights in (-sqrt(6/fan_in), +sqrt(6/fan_in)),
// biases zero.
EncoderParams init_encoder(const EncoderArch& arch, Rng& rng);
OrderClassifierParams zero_order_classifier(std::size_t embed_dim);

// Plain (non-differentiable) forward pass: backbone with ReLU between layers,
// head hidden + ReLU, head output, then L2 normalization.
Embedding encode(const EncoderParams& params, const FrameVector& patch);

// Backbone output only (post-activation, before the head); the frozen
// feature used by evaluation.
std::vector<double> backbone_features(const EncoderParams& params, const FrameVector& frame);

// Graph-node handles for one encoder's parameters, for the differentiable
// path. `trainable` controls whether gradients reach the tensors.
struct EncoderLeaves {
    std::vector<std::pair<NodeRef, NodeRef>> backbone;  // (weight, bias)
    std::pair<NodeRef, NodeRef> head_hidden;
    std::pair<NodeRef, NodeRef> head_out;

    std::vector<NodeRef> all() const;
};

EncoderLeaves make_encoder_leaves(Graph& g, const EncoderParams& params, bool trainable);

// Differentiable twin of encode(); produces bitwise-identical values since
// both paths share the same kernels.
NodeRef encode_node(Graph& g, const EncoderLeaves& leaves, const FrameVector& patch);

// In-place convex combination: key <- alpha * key + (1 - alpha) * query,
// elementwise over every weight. No gradient is involved; this is the only
// way the key encoder moves.
void momentum_update(EncoderParams& key, const EncoderParams& query, double alpha);

// P(query precedes keys) via the linear scorer; plain scalar path.
double order_probability(const Embedding& query, const Embedding& key2, const Embedding& key3,
                         const OrderClassifierParams& classifier);

// Differentiable pre-sigmoid score. Gradients flow to the classifier leaves
// and the query node; key embeddings enter as constants.
NodeRef order_logit_node(Graph& g, NodeRef query, const Embedding& key2, const Embedding& key3,
                         NodeRef classifier_weight, NodeRef classifier_bias);

}  // namespace seco

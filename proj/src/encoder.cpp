#include "seco/encoder.hpp"

#include <cmath>

#include "seco/errors.hpp"
#include "seco/kernels.hpp"

namespace seco {

namespace {

void check_chain(const EncoderArch& arch) {
    if (arch.raw_dim == 0 || arch.head_hidden_width == 0 || arch.embed_dim == 0 ||
        arch.backbone_widths.empty()) {
        throw ConfigError("encoder architecture widths must be positive and non-empty");
    }
}

Tensor fan_in_uniform(Rng& rng, std::size_t in, std::size_t out) {
    const double bound = std::sqrt(6.0 / static_cast<double>(in));
    Tensor w({in, out});
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = rng.uniform(-bound, bound);
    return w;
}

std::vector<double> dense_forward(const DenseLayer& layer, const std::vector<double>& x) {
    if (x.size() != layer.weight.extent(0)) {
        throw ConfigError("encoder input length " + std::to_string(x.size()) +
                          " does not match layer weight " + layer.weight.shape_str());
    }
    std::vector<double> out(layer.weight.extent(1));
    detail::linear_vec(x, layer.weight.data(), layer.bias.data(), out.size(), out);
    return out;
}

void relu_inplace(std::vector<double>& v) { detail::relu_vec(v, v); }

}  // namespace

std::vector<const Tensor*> EncoderParams::tensors() const {
    std::vector<const Tensor*> list;
    for (const DenseLayer& layer : backbone) {
        list.push_back(&layer.weight);
        list.push_back(&layer.bias);
    }
    list.push_back(&head_hidden.weight);
    list.push_back(&head_hidden.bias);
    list.push_back(&head_out.weight);
    list.push_back(&head_out.bias);
    return list;
}

std::vector<Tensor*> EncoderParams::tensors() {
    std::vector<Tensor*> list;
    for (DenseLayer& layer : backbone) {
        list.push_back(&layer.weight);
        list.push_back(&layer.bias);
    }
    list.push_back(&head_hidden.weight);
    list.push_back(&head_hidden.bias);
    list.push_back(&head_out.weight);
    list.push_back(&head_out.bias);
    return list;
}

bool EncoderParams::same_arch(const EncoderParams& other) const {
    const auto mine = tensors();
    const auto theirs = other.tensors();
    if (mine.size() != theirs.size()) return false;
    for (std::size_t i = 0; i < mine.size(); ++i) {
        if (mine[i]->shape() != theirs[i]->shape()) return false;
    }
    return true;
}

EncoderParams init_encoder(const EncoderArch& arch, Rng& rng) {
    check_chain(arch);
    EncoderParams params;
    std::size_t in = arch.raw_dim;
    for (std::uint32_t width : arch.backbone_widths) {
        params.backbone.push_back({fan_in_uniform(rng, in, width), Tensor({width})});
        in = width;
    }
    params.head_hidden = {fan_in_uniform(rng, in, arch.head_hidden_width),
                          Tensor({arch.head_hidden_width})};
    params.head_out = {fan_in_uniform(rng, arch.head_hidden_width, arch.embed_dim),
                       Tensor({arch.embed_dim})};
    return params;
}

OrderClassifierParams zero_order_classifier(std::size_t embed_dim) {
    return {Tensor({3 * embed_dim}), Tensor({1})};
}

std::vector<double> backbone_features(const EncoderParams& params, const FrameVector& frame) {
    std::vector<double> h = frame;
    for (const DenseLayer& layer : params.backbone) {
        h = dense_forward(layer, h);
        relu_inplace(h);
    }
    return h;
}

Embedding encode(const EncoderParams& params, const FrameVector& patch) {
    std::vector<double> h = backbone_features(params, patch);
    h = dense_forward(params.head_hidden, h);
    relu_inplace(h);
    h = dense_forward(params.head_out, h);
    const double norm = detail::l2_norm(h);
    if (!(norm >= 1e-12)) {
        throw ArgumentError("encode: degenerate embedding, norm " + std::to_string(norm) +
                            " is below 1e-12");
    }
    for (double& v : h) v /= norm;
    return Embedding(std::move(h));
}

EncoderLeaves make_encoder_leaves(Graph& g, const EncoderParams& params, bool trainable) {
    auto leaf = [&](const Tensor& t) { return trainable ? g.parameter(t) : g.constant(t); };
    EncoderLeaves leaves;
    for (const DenseLayer& layer : params.backbone) {
        leaves.backbone.emplace_back(leaf(layer.weight), leaf(layer.bias));
    }
    leaves.head_hidden = {leaf(params.head_hidden.weight), leaf(params.head_hidden.bias)};
    leaves.head_out = {leaf(params.head_out.weight), leaf(params.head_out.bias)};
    return leaves;
}

std::vector<NodeRef> EncoderLeaves::all() const {
    std::vector<NodeRef> list;
    for (const auto& [w, b] : backbone) {
        list.push_back(w);
        list.push_back(b);
    }
    list.push_back(head_hidden.first);
    list.push_back(head_hidden.second);
    list.push_back(head_out.first);
    list.push_back(head_out.second);
    return list;
}

NodeRef encode_node(Graph& g, const EncoderLeaves& leaves, const FrameVector& patch) {
    NodeRef h = g.constant(Tensor::from_vector(patch));
    for (const auto& [w, b] : leaves.backbone) {
        h = g.relu(g.linear(h, w, b));
    }
    h = g.relu(g.linear(h, leaves.head_hidden.first, leaves.head_hidden.second));
    h = g.linear(h, leaves.head_out.first, leaves.head_out.second);
    return g.l2_normalize(h);
}

void momentum_update(EncoderParams& key, const EncoderParams& query, double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
        throw ArgumentError("momentum_update: alpha must be in [0, 1], got " + std::to_string(alpha));
    }
    if (!key.same_arch(query)) {
        throw ConfigError("momentum_update: encoder architectures do not match");
    }
    const auto src = query.tensors();
    auto dst = key.tensors();
    for (std::size_t t = 0; t < dst.size(); ++t) {
        Tensor& k = *dst[t];
        const Tensor& q = *src[t];
        for (std::size_t i = 0; i < k.size(); ++i) {
            k[i] = alpha * k[i] + (1.0 - alpha) * q[i];
        }
    }
}

double order_probability(const Embedding& query, const Embedding& key2, const Embedding& key3,
                         const OrderClassifierParams& classifier) {
    const std::size_t d = query.dim();
    if (key2.dim() != d || key3.dim() != d || classifier.weight.size() != 3 * d) {
        throw DimensionError("order_probability: classifier weight " + classifier.weight.shape_str() +
                             " does not match embedding dim " + std::to_string(d));
    }
    double z = classifier.bias[0];
    z += detail::dot_vec(classifier.weight.data().subspan(0, d), query.values());
    z += detail::dot_vec(classifier.weight.data().subspan(d, d), key2.values());
    z += detail::dot_vec(classifier.weight.data().subspan(2 * d, d), key3.values());
    return detail::sigmoid(z);
}

NodeRef order_logit_node(Graph& g, NodeRef query, const Embedding& key2, const Embedding& key3,
                         NodeRef classifier_weight, NodeRef classifier_bias) {
    const std::size_t d = g.value(query).size();
    if (key2.dim() != d || key3.dim() != d || g.value(classifier_weight).size() != 3 * d) {
        throw DimensionError("order_logit: classifier weight " +
                             g.value(classifier_weight).shape_str() +
                             " does not match embedding dim " + std::to_string(d));
    }
    const NodeRef parts[] = {query, g.constant(Tensor::from_vector(key2.values())),
                             g.constant(Tensor::from_vector(key3.values()))};
    NodeRef joined = g.concat(parts);
    return g.add(g.dot(classifier_weight, joined), classifier_bias);
}

}  // namespace seco

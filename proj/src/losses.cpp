#include "seco/losses.hpp"

#include <cmath>
#include <vector>

#include "seco/errors.hpp"

namespace seco {

namespace {

void check_tau(double tau) {
    if (!(tau > 0.0)) {
        throw ArgumentError("temperature must be positive, got " + std::to_string(tau));
    }
}

std::shared_ptr<const Tensor> pack_negatives(std::span<const Embedding> negatives) {
    if (negatives.empty()) return nullptr;
    const std::size_t dim = negatives.front().dim();
    Tensor m({negatives.size(), dim});
    for (std::size_t i = 0; i < negatives.size(); ++i) {
        if (negatives[i].dim() != dim) {
            throw DimensionError("info_nce: negative " + std::to_string(i) + " has dim " +
                                 std::to_string(negatives[i].dim()) + ", expected " +
                                 std::to_string(dim));
        }
        for (std::size_t j = 0; j < dim; ++j) m.at(i, j) = negatives[i][j];
    }
    return std::make_shared<const Tensor>(std::move(m));
}

}  // namespace

NodeRef info_nce(Graph& g, NodeRef query, const Embedding& positive,
                 std::shared_ptr<const Tensor> negatives, double tau) {
    check_tau(tau);
    const std::size_t d = g.value(query).size();
    if (positive.dim() != d) {
        throw DimensionError("info_nce: positive key dim " + std::to_string(positive.dim()) +
                             " does not match query dim " + std::to_string(d));
    }
    NodeRef pos_logit =
        g.scale(g.dot(query, g.constant(Tensor::from_vector(positive.values()))), 1.0 / tau);
    NodeRef logits = pos_logit;
    if (negatives) {
        if (negatives->extent(1) != d) {
            throw DimensionError("info_nce: negatives matrix " + negatives->shape_str() +
                                 " does not match query dim " + std::to_string(d));
        }
        NodeRef neg_logits = g.scale(g.matvec(std::move(negatives), query), 1.0 / tau);
        const NodeRef parts[] = {pos_logit, neg_logits};
        logits = g.concat(parts);
    }
    return g.sub(g.log_sum_exp(logits), pos_logit);
}

NodeRef info_nce(Graph& g, NodeRef query, const Embedding& positive,
                 std::span<const Embedding> negatives, double tau) {
    return info_nce(g, query, positive, pack_negatives(negatives), tau);
}

NodeRef inter_frame_loss(Graph& g, NodeRef query, std::span<const Embedding> keys,
                         std::shared_ptr<const Tensor> negatives, double tau) {
    if (keys.size() != 3) {
        throw ArgumentError("inter_frame_loss: expected exactly 3 keys, got " +
                            std::to_string(keys.size()));
    }
    NodeRef acc = info_nce(g, query, keys[0], negatives, tau);
    acc = g.add(acc, info_nce(g, query, keys[1], negatives, tau));
    acc = g.add(acc, info_nce(g, query, keys[2], negatives, tau));
    return g.scale(acc, 1.0 / 3.0);
}

NodeRef intra_frame_loss(Graph& g, NodeRef query, const Embedding& key1, const Embedding& key2,
                         const Embedding& key3, double tau) {
    const Embedding frame_negatives[] = {key2, key3};
    return info_nce(g, query, key1, std::span<const Embedding>(frame_negatives), tau);
}

NodeRef temporal_order_loss(Graph& g, NodeRef probability, int label) {
    return g.binary_cross_entropy(probability, label);
}

std::pair<NodeRef, LossBreakdown> total_loss(Graph& g, NodeRef inter, NodeRef intra,
                                             NodeRef temporal,
                                             const std::array<double, 3>& weights, double tau) {
    for (double w : weights) {
        if (w < 0.0) throw ArgumentError("loss weights must be nonnegative, got " + std::to_string(w));
    }
    NodeRef weighted = g.add(g.add(g.scale(inter, weights[0]), g.scale(intra, weights[1])),
                             g.scale(temporal, weights[2]));
    LossBreakdown breakdown;
    breakdown.inter = g.value(inter)[0];
    breakdown.intra = g.value(intra)[0];
    breakdown.temporal = g.value(temporal)[0];
    breakdown.total = g.value(weighted)[0];
    breakdown.temperature = tau;
    return {weighted, breakdown};
}

}  // namespace seco

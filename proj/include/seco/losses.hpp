#pragma once

#include <array>
#include <memory>
#include <span>

#include "seco/embedding.hpp"
#include "seco/graph.hpp"

namespace seco {

// Raw (unweighted) per-task loss values plus the weighted total for one
// sample or one averaged batch.
struct LossBreakdown {
    double inter = 0.0;
    double intra = 0.0;
    double temporal = 0.0;
    double total = 0.0;
    double temperature = 0.0;
};

// Softmax contrastive loss: -log( exp(q.k+ / tau) / (exp(q.k+ / tau) +
// sum_i exp(q.k-_i / tau)) ), computed through a max-shifted log-sum-exp.
// Differentiable w.r.t. the query node only; keys are constants. With no
// negatives the loss is exactly 0 with exactly zero query gradient.
NodeRef info_nce(Graph& g, NodeRef query, const Embedding& positive,
                 std::span<const Embedding> negatives, double tau);

// Same loss with the negatives pre-packed as a [k x d] matrix (shared across
// calls); nullptr means no negatives.
NodeRef info_nce(Graph& g, NodeRef query, const Embedding& positive,
                 std::shared_ptr<const Tensor> negatives, double tau);

// Mean of the contrastive losses against each of the three same-video keys,
// all sharing one negative pool.
NodeRef inter_frame_loss(Graph& g, NodeRef query, std::span<const Embedding> keys,
                         std::shared_ptr<const Tensor> negatives, double tau);

// Same-frame key against the two other-frame keys; the cross-video negative
// pool is deliberately not consulted.
NodeRef intra_frame_loss(Graph& g, NodeRef query, const Embedding& key1, const Embedding& key2,
                         const Embedding& key3, double tau);

// Binary cross-entropy of the order probability against label y. The
// probability node must come from sigmoid(); the loss is evaluated from its
// logit so saturated probabilities stay finite.
NodeRef temporal_order_loss(Graph& g, NodeRef probability, int label);

// Weighted sum of the three task losses. The breakdown records the raw
// (unweighted) component values; total is the weighted sum.
std::pair<NodeRef, LossBreakdown> total_loss(Graph& g, NodeRef inter, NodeRef intra,
                                             NodeRef temporal,
                                             const std::array<double, 3>& weights, double tau);

}  // namespace seco

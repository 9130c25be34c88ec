#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "seco/tensor.hpp"

namespace seco {

class Graph;

// Lightweight handle into a Graph. Valid for the lifetime of the Graph that
// created it.
class NodeRef {
public:
    NodeRef() = default;
    const Tensor& value() const;
    const Tensor& grad() const;
    bool valid() const { return graph_ != nullptr; }
    std::uint32_t id() const { return id_; }

private:
    friend class Graph;
    NodeRef(Graph* graph, std::uint32_t id) : graph_(graph), id_(id) {}
    Graph* graph_ = nullptr;
    std::uint32_t id_ = 0;
};

// Reverse-mode tape over dense tensors. Nodes are appended in construction
// order (parents always precede children), so backward() is a single reverse
// sweep. Gradients accumulate additively across multiple uses of a node; the
// sweep skips subgraphs that no parameter feeds, which is how key embeddings
// and other constants stay gradient-free.
//
// Graphs are built and traversed by one thread; typical usage builds a fresh
// graph per training step.
class Graph {
public:
    enum class OpKind : std::uint8_t {
        kLeaf,
        kLinear,
        kRelu,
        kL2Normalize,
        kDot,
        kConcat,
        kSigmoid,
        kAdd,
        kSub,
        kScale,
        kSum,
        kLogSumExp,
        kMatVec,
        kBinaryCrossEntropy,
        kSoftmaxCrossEntropyMean,
        kCustom,
    };

    // Trainable leaf; receives a gradient in backward().
    NodeRef parameter(Tensor value);
    // Non-trainable leaf; backward() never propagates into it.
    NodeRef constant(Tensor value);

    // out = x * w + bias. x is rank-1 [a] (returning [b]) or rank-2 [n x a]
    // (returning [n x b]); w is [a x b], bias is [b].
    NodeRef linear(NodeRef x, NodeRef w, NodeRef bias);

    // Elementwise max(0, x); subgradient at exactly 0 is taken as 0.
    NodeRef relu(NodeRef x);

    // x / ||x||2 for rank-1 x. Requires ||x||2 >= 1e-12; a smaller norm is an
    // error, not a clamp.
    NodeRef l2_normalize(NodeRef x);

    // Inner product of two rank-1 tensors of equal length; returns a scalar.
    NodeRef dot(NodeRef a, NodeRef b);

    // Concatenation of rank-1 tensors, in order.
    NodeRef concat(std::span<const NodeRef> parts);

    // Logistic of a scalar, computed in a stable branch per sign and clamped
    // into the open interval (0, 1).
    NodeRef sigmoid(NodeRef x);

    NodeRef add(NodeRef a, NodeRef b);
    NodeRef sub(NodeRef a, NodeRef b);
    NodeRef scale(NodeRef x, double factor);
    NodeRef sum(NodeRef x);

    // max-shifted log(sum(exp(x))) over a rank-1 tensor; returns a scalar.
    NodeRef log_sum_exp(NodeRef x);

    // matrix [k x d] times rank-1 x [d] -> [k]. The matrix is a constant held
    // by shared ownership; no gradient flows into it.
    NodeRef matvec(std::shared_ptr<const Tensor> matrix, NodeRef x);

    // Binary cross-entropy of a sigmoid output against label y in {0,1}.
    // `probability` must be a sigmoid node: the loss is evaluated from that
    // node's pre-sigmoid logit so saturated probabilities stay stable, and
    // the gradient (sigmoid(z) - y) propagates directly to the logit.
    NodeRef binary_cross_entropy(NodeRef probability, int label);

    // Mean over rows of softmax cross-entropy. logits is [n x c]; labels has
    // n entries in [0, c).
    NodeRef softmax_cross_entropy_mean(NodeRef logits, std::vector<int> labels);

    // Extension point: node with caller-supplied value and backward rule.
    // The rule reads self.grad() and must accumulate (+=) into parent grads
    // via mutable_grad(). Used by tests to inject corrupted rules.
    NodeRef make_node(Tensor value, std::vector<NodeRef> parents,
                      std::function<void(Graph&, NodeRef self)> backward_rule);

    // Populates grad for every node that feeds `loss` (a scalar). Resets all
    // gradients first, so calling it again on the same graph is well defined.
    void backward(NodeRef loss);

    const Tensor& value(NodeRef ref) const;
    const Tensor& grad(NodeRef ref) const;
    Tensor& mutable_grad(NodeRef ref);
    OpKind kind(NodeRef ref) const;
    std::span<const std::uint32_t> parents(NodeRef ref) const;
    std::size_t node_count() const { return nodes_.size(); }

private:
    struct Node {
        Tensor value;
        Tensor grad;
        OpKind kind = OpKind::kLeaf;
        bool needs_grad = false;
        std::vector<std::uint32_t> parents;
        std::function<void(Graph&, std::uint32_t)> backward;
    };

    NodeRef push(Tensor value, OpKind kind, bool needs_grad, std::vector<std::uint32_t> parents,
                 std::function<void(Graph&, std::uint32_t)> backward);
    bool any_needs_grad(std::span<const std::uint32_t> ids) const;
    const Tensor& val(std::uint32_t id) const { return nodes_[id].value; }
    Tensor& grd(std::uint32_t id) { return nodes_[id].grad; }
    bool wants(std::uint32_t id) const { return nodes_[id].needs_grad; }
    void check_ref(NodeRef ref, const char* who) const;

    std::vector<Node> nodes_;
};

}  // namespace seco

#include "seco/graph.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "seco/errors.hpp"
#include "seco/kernels.hpp"

namespace seco {

namespace {
constexpr double kNormEpsilon = 1e-12;
}

const Tensor& NodeRef::value() const { return graph_->value(*this); }
const Tensor& NodeRef::grad() const { return graph_->grad(*this); }

void Graph::check_ref(NodeRef ref, const char* who) const {
    if (ref.graph_ != this) {
        throw ArgumentError(std::string(who) + ": node belongs to a different graph");
    }
}

NodeRef Graph::push(Tensor value, OpKind kind, bool needs_grad,
                    std::vector<std::uint32_t> parents,
                    std::function<void(Graph&, std::uint32_t)> backward) {
    Node n;
    n.grad = Tensor::zeros_like(value);
    n.value = std::move(value);
    n.kind = kind;
    n.needs_grad = needs_grad;
    n.parents = std::move(parents);
    n.backward = std::move(backward);
    nodes_.push_back(std::move(n));
    return NodeRef(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

bool Graph::any_needs_grad(std::span<const std::uint32_t> ids) const {
    return std::any_of(ids.begin(), ids.end(), [&](std::uint32_t id) { return wants(id); });
}

NodeRef Graph::parameter(Tensor value) {
    if (value.size() == 0) throw ArgumentError("parameter: empty tensor");
    return push(std::move(value), OpKind::kLeaf, true, {}, nullptr);
}

NodeRef Graph::constant(Tensor value) {
    if (value.size() == 0) throw ArgumentError("constant: empty tensor");
    return push(std::move(value), OpKind::kLeaf, false, {}, nullptr);
}

NodeRef Graph::linear(NodeRef x, NodeRef w, NodeRef bias) {
    check_ref(x, "linear");
    check_ref(w, "linear");
    check_ref(bias, "linear");
    const Tensor& xv = val(x.id_);
    const Tensor& wv = val(w.id_);
    const Tensor& bv = val(bias.id_);
    if (wv.rank() != 2) throw DimensionError("linear: weight must be rank 2, got " + wv.shape_str());
    const std::size_t in = wv.extent(0), out = wv.extent(1);
    if (bv.rank() != 1 || bv.size() != out) {
        throw DimensionError("linear: bias " + bv.shape_str() + " does not match weight " + wv.shape_str());
    }
    if (xv.rank() != 1 && xv.rank() != 2) {
        throw DimensionError("linear: input must be rank 1 or 2, got " + xv.shape_str());
    }
    const std::size_t xa = xv.rank() == 1 ? xv.extent(0) : xv.extent(1);
    if (xa != in) {
        throw DimensionError("linear: input " + xv.shape_str() + " does not chain with weight " + wv.shape_str());
    }

    const std::uint32_t xi = x.id_, wi = w.id_, bi = bias.id_;
    if (xv.rank() == 1) {
        Tensor result({out});
        detail::linear_vec(xv.data(), wv.data(), bv.data(), out, result.data());
        auto rule = [xi, wi, bi, in, out](Graph& g, std::uint32_t self) {
            const Tensor& og = g.grd(self);
            const Tensor& xval = g.val(xi);
            const Tensor& wval = g.val(wi);
            if (g.wants(xi)) {
                Tensor& gx = g.grd(xi);
                for (std::size_t k = 0; k < in; ++k) {
                    double acc = 0.0;
                    for (std::size_t j = 0; j < out; ++j) acc += og[j] * wval[k * out + j];
                    gx[k] += acc;
                }
            }
            if (g.wants(wi)) {
                Tensor& gw = g.grd(wi);
                for (std::size_t k = 0; k < in; ++k) {
                    const double xk = xval[k];
                    for (std::size_t j = 0; j < out; ++j) gw[k * out + j] += xk * og[j];
                }
            }
            if (g.wants(bi)) {
                Tensor& gb = g.grd(bi);
                for (std::size_t j = 0; j < out; ++j) gb[j] += og[j];
            }
        };
        return push(std::move(result), OpKind::kLinear, any_needs_grad(std::array{xi, wi, bi}),
                    {xi, wi, bi}, std::move(rule));
    }

    const std::size_t rows = xv.extent(0);
    Tensor result({rows, out});
    for (std::size_t i = 0; i < rows; ++i) {
        detail::linear_vec(xv.data().subspan(i * in, in), wv.data(), bv.data(), out,
                           result.data().subspan(i * out, out));
    }
    auto rule = [xi, wi, bi, in, out, rows](Graph& g, std::uint32_t self) {
        const Tensor& og = g.grd(self);
        const Tensor& xval = g.val(xi);
        const Tensor& wval = g.val(wi);
        if (g.wants(xi)) {
            Tensor& gx = g.grd(xi);
            for (std::size_t i = 0; i < rows; ++i) {
                for (std::size_t k = 0; k < in; ++k) {
                    double acc = 0.0;
                    for (std::size_t j = 0; j < out; ++j) acc += og[i * out + j] * wval[k * out + j];
                    gx[i * in + k] += acc;
                }
            }
        }
        if (g.wants(wi)) {
            Tensor& gw = g.grd(wi);
            for (std::size_t i = 0; i < rows; ++i) {
                for (std::size_t k = 0; k < in; ++k) {
                    const double xk = xval[i * in + k];
                    for (std::size_t j = 0; j < out; ++j) gw[k * out + j] += xk * og[i * out + j];
                }
            }
        }
        if (g.wants(bi)) {
            Tensor& gb = g.grd(bi);
            for (std::size_t i = 0; i < rows; ++i)
                for (std::size_t j = 0; j < out; ++j) gb[j] += og[i * out + j];
        }
    };
    return push(std::move(result), OpKind::kLinear, any_needs_grad(std::array{xi, wi, bi}),
                {xi, wi, bi}, std::move(rule));
}

NodeRef Graph::relu(NodeRef x) {
    check_ref(x, "relu");
    const Tensor& xv = val(x.id_);
    Tensor result = Tensor::zeros_like(xv);
    detail::relu_vec(xv.data(), result.data());
    const std::uint32_t xi = x.id_;
    auto rule = [xi](Graph& g, std::uint32_t self) {
        if (!g.wants(xi)) return;
        const Tensor& og = g.grd(self);
        const Tensor& xval = g.val(xi);
        Tensor& gx = g.grd(xi);
        for (std::size_t i = 0; i < og.size(); ++i) {
            if (xval[i] > 0.0) gx[i] += og[i];
        }
    };
    return push(std::move(result), OpKind::kRelu, wants(xi), {xi}, std::move(rule));
}

NodeRef Graph::l2_normalize(NodeRef x) {
    check_ref(x, "l2_normalize");
    const Tensor& xv = val(x.id_);
    if (xv.rank() != 1) throw DimensionError("l2_normalize: expects rank 1, got " + xv.shape_str());
    const double norm = detail::l2_norm(xv.data());
    if (!(norm >= kNormEpsilon)) {
        throw ArgumentError("l2_normalize: degenerate vector, norm " + std::to_string(norm) +
                            " is below 1e-12");
    }
    Tensor result = Tensor::zeros_like(xv);
    for (std::size_t i = 0; i < xv.size(); ++i) result[i] = xv[i] / norm;
    const std::uint32_t xi = x.id_;
    auto rule = [xi, norm](Graph& g, std::uint32_t self) {
        if (!g.wants(xi)) return;
        const Tensor& og = g.grd(self);
        const Tensor& outv = g.val(self);
        Tensor& gx = g.grd(xi);
        double proj = 0.0;
        for (std::size_t i = 0; i < og.size(); ++i) proj += og[i] * outv[i];
        for (std::size_t i = 0; i < og.size(); ++i) gx[i] += (og[i] - outv[i] * proj) / norm;
    };
    return push(std::move(result), OpKind::kL2Normalize, wants(xi), {xi}, std::move(rule));
}

NodeRef Graph::dot(NodeRef a, NodeRef b) {
    check_ref(a, "dot");
    check_ref(b, "dot");
    const Tensor& av = val(a.id_);
    const Tensor& bv = val(b.id_);
    if (av.rank() != 1 || bv.rank() != 1 || av.size() != bv.size()) {
        throw DimensionError("dot: length mismatch between " + av.shape_str() + " and " + bv.shape_str());
    }
    const std::uint32_t ai = a.id_, bi = b.id_;
    auto rule = [ai, bi](Graph& g, std::uint32_t self) {
        const double og = g.grd(self)[0];
        const Tensor& aval = g.val(ai);
        const Tensor& bval = g.val(bi);
        if (g.wants(ai)) {
            Tensor& ga = g.grd(ai);
            for (std::size_t i = 0; i < aval.size(); ++i) ga[i] += og * bval[i];
        }
        if (g.wants(bi)) {
            Tensor& gb = g.grd(bi);
            for (std::size_t i = 0; i < bval.size(); ++i) gb[i] += og * aval[i];
        }
    };
    return push(Tensor::scalar(detail::dot_vec(av.data(), bv.data())), OpKind::kDot,
                any_needs_grad(std::array{ai, bi}), {ai, bi}, std::move(rule));
}

NodeRef Graph::concat(std::span<const NodeRef> parts) {
    if (parts.empty()) throw ArgumentError("concat: empty part list");
    std::vector<std::uint32_t> ids;
    std::size_t total = 0;
    for (NodeRef p : parts) {
        check_ref(p, "concat");
        const Tensor& pv = val(p.id_);
        if (pv.rank() != 1) throw DimensionError("concat: expects rank 1 parts, got " + pv.shape_str());
        ids.push_back(p.id_);
        total += pv.size();
    }
    Tensor result({total});
    std::size_t offset = 0;
    for (std::uint32_t id : ids) {
        const Tensor& pv = val(id);
        std::copy(pv.data().begin(), pv.data().end(), result.data().begin() + offset);
        offset += pv.size();
    }
    auto rule = [ids](Graph& g, std::uint32_t self) {
        const Tensor& og = g.grd(self);
        std::size_t at = 0;
        for (std::uint32_t id : ids) {
            const std::size_t len = g.val(id).size();
            if (g.wants(id)) {
                Tensor& gp = g.grd(id);
                for (std::size_t i = 0; i < len; ++i) gp[i] += og[at + i];
            }
            at += len;
        }
    };
    const bool needs = any_needs_grad(ids);
    return push(std::move(result), OpKind::kConcat, needs, std::move(ids), std::move(rule));
}

NodeRef Graph::sigmoid(NodeRef x) {
    check_ref(x, "sigmoid");
    const Tensor& xv = val(x.id_);
    if (xv.size() != 1) throw DimensionError("sigmoid: expects a scalar, got " + xv.shape_str());
    const std::uint32_t xi = x.id_;
    auto rule = [xi](Graph& g, std::uint32_t self) {
        if (!g.wants(xi)) return;
        const double p = g.val(self)[0];
        g.grd(xi)[0] += g.grd(self)[0] * p * (1.0 - p);
    };
    return push(Tensor::scalar(detail::sigmoid(xv[0])), OpKind::kSigmoid, wants(xi), {xi},
                std::move(rule));
}

NodeRef Graph::add(NodeRef a, NodeRef b) {
    check_ref(a, "add");
    check_ref(b, "add");
    const Tensor& av = val(a.id_);
    const Tensor& bv = val(b.id_);
    if (!av.same_shape(bv)) {
        throw DimensionError("add: shape mismatch between " + av.shape_str() + " and " + bv.shape_str());
    }
    Tensor result = Tensor::zeros_like(av);
    for (std::size_t i = 0; i < av.size(); ++i) result[i] = av[i] + bv[i];
    const std::uint32_t ai = a.id_, bi = b.id_;
    auto rule = [ai, bi](Graph& g, std::uint32_t self) {
        const Tensor& og = g.grd(self);
        for (std::uint32_t id : {ai, bi}) {
            if (!g.wants(id)) continue;
            Tensor& gp = g.grd(id);
            for (std::size_t i = 0; i < og.size(); ++i) gp[i] += og[i];
        }
    };
    return push(std::move(result), OpKind::kAdd, any_needs_grad(std::array{ai, bi}), {ai, bi},
                std::move(rule));
}

NodeRef Graph::sub(NodeRef a, NodeRef b) {
    check_ref(a, "sub");
    check_ref(b, "sub");
    const Tensor& av = val(a.id_);
    const Tensor& bv = val(b.id_);
    if (!av.same_shape(bv)) {
        throw DimensionError("sub: shape mismatch between " + av.shape_str() + " and " + bv.shape_str());
    }
    Tensor result = Tensor::zeros_like(av);
    for (std::size_t i = 0; i < av.size(); ++i) result[i] = av[i] - bv[i];
    const std::uint32_t ai = a.id_, bi = b.id_;
    auto rule = [ai, bi](Graph& g, std::uint32_t self) {
        const Tensor& og = g.grd(self);
        if (g.wants(ai)) {
            Tensor& ga = g.grd(ai);
            for (std::size_t i = 0; i < og.size(); ++i) ga[i] += og[i];
        }
        if (g.wants(bi)) {
            Tensor& gb = g.grd(bi);
            for (std::size_t i = 0; i < og.size(); ++i) gb[i] -= og[i];
        }
    };
    return push(std::move(result), OpKind::kSub, any_needs_grad(std::array{ai, bi}), {ai, bi},
                std::move(rule));
}

NodeRef Graph::scale(NodeRef x, double factor) {
    check_ref(x, "scale");
    const Tensor& xv = val(x.id_);
    Tensor result = Tensor::zeros_like(xv);
    for (std::size_t i = 0; i < xv.size(); ++i) result[i] = xv[i] * factor;
    const std::uint32_t xi = x.id_;
    auto rule = [xi, factor](Graph& g, std::uint32_t self) {
        if (!g.wants(xi)) return;
        const Tensor& og = g.grd(self);
        Tensor& gx = g.grd(xi);
        for (std::size_t i = 0; i < og.size(); ++i) gx[i] += og[i] * factor;
    };
    return push(std::move(result), OpKind::kScale, wants(xi), {xi}, std::move(rule));
}

NodeRef Graph::sum(NodeRef x) {
    check_ref(x, "sum");
    const Tensor& xv = val(x.id_);
    double total = 0.0;
    for (std::size_t i = 0; i < xv.size(); ++i) total += xv[i];
    const std::uint32_t xi = x.id_;
    auto rule = [xi](Graph& g, std::uint32_t self) {
        if (!g.wants(xi)) return;
        const double og = g.grd(self)[0];
        Tensor& gx = g.grd(xi);
        for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += og;
    };
    return push(Tensor::scalar(total), OpKind::kSum, wants(xi), {xi}, std::move(rule));
}

NodeRef Graph::log_sum_exp(NodeRef x) {
    check_ref(x, "log_sum_exp");
    const Tensor& xv = val(x.id_);
    if (xv.rank() != 1) throw DimensionError("log_sum_exp: expects rank 1, got " + xv.shape_str());
    double m = xv[0];
    for (std::size_t i = 1; i < xv.size(); ++i) m = std::max(m, xv[i]);
    double s = 0.0;
    for (std::size_t i = 0; i < xv.size(); ++i) s += std::exp(xv[i] - m);
    const double lse = m + std::log(s);
    const std::uint32_t xi = x.id_;
    auto rule = [xi, lse](Graph& g, std::uint32_t self) {
        if (!g.wants(xi)) return;
        const double og = g.grd(self)[0];
        const Tensor& xval = g.val(xi);
        Tensor& gx = g.grd(xi);
        for (std::size_t i = 0; i < xval.size(); ++i) gx[i] += og * std::exp(xval[i] - lse);
    };
    return push(Tensor::scalar(lse), OpKind::kLogSumExp, wants(xi), {xi}, std::move(rule));
}

NodeRef Graph::matvec(std::shared_ptr<const Tensor> matrix, NodeRef x) {
    check_ref(x, "matvec");
    if (!matrix) throw ArgumentError("matvec: null matrix");
    const Tensor& mv = *matrix;
    const Tensor& xv = val(x.id_);
    if (mv.rank() != 2 || xv.rank() != 1 || mv.extent(1) != xv.size()) {
        throw DimensionError("matvec: matrix " + mv.shape_str() + " does not chain with vector " +
                             xv.shape_str());
    }
    const std::size_t rows = mv.extent(0), cols = mv.extent(1);
    Tensor result({rows});
    for (std::size_t i = 0; i < rows; ++i) {
        result[i] = detail::dot_vec(mv.data().subspan(i * cols, cols), xv.data());
    }
    const std::uint32_t xi = x.id_;
    auto rule = [xi, matrix, rows, cols](Graph& g, std::uint32_t self) {
        if (!g.wants(xi)) return;
        const Tensor& og = g.grd(self);
        Tensor& gx = g.grd(xi);
        for (std::size_t i = 0; i < rows; ++i) {
            const double gi = og[i];
            if (gi == 0.0) continue;
            const double* row = matrix->data().data() + i * cols;
            for (std::size_t j = 0; j < cols; ++j) gx[j] += gi * row[j];
        }
    };
    return push(std::move(result), OpKind::kMatVec, wants(xi), {xi}, std::move(rule));
}

NodeRef Graph::binary_cross_entropy(NodeRef probability, int label) {
    check_ref(probability, "binary_cross_entropy");
    if (label != 0 && label != 1) {
        throw ArgumentError("binary_cross_entropy: label must be 0 or 1, got " + std::to_string(label));
    }
    if (nodes_[probability.id_].kind != OpKind::kSigmoid) {
        throw ArgumentError("binary_cross_entropy: probability must be a sigmoid node");
    }
    const std::uint32_t logit_id = nodes_[probability.id_].parents[0];
    const double z = val(logit_id)[0];
    auto rule = [logit_id, label](Graph& g, std::uint32_t self) {
        if (!g.wants(logit_id)) return;
        const double og = g.grd(self)[0];
        const double zv = g.val(logit_id)[0];
        g.grd(logit_id)[0] += og * (detail::sigmoid(zv) - static_cast<double>(label));
    };
    return push(Tensor::scalar(detail::bce_from_logit(z, label)), OpKind::kBinaryCrossEntropy,
                wants(logit_id), {logit_id}, std::move(rule));
}

NodeRef Graph::softmax_cross_entropy_mean(NodeRef logits, std::vector<int> labels) {
    check_ref(logits, "softmax_cross_entropy_mean");
    const Tensor& zv = val(logits.id_);
    if (zv.rank() != 2) {
        throw DimensionError("softmax_cross_entropy_mean: logits must be rank 2, got " + zv.shape_str());
    }
    const std::size_t rows = zv.extent(0), classes = zv.extent(1);
    if (labels.size() != rows) {
        throw DimensionError("softmax_cross_entropy_mean: " + std::to_string(labels.size()) +
                             " labels for " + zv.shape_str() + " logits");
    }
    std::vector<double> row_lse(rows);
    double total = 0.0;
    for (std::size_t i = 0; i < rows; ++i) {
        const int y = labels[i];
        if (y < 0 || static_cast<std::size_t>(y) >= classes) {
            throw ArgumentError("softmax_cross_entropy_mean: label " + std::to_string(y) +
                                " out of range [0, " + std::to_string(classes) + ")");
        }
        double m = zv.at(i, 0);
        for (std::size_t c = 1; c < classes; ++c) m = std::max(m, zv.at(i, c));
        double s = 0.0;
        for (std::size_t c = 0; c < classes; ++c) s += std::exp(zv.at(i, c) - m);
        row_lse[i] = m + std::log(s);
        total += row_lse[i] - zv.at(i, static_cast<std::size_t>(y));
    }
    total /= static_cast<double>(rows);
    const std::uint32_t zi = logits.id_;
    auto rule = [zi, labels = std::move(labels), row_lse = std::move(row_lse), rows,
                 classes](Graph& g, std::uint32_t self) {
        if (!g.wants(zi)) return;
        const double og = g.grd(self)[0] / static_cast<double>(rows);
        const Tensor& zval = g.val(zi);
        Tensor& gz = g.grd(zi);
        for (std::size_t i = 0; i < rows; ++i) {
            for (std::size_t c = 0; c < classes; ++c) {
                double p = std::exp(zval.at(i, c) - row_lse[i]);
                if (c == static_cast<std::size_t>(labels[i])) p -= 1.0;
                gz[i * classes + c] += og * p;
            }
        }
    };
    return push(Tensor::scalar(total), OpKind::kSoftmaxCrossEntropyMean, wants(zi), {zi},
                std::move(rule));
}

NodeRef Graph::make_node(Tensor value, std::vector<NodeRef> parents,
                         std::function<void(Graph&, NodeRef)> backward_rule) {
    std::vector<std::uint32_t> ids;
    for (NodeRef p : parents) {
        check_ref(p, "make_node");
        ids.push_back(p.id_);
    }
    const bool needs = any_needs_grad(ids);
    auto rule = [fn = std::move(backward_rule)](Graph& g, std::uint32_t self) {
        if (fn) fn(g, NodeRef(&g, self));
    };
    return push(std::move(value), OpKind::kCustom, needs, std::move(ids), std::move(rule));
}

void Graph::backward(NodeRef loss) {
    check_ref(loss, "backward");
    if (val(loss.id_).size() != 1) {
        throw ArgumentError("backward: loss must be a scalar, got " + val(loss.id_).shape_str());
    }
    for (Node& n : nodes_) n.grad.fill(0.0);
    grd(loss.id_)[0] = 1.0;
    for (std::uint32_t id = loss.id_ + 1; id-- > 0;) {
        Node& n = nodes_[id];
        if (n.backward && n.needs_grad) n.backward(*this, id);
    }
}

const Tensor& Graph::value(NodeRef ref) const {
    check_ref(ref, "value");
    return nodes_[ref.id_].value;
}

const Tensor& Graph::grad(NodeRef ref) const {
    check_ref(ref, "grad");
    return nodes_[ref.id_].grad;
}

Tensor& Graph::mutable_grad(NodeRef ref) {
    check_ref(ref, "mutable_grad");
    return nodes_[ref.id_].grad;
}

Graph::OpKind Graph::kind(NodeRef ref) const {
    check_ref(ref, "kind");
    return nodes_[ref.id_].kind;
}

std::span<const std::uint32_t> Graph::parents(NodeRef ref) const {
    check_ref(ref, "parents");
    return nodes_[ref.id_].parents;
}

}  // namespace seco

#include "seco/gradcheck_suite.hpp"

#include <cstdio>
#include <functional>
#include <memory>
#include <vector>

#include "seco/encoder.hpp"
#include "seco/grad_check.hpp"
#include "seco/losses.hpp"
#include "seco/rng.hpp"

namespace seco {

namespace {

constexpr double kStep = 1e-6;
constexpr double kTol = 1e-4;
constexpr std::size_t kEmbedDim = 16;
constexpr std::size_t kNegatives = 8;

struct Fixture {
    Embedding k1, k2, k3;
    std::shared_ptr<const Tensor> negatives;
    Tensor query;           // free query embedding (not normalized)
    Tensor phi_w, phi_b;    // order classifier
    FrameVector patch;
    EncoderParams encoder;  // for the composed targets
};

Embedding random_embedding(Rng& rng, std::size_t d) {
    std::vector<double> v(d);
    for (double& x : v) x = rng.normal();
    const double norm = detail::l2_norm(v);
    for (double& x : v) x /= norm;
    return Embedding(std::move(v));
}

Fixture make_fixture(std::uint64_t instance) {
    Rng rng(mix64(0x9c0ffee) + instance);
    Tensor negs({kNegatives, kEmbedDim});
    for (std::size_t i = 0; i < kNegatives; ++i) {
        const Embedding e = random_embedding(rng, kEmbedDim);
        for (std::size_t j = 0; j < kEmbedDim; ++j) negs.at(i, j) = e[j];
    }
    Tensor query({kEmbedDim});
    for (std::size_t i = 0; i < kEmbedDim; ++i) query[i] = rng.uniform(-1.0, 1.0);
    Tensor phi_w({3 * kEmbedDim});
    for (std::size_t i = 0; i < phi_w.size(); ++i) phi_w[i] = rng.uniform(-1.0, 1.0);
    Tensor phi_b({1});
    phi_b[0] = rng.uniform(-1.0, 1.0);

    EncoderArch arch;
    arch.raw_dim = 24;
    arch.backbone_widths = {20, 16};
    arch.head_hidden_width = 16;
    arch.embed_dim = kEmbedDim;
    FrameVector patch(arch.raw_dim);
    for (double& v : patch) v = rng.normal();

    return Fixture{.k1 = random_embedding(rng, kEmbedDim),
                   .k2 = random_embedding(rng, kEmbedDim),
                   .k3 = random_embedding(rng, kEmbedDim),
                   .negatives = std::make_shared<const Tensor>(std::move(negs)),
                   .query = std::move(query),
                   .phi_w = std::move(phi_w),
                   .phi_b = std::move(phi_b),
                   .patch = std::move(patch),
                   .encoder = init_encoder(arch, rng)};
}

using LossOverQuery = std::function<NodeRef(Graph&, NodeRef, const Fixture&)>;

NodeRef build_inter(Graph& g, NodeRef query, const Fixture& fx) {
    const Embedding keys[] = {fx.k1, fx.k2, fx.k3};
    return inter_frame_loss(g, query, keys, fx.negatives, 0.1);
}

NodeRef build_intra(Graph& g, NodeRef query, const Fixture& fx) {
    return intra_frame_loss(g, query, fx.k1, fx.k2, fx.k3, 0.1);
}

NodeRef build_order(Graph& g, NodeRef query, const Fixture& fx) {
    NodeRef logit = order_logit_node(g, query, fx.k2, fx.k3, g.constant(fx.phi_w),
                                     g.constant(fx.phi_b));
    return temporal_order_loss(g, g.sigmoid(logit), 1);
}

NodeRef build_total(Graph& g, NodeRef query, const Fixture& fx) {
    auto [node, bd] =
        total_loss(g, build_inter(g, query, fx), build_intra(g, query, fx),
                   build_order(g, query, fx), {1.0, 1.0, 1.0}, 0.1);
    (void)bd;
    return node;
}

// Targets differentiating w.r.t. a free query embedding.
GradCheckProblem query_problem(const char* name, const LossOverQuery& build,
                               std::uint64_t instance) {
    auto fx = std::make_shared<Fixture>(make_fixture(instance));
    GradCheckProblem problem;
    problem.name = name;
    problem.params = {fx->query};
    problem.build = [fx, build](Graph& g, std::span<const NodeRef> params) {
        return build(g, params[0], *fx);
    };
    return problem;
}

// Targets differentiating w.r.t. the full query-encoder weight set, with the
// query produced by encode.
GradCheckProblem encoder_problem(const char* name, const LossOverQuery& build,
                                 std::uint64_t instance) {
    auto fx = std::make_shared<Fixture>(make_fixture(instance));
    GradCheckProblem problem;
    problem.name = name;
    for (const Tensor* t : fx->encoder.tensors()) problem.params.push_back(*t);
    problem.build = [fx, build](Graph& g, std::span<const NodeRef> params) {
        EncoderLeaves leaves;
        std::size_t at = 0;
        for (std::size_t l = 0; l < fx->encoder.backbone.size(); ++l) {
            leaves.backbone.emplace_back(params[at], params[at + 1]);
            at += 2;
        }
        leaves.head_hidden = {params[at], params[at + 1]};
        leaves.head_out = {params[at + 2], params[at + 3]};
        NodeRef query = encode_node(g, leaves, fx->patch);
        return build(g, query, *fx);
    };
    return problem;
}

GradCheckProblem classifier_problem(std::uint64_t instance) {
    auto fx = std::make_shared<Fixture>(make_fixture(instance));
    GradCheckProblem problem;
    problem.name = "temporal_order_wrt_classifier";
    problem.params = {fx->phi_w, fx->phi_b};
    problem.build = [fx](Graph& g, std::span<const NodeRef> params) {
        NodeRef query = g.constant(fx->query);
        NodeRef logit = order_logit_node(g, query, fx->k2, fx->k3, params[0], params[1]);
        return temporal_order_loss(g, g.sigmoid(logit), 0);
    };
    return problem;
}

GradCheckProblem probe_head_problem(std::uint64_t instance) {
    Rng rng(mix64(0xbead) + instance);
    GradCheckProblem problem;
    problem.name = "probe_softmax_xent_wrt_weights";
    Tensor features({6, 5});
    for (std::size_t i = 0; i < features.size(); ++i) features[i] = rng.normal();
    Tensor w({5, 3});
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = rng.uniform(-1.0, 1.0);
    Tensor b({3});
    problem.params = {w, b};
    problem.build = [features](Graph& g, std::span<const NodeRef> params) {
        NodeRef logits = g.linear(g.constant(features), params[0], params[1]);
        return g.softmax_cross_entropy_mean(logits, {0, 1, 2, 0, 1, 2});
    };
    return problem;
}

// Same order loss but with a sign-flipped rule spliced into the logit path.
GradCheckProblem corrupted_problem(std::uint64_t instance) {
    auto fx = std::make_shared<Fixture>(make_fixture(instance));
    GradCheckProblem problem;
    problem.name = "injected_fault_negated_scale";
    problem.params = {fx->query};
    problem.build = [fx](Graph& g, std::span<const NodeRef> params) {
        NodeRef query = params[0];
        Tensor doubled = Tensor::zeros_like(g.value(query));
        for (std::size_t i = 0; i < doubled.size(); ++i) doubled[i] = 2.0 * g.value(query)[i];
        NodeRef bad = g.make_node(std::move(doubled), {query}, [query](Graph& gg, NodeRef self) {
            Tensor& gq = gg.mutable_grad(query);
            for (std::size_t i = 0; i < gq.size(); ++i) gq[i] -= 2.0 * self.grad()[i];
        });
        return build_intra(g, bad, *fx);
    };
    return problem;
}

}  // namespace

GradCheckSuiteResult run_gradcheck_suite(bool inject_fault) {
    struct Target {
        const char* name;
        std::function<GradCheckProblem(std::uint64_t)> make;
    };
    std::vector<Target> targets = {
        {"info_nce_wrt_query",
         [](std::uint64_t i) {
             return query_problem("info_nce_wrt_query",
                                  [](Graph& g, NodeRef q, const Fixture& fx) {
                                      return info_nce(g, q, fx.k1, fx.negatives, 0.1);
                                  },
                                  i);
         }},
        {"inter_frame_wrt_query",
         [](std::uint64_t i) { return query_problem("inter_frame_wrt_query", build_inter, i); }},
        {"intra_frame_wrt_query",
         [](std::uint64_t i) { return query_problem("intra_frame_wrt_query", build_intra, i); }},
        {"temporal_order_wrt_query",
         [](std::uint64_t i) { return query_problem("temporal_order_wrt_query", build_order, i); }},
        {"total_wrt_query",
         [](std::uint64_t i) { return query_problem("total_wrt_query", build_total, i); }},
        {"temporal_order_wrt_classifier", classifier_problem},
        {"inter_frame_through_encoder",
         [](std::uint64_t i) { return encoder_problem("inter_frame_through_encoder", build_inter, i); }},
        {"intra_frame_through_encoder",
         [](std::uint64_t i) { return encoder_problem("intra_frame_through_encoder", build_intra, i); }},
        {"temporal_order_through_encoder",
         [](std::uint64_t i) {
             return encoder_problem("temporal_order_through_encoder", build_order, i);
         }},
        {"total_through_encoder",
         [](std::uint64_t i) { return encoder_problem("total_through_encoder", build_total, i); }},
        {"probe_softmax_xent_wrt_weights", probe_head_problem},
    };
    if (inject_fault) targets.push_back({"injected_fault_negated_scale", corrupted_problem});

    GradCheckSuiteResult result;
    result.targets = static_cast<int>(targets.size());
    char line[192];
    std::snprintf(line, sizeof(line), "gradcheck: %d targets, central differences, step %g, tol %g\n",
                  result.targets, kStep, kTol);
    result.report += line;
    for (const Target& target : targets) {
        const GradCheckReport report = grad_check_resampled(target.make, 3, kStep, kTol);
        if (report.pass) {
            std::snprintf(line, sizeof(line), "  PASS %-34s max_rel_err %.3g\n", target.name,
                          report.worst_err);
        } else {
            std::snprintf(line, sizeof(line),
                          "  FAIL %-34s max_rel_err %.3g (param %zu, coord %zu)\n", target.name,
                          report.worst_err, report.worst_param, report.worst_coord);
            result.failed += 1;
        }
        result.report += line;
    }
    result.pass = result.failed == 0;
    std::snprintf(line, sizeof(line), "gradcheck: %s (%d of %d targets failed)\n",
                  result.pass ? "PASS" : "FAIL", result.failed, result.targets);
    result.report += line;
    return result;
}

}  // namespace seco

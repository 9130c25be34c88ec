#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "seco/errors.hpp"
#include "seco/grad_check.hpp"
#include "seco/graph.hpp"
#include "seco/rng.hpp"
#include "seco/tensor.hpp"

using namespace seco;

namespace {

Tensor random_tensor(Rng& rng, std::vector<std::size_t> shape, double lo = -1.0, double hi = 1.0) {
    Tensor t(std::move(shape));
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(lo, hi);
    return t;
}

// Independent triple-loop matmul oracle.
Tensor naive_linear(const Tensor& x, const Tensor& w, const Tensor& b) {
    const std::size_t n = x.extent(0), a = x.extent(1), c = w.extent(1);
    Tensor out({n, c});
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < c; ++j) {
            double acc = b[j];
            for (std::size_t k = 0; k < a; ++k) acc += x.at(i, k) * w.at(k, j);
            out.at(i, j) = acc;
        }
    }
    return out;
}

}  // namespace

TEST_CASE("linear identity and zero-input cases") {
    Graph g;
    NodeRef x = g.constant(Tensor({1, 2}, {1.0, 2.0}));
    NodeRef w = g.parameter(Tensor({2, 2}, {1.0, 0.0, 0.0, 1.0}));
    NodeRef b = g.parameter(Tensor({2}, {0.0, 0.0}));
    NodeRef y = g.linear(x, w, b);
    CHECK(y.value()[0] == 1.0);
    CHECK(y.value()[1] == 2.0);

    Rng rng(7);
    NodeRef zero = g.constant(Tensor({1, 3}));
    NodeRef w2 = g.parameter(random_tensor(rng, {3, 2}));
    NodeRef b2 = g.parameter(Tensor({2}, {5.0, -1.0}));
    NodeRef y2 = g.linear(zero, w2, b2);
    CHECK(y2.value()[0] == 5.0);
    CHECK(y2.value()[1] == -1.0);
}

TEST_CASE("linear matches triple-loop matmul oracle") {
    Rng rng(11);
    const Tensor xv = random_tensor(rng, {4, 8});
    const Tensor wv = random_tensor(rng, {8, 3});
    const Tensor bv = random_tensor(rng, {3});
    Graph g;
    NodeRef y = g.linear(g.constant(xv), g.parameter(wv), g.parameter(bv));
    const Tensor expected = naive_linear(xv, wv, bv);
    for (std::size_t i = 0; i < expected.size(); ++i) {
        CHECK(std::fabs(y.value()[i] - expected[i]) < 1e-12);
    }
}

TEST_CASE("linear shape mismatch names both shapes") {
    Graph g;
    NodeRef x = g.constant(Tensor({1, 4}, {1, 2, 3, 4}));
    NodeRef w = g.parameter(Tensor({3, 2}, {1, 2, 3, 4, 5, 6}));
    NodeRef b = g.parameter(Tensor({2}, {0, 0}));
    try {
        g.linear(x, w, b);
        FAIL("expected DimensionError");
    } catch (const DimensionError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("[1x4]") != std::string::npos);
        CHECK(msg.find("[3x2]") != std::string::npos);
    }
}

TEST_CASE("relu forward and indicator gradient") {
    Graph g;
    NodeRef x = g.parameter(Tensor({3}, {-1.0, 0.0, 2.0}));
    NodeRef y = g.relu(x);
    CHECK(y.value()[0] == 0.0);
    CHECK(y.value()[1] == 0.0);
    CHECK(y.value()[2] == 2.0);

    NodeRef x2 = g.parameter(Tensor({2}, {-1.0, 3.0}));
    NodeRef loss = g.sum(g.relu(x2));
    g.backward(loss);
    CHECK(x2.grad()[0] == 0.0);
    CHECK(x2.grad()[1] == 1.0);

    NodeRef neg = g.relu(g.constant(Tensor({3}, {-5.0, -0.1, -1e300})));
    for (std::size_t i = 0; i < 3; ++i) CHECK(neg.value()[i] == 0.0);
}

TEST_CASE("l2_normalize values, idempotence, degenerate input") {
    Graph g;
    NodeRef y = g.l2_normalize(g.parameter(Tensor({2}, {3.0, 4.0})));
    CHECK(y.value()[0] == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(y.value()[1] == doctest::Approx(0.8).epsilon(1e-12));

    NodeRef z = g.l2_normalize(y);
    CHECK(std::fabs(z.value()[0] - y.value()[0]) < 1e-12);
    CHECK(std::fabs(z.value()[1] - y.value()[1]) < 1e-12);

    CHECK_THROWS_AS(g.l2_normalize(g.parameter(Tensor({3}, {0.0, 0.0, 0.0}))), ArgumentError);
}

TEST_CASE("l2_normalize output norm and direction on random vectors") {
    Rng rng(5);
    for (int rep = 0; rep < 50; ++rep) {
        Tensor v = random_tensor(rng, {16}, -2.0, 2.0);
        Graph g;
        NodeRef out = g.l2_normalize(g.parameter(v));
        double norm = 0.0;
        for (std::size_t i = 0; i < 16; ++i) norm += out.value()[i] * out.value()[i];
        norm = std::sqrt(norm);
        CHECK(std::fabs(norm - 1.0) <= 1e-9);
        // Direction: out must be a positive multiple of v.
        double vnorm = 0.0;
        for (std::size_t i = 0; i < 16; ++i) vnorm += v[i] * v[i];
        vnorm = std::sqrt(vnorm);
        for (std::size_t i = 0; i < 16; ++i) {
            CHECK(std::fabs(out.value()[i] - v[i] / vnorm) < 1e-12);
        }
    }
}

TEST_CASE("dot basics and independent accumulation oracle") {
    Graph g;
    NodeRef unit = g.parameter(Tensor({3}, {1.0, 0.0, 0.0}));
    CHECK(g.dot(unit, unit).value()[0] == 1.0);

    NodeRef e1 = g.constant(Tensor({2}, {1.0, 0.0}));
    NodeRef e2 = g.constant(Tensor({2}, {0.0, 1.0}));
    CHECK(g.dot(e1, e2).value()[0] == 0.0);

    Rng rng(13);
    Tensor a = random_tensor(rng, {32});
    Tensor b = random_tensor(rng, {32});
    double expected = 0.0;
    for (std::size_t i = 0; i < 32; ++i) expected += a[i] * b[i];
    Graph g2;
    CHECK(std::fabs(g2.dot(g2.parameter(a), g2.parameter(b)).value()[0] - expected) < 1e-12);

    CHECK_THROWS_AS(g.dot(e1, unit), DimensionError);
}

TEST_CASE("concat ordering, identity, gradient scatter") {
    Graph g;
    NodeRef a = g.parameter(Tensor({1}, {1.0}));
    NodeRef b = g.parameter(Tensor({1}, {2.0}));
    NodeRef c = g.parameter(Tensor({1}, {3.0}));
    const NodeRef parts[] = {a, b, c};
    NodeRef cat = g.concat(parts);
    CHECK(cat.value()[0] == 1.0);
    CHECK(cat.value()[1] == 2.0);
    CHECK(cat.value()[2] == 3.0);

    const NodeRef single[] = {a};
    CHECK(g.concat(single).value()[0] == 1.0);

    NodeRef u = g.parameter(Tensor({2}, {1.0, 2.0}));
    NodeRef v = g.parameter(Tensor({3}, {3.0, 4.0, 5.0}));
    const NodeRef uv[] = {u, v};
    g.backward(g.sum(g.concat(uv)));
    for (std::size_t i = 0; i < 2; ++i) CHECK(u.grad()[i] == 1.0);
    for (std::size_t i = 0; i < 3; ++i) CHECK(v.grad()[i] == 1.0);

    CHECK_THROWS_AS(g.concat(std::span<const NodeRef>{}), ArgumentError);
}

TEST_CASE("sigmoid center, symmetry, extreme stability") {
    Graph g;
    CHECK(g.sigmoid(g.constant(Tensor::scalar(0.0))).value()[0] == 0.5);

    Rng rng(3);
    for (int rep = 0; rep < 20; ++rep) {
        const double x = rng.uniform(-8.0, 8.0);
        const double p = g.sigmoid(g.constant(Tensor::scalar(x))).value()[0];
        const double q = g.sigmoid(g.constant(Tensor::scalar(-x))).value()[0];
        CHECK(std::fabs(p - (1.0 - q)) < 1e-12);
    }

    const double tiny = g.sigmoid(g.constant(Tensor::scalar(-1000.0))).value()[0];
    CHECK(tiny > 0.0);
    CHECK(tiny <= 1e-300);
    CHECK(std::isfinite(tiny));
    const double big = g.sigmoid(g.constant(Tensor::scalar(1000.0))).value()[0];
    CHECK(big >= 1.0 - 1e-300);
    CHECK(big <= 1.0);
    CHECK(std::isfinite(big));
}

TEST_CASE("backward: dot(x,x) doubles, unreachable leaf stays zero, non-scalar rejected") {
    Graph g;
    NodeRef x = g.parameter(Tensor({3}, {1.0, -2.0, 0.5}));
    NodeRef unused = g.parameter(Tensor({2}, {7.0, 8.0}));
    NodeRef loss = g.dot(x, x);
    g.backward(loss);
    for (std::size_t i = 0; i < 3; ++i) CHECK(x.grad()[i] == 2.0 * x.value()[i]);
    for (std::size_t i = 0; i < 2; ++i) CHECK(unused.grad()[i] == 0.0);

    CHECK_THROWS_AS(g.backward(x), ArgumentError);
}

TEST_CASE("gradient accumulation equals duplicated-leaf construction") {
    Rng rng(17);
    const Tensor xv = random_tensor(rng, {6});
    const Tensor cv = random_tensor(rng, {6});

    // Shared leaf used twice.
    Graph g;
    NodeRef x = g.parameter(xv);
    NodeRef c = g.constant(cv);
    NodeRef loss = g.add(g.dot(x, c), g.dot(x, x));
    g.backward(loss);

    // Same function with the two uses split over duplicate leaves.
    Graph h;
    NodeRef x1 = h.parameter(xv);
    NodeRef x2 = h.parameter(xv);
    NodeRef hc = h.constant(cv);
    NodeRef hloss = h.add(h.dot(x1, hc), h.dot(x2, x2));
    h.backward(hloss);

    for (std::size_t i = 0; i < 6; ++i) {
        CHECK(std::fabs(x.grad()[i] - (x1.grad()[i] + x2.grad()[i])) < 1e-14);
    }
}

TEST_CASE("forward ops are deterministic") {
    Rng rng(23);
    const Tensor xv = random_tensor(rng, {5, 4});
    const Tensor wv = random_tensor(rng, {4, 3});
    const Tensor bv = random_tensor(rng, {3});
    Graph g1, g2;
    NodeRef y1 = g1.relu(g1.linear(g1.constant(xv), g1.parameter(wv), g1.parameter(bv)));
    NodeRef y2 = g2.relu(g2.linear(g2.constant(xv), g2.parameter(wv), g2.parameter(bv)));
    for (std::size_t i = 0; i < y1.value().size(); ++i) {
        CHECK(y1.value()[i] == y2.value()[i]);  // bitwise
    }
}

TEST_CASE("log_sum_exp is stable and exact on known values") {
    Graph g;
    NodeRef x = g.parameter(Tensor({3}, {0.0, 0.0, 0.0}));
    CHECK(std::fabs(g.log_sum_exp(x).value()[0] - std::log(3.0)) < 1e-12);

    NodeRef huge = g.parameter(Tensor({2}, {1000.0, 1000.0}));
    const double lse = g.log_sum_exp(huge).value()[0];
    CHECK(std::isfinite(lse));
    CHECK(std::fabs(lse - (1000.0 + std::log(2.0))) < 1e-9);
}

TEST_CASE("matvec matches per-row dot and stops gradient at the matrix") {
    Rng rng(29);
    auto m = std::make_shared<Tensor>(random_tensor(rng, {7, 5}));
    const Tensor xv = random_tensor(rng, {5});
    Graph g;
    NodeRef x = g.parameter(xv);
    NodeRef y = g.matvec(m, x);
    for (std::size_t i = 0; i < 7; ++i) {
        double expected = 0.0;
        for (std::size_t j = 0; j < 5; ++j) expected += m->at(i, j) * xv[j];
        CHECK(std::fabs(y.value()[i] - expected) < 1e-12);
    }
}

// Finite-difference oracle for every op reachable through a composed chain.
TEST_CASE("analytic gradients match central finite differences on composed chains") {
    auto make_problem = [](std::uint64_t instance) {
        Rng rng(100 + instance);
        GradCheckProblem problem;
        problem.name = "linear+relu+l2_normalize+dot chain";
        problem.params = {random_tensor(rng, {6}), random_tensor(rng, {6, 4}),
                          random_tensor(rng, {4})};
        const Tensor target = random_tensor(rng, {4});
        problem.build = [target](Graph& g, std::span<const NodeRef> params) {
            NodeRef h = g.linear(params[0], params[1], params[2]);
            NodeRef n = g.l2_normalize(g.relu(h));
            return g.dot(n, g.constant(target));
        };
        return problem;
    };
    GradCheckReport report = grad_check_resampled(make_problem, 3, 1e-5, 1e-4);
    CHECK(report.pass);

    auto lse_problem = [](std::uint64_t instance) {
        Rng rng(300 + instance);
        GradCheckProblem problem;
        problem.name = "scale+concat+log_sum_exp+sub";
        problem.params = {random_tensor(rng, {1}), random_tensor(rng, {5})};
        problem.build = [](Graph& g, std::span<const NodeRef> params) {
            const NodeRef parts[] = {params[0], params[1]};
            NodeRef logits = g.scale(g.concat(parts), 10.0);
            return g.sub(g.log_sum_exp(logits), g.scale(params[0], 10.0));
        };
        return problem;
    };
    CHECK(grad_check_resampled(lse_problem, 3, 1e-5, 1e-4).pass);

    auto sigmoid_problem = [](std::uint64_t instance) {
        Rng rng(500 + instance);
        GradCheckProblem problem;
        problem.name = "dot+sigmoid+bce";
        problem.params = {random_tensor(rng, {8}), random_tensor(rng, {8})};
        problem.build = [](Graph& g, std::span<const NodeRef> params) {
            NodeRef p = g.sigmoid(g.dot(params[0], params[1]));
            return g.binary_cross_entropy(p, 1);
        };
        return problem;
    };
    CHECK(grad_check_resampled(sigmoid_problem, 3, 1e-5, 1e-4).pass);
}

TEST_CASE("per-op finite-difference sweep at 100 random points") {
    Rng rng(777);
    int points = 0;
    while (points < 100) {
        GradCheckProblem problem;
        problem.name = "elementwise mix";
        problem.params = {random_tensor(rng, {3}), random_tensor(rng, {3})};
        const double factor = rng.uniform(-2.0, 2.0);
        problem.build = [factor](Graph& g, std::span<const NodeRef> params) {
            NodeRef mixed = g.add(g.scale(params[0], factor), g.sub(params[1], params[0]));
            return g.dot(mixed, mixed);
        };
        GradCheckReport report = grad_check(problem, 1e-5, 1e-4);
        CHECK(report.pass);
        points += 6;
    }
}

TEST_CASE("grad_check flags a corrupted backward rule") {
    auto make_problem = [](std::uint64_t instance) {
        Rng rng(900 + instance);
        GradCheckProblem problem;
        problem.name = "sign-flipped relu";
        problem.params = {random_tensor(rng, {4})};
        problem.build = [](Graph& g, std::span<const NodeRef> params) {
            NodeRef x = params[0];
            Tensor forward = Tensor::zeros_like(x.value());
            for (std::size_t i = 0; i < forward.size(); ++i) {
                forward[i] = x.value()[i] > 0.0 ? x.value()[i] : 0.0;
            }
            NodeRef bad = g.make_node(std::move(forward), {x}, [x](Graph& gg, NodeRef self) {
                Tensor& gx = gg.mutable_grad(x);
                for (std::size_t i = 0; i < gx.size(); ++i) {
                    if (x.value()[i] > 0.0) gx[i] -= self.grad()[i];  // wrong sign
                }
            });
            return g.dot(bad, bad);
        };
        return problem;
    };
    GradCheckReport report = grad_check_resampled(make_problem, 3, 1e-5, 1e-4);
    CHECK_FALSE(report.pass);
}

TEST_CASE("grad_check reports zero error for a constant function") {
    GradCheckProblem problem;
    problem.name = "constant";
    problem.params = {Tensor({3}, {1.0, 2.0, 3.0})};
    problem.build = [](Graph& g, std::span<const NodeRef>) {
        return g.sum(g.constant(Tensor({2}, {4.0, 5.0})));
    };
    GradCheckReport report = grad_check(problem, 1e-5, 1e-4);
    CHECK(report.pass);
    CHECK(report.worst_err == 0.0);
}

TEST_CASE("softmax cross-entropy mean matches hand computation and finite differences") {
    Graph g;
    NodeRef logits = g.parameter(Tensor({2, 3}, {0.0, 0.0, 0.0, 1.0, 2.0, 3.0}));
    NodeRef loss = g.softmax_cross_entropy_mean(logits, {0, 2});
    const double row0 = std::log(3.0);
    const double row1 = std::log(std::exp(1.0) + std::exp(2.0) + std::exp(3.0)) - 3.0;
    CHECK(std::fabs(loss.value()[0] - 0.5 * (row0 + row1)) < 1e-12);

    auto make_problem = [](std::uint64_t instance) {
        Rng rng(1300 + instance);
        GradCheckProblem problem;
        problem.name = "softmax xent";
        problem.params = {random_tensor(rng, {4, 5})};
        problem.build = [](Graph& g2, std::span<const NodeRef> params) {
            return g2.softmax_cross_entropy_mean(params[0], {1, 0, 4, 2});
        };
        return problem;
    };
    CHECK(grad_check_resampled(make_problem, 3, 1e-5, 1e-4).pass);
}

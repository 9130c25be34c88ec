#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "seco/graph.hpp"
#include "seco/tensor.hpp"

namespace seco {

// One differentiation target: a deterministic scalar-loss builder over a
// fixed set of parameter tensors.
struct GradCheckProblem {
    std::string name;
    std::vector<Tensor> params;
    std::function<NodeRef(Graph&, std::span<const NodeRef> params)> build;
};

struct GradCheckReport {
    std::string target;
    std::vector<double> max_rel_err_per_param;
    double worst_err = 0.0;
    std::size_t worst_param = 0;
    std::size_t worst_coord = 0;
    double tol = 0.0;
    bool pass = true;
};

// Compares analytic gradients against central finite differences at every
// coordinate of every parameter. Relative error per coordinate is
// |a - n| / max(|a|, |n|, 1e-8).
GradCheckReport grad_check(const GradCheckProblem& problem, double step, double tol);

// Same check, but a coordinate that fails at one random instance is retried
// at freshly drawn instances before being called a failure. This filters out
// finite-difference artifacts at relu kinks: a genuinely wrong backward rule
// fails at every instance.
GradCheckReport grad_check_resampled(
    const std::function<GradCheckProblem(std::uint64_t instance)>& make_problem,
    int instances, double step, double tol);

}  // namespace seco

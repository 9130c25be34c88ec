#include "seco/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "seco/errors.hpp"

namespace seco {

namespace {

double rel_err(double analytic, double numeric) {
    const double denom = std::max({std::fabs(analytic), std::fabs(numeric), 1e-8});
    return std::fabs(analytic - numeric) / denom;
}

double eval_loss(const GradCheckProblem& problem, const std::vector<Tensor>& params) {
    Graph g;
    std::vector<NodeRef> leaves;
    leaves.reserve(params.size());
    for (const Tensor& p : params) leaves.push_back(g.parameter(p));
    return g.value(problem.build(g, leaves))[0];
}

std::vector<Tensor> analytic_grads(const GradCheckProblem& problem) {
    Graph g;
    std::vector<NodeRef> leaves;
    leaves.reserve(problem.params.size());
    for (const Tensor& p : problem.params) leaves.push_back(g.parameter(p));
    NodeRef loss = problem.build(g, leaves);
    g.backward(loss);
    std::vector<Tensor> grads;
    grads.reserve(leaves.size());
    for (NodeRef leaf : leaves) grads.push_back(g.grad(leaf));
    return grads;
}

double numeric_grad(const GradCheckProblem& problem, std::size_t param, std::size_t coord,
                    double step) {
    std::vector<Tensor> shifted = problem.params;
    shifted[param][coord] += step;
    const double hi = eval_loss(problem, shifted);
    shifted[param][coord] -= 2.0 * step;
    const double lo = eval_loss(problem, shifted);
    return (hi - lo) / (2.0 * step);
}

}  // namespace

GradCheckReport grad_check(const GradCheckProblem& problem, double step, double tol) {
    if (!(step > 0.0)) throw ArgumentError("grad_check: step must be positive");
    GradCheckReport report;
    report.target = problem.name;
    report.tol = tol;
    const std::vector<Tensor> grads = analytic_grads(problem);
    for (std::size_t p = 0; p < problem.params.size(); ++p) {
        double worst = 0.0;
        std::size_t worst_coord = 0;
        for (std::size_t i = 0; i < problem.params[p].size(); ++i) {
            const double err = rel_err(grads[p][i], numeric_grad(problem, p, i, step));
            if (err > worst) {
                worst = err;
                worst_coord = i;
            }
        }
        report.max_rel_err_per_param.push_back(worst);
        if (worst > report.worst_err) {
            report.worst_err = worst;
            report.worst_param = p;
            report.worst_coord = worst_coord;
        }
    }
    report.pass = report.worst_err < tol;
    return report;
}

GradCheckReport grad_check_resampled(
    const std::function<GradCheckProblem(std::uint64_t)>& make_problem, int instances,
    double step, double tol) {
    if (instances < 1) throw ArgumentError("grad_check_resampled: need at least one instance");
    GradCheckProblem first = make_problem(0);
    GradCheckReport report;
    report.target = first.name;
    report.tol = tol;

    std::vector<Tensor> grads = analytic_grads(first);
    struct Suspect {
        std::size_t param;
        std::size_t coord;
        double err;
    };
    std::vector<Suspect> suspects;
    report.max_rel_err_per_param.assign(first.params.size(), 0.0);
    for (std::size_t p = 0; p < first.params.size(); ++p) {
        for (std::size_t i = 0; i < first.params[p].size(); ++i) {
            const double err = rel_err(grads[p][i], numeric_grad(first, p, i, step));
            if (err >= tol) {
                suspects.push_back({p, i, err});
            } else {
                report.max_rel_err_per_param[p] = std::max(report.max_rel_err_per_param[p], err);
            }
        }
    }

    // Retry suspect coordinates at fresh instances; keep the best error seen.
    for (int inst = 1; inst < instances && !suspects.empty(); ++inst) {
        GradCheckProblem retry = make_problem(static_cast<std::uint64_t>(inst));
        const std::vector<Tensor> retry_grads = analytic_grads(retry);
        std::vector<Suspect> still;
        for (const Suspect& s : suspects) {
            const double err =
                rel_err(retry_grads[s.param][s.coord], numeric_grad(retry, s.param, s.coord, step));
            const double best = std::min(err, s.err);
            if (best >= tol) {
                still.push_back({s.param, s.coord, best});
            } else {
                report.max_rel_err_per_param[s.param] =
                    std::max(report.max_rel_err_per_param[s.param], best);
            }
        }
        suspects.swap(still);
    }
    for (const Suspect& s : suspects) {
        report.max_rel_err_per_param[s.param] = std::max(report.max_rel_err_per_param[s.param], s.err);
    }

    for (std::size_t p = 0; p < report.max_rel_err_per_param.size(); ++p) {
        if (report.max_rel_err_per_param[p] > report.worst_err) {
            report.worst_err = report.max_rel_err_per_param[p];
            report.worst_param = p;
        }
    }
    for (const Suspect& s : suspects) {
        if (s.err >= report.worst_err) {
            report.worst_err = s.err;
            report.worst_param = s.param;
            report.worst_coord = s.coord;
        }
    }
    report.pass = report.worst_err < tol;
    return report;
}

}  // namespace seco

#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>

// Scalar kernels shared by the graph ops and the plain (non-differentiable)
// forward paths, so both produce bitwise-identical values.
namespace seco::detail {

// out[j] = sum_k x[k] * w[k*cols + j] + b[j]
inline void linear_vec(std::span<const double> x, std::span<const double> w,
                       std::span<const double> b, std::size_t cols, std::span<double> out) {
    for (std::size_t j = 0; j < cols; ++j) out[j] = b[j];
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double xk = x[k];
        const double* wrow = w.data() + k * cols;
        for (std::size_t j = 0; j < cols; ++j) out[j] += xk * wrow[j];
    }
}

inline void relu_vec(std::span<const double> x, std::span<double> out) {
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
}

inline double l2_norm(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
}

inline double dot_vec(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// Numerically stable logistic. The negative branch underflows to 0 for very
// large |x|, so the result is floored at the smallest normal double; losses
// never read the probability directly (they use the logit), the floor only
// keeps reported probabilities strictly positive.
inline double sigmoid(double x) {
    double p;
    if (x >= 0.0) {
        p = 1.0 / (1.0 + std::exp(-x));
    } else {
        const double e = std::exp(x);
        p = e / (1.0 + e);
    }
    const double lo = std::numeric_limits<double>::min();
    return p < lo ? lo : p;
}

// Binary cross-entropy evaluated from the logit: max(z,0) - z*y + log1p(exp(-|z|)).
inline double bce_from_logit(double z, int y) {
    return (z > 0.0 ? z : 0.0) - z * static_cast<double>(y) + std::log1p(std::exp(-std::fabs(z)));
}

}  // namespace seco::detail

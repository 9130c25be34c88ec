#pragma once

#include <utility>
#include <vector>

#include "seco/errors.hpp"
#include "seco/kernels.hpp"

namespace seco {

// Raw input vector; the unit a sequence is made of.
using FrameVector = std::vector<double>;

// Unit-L2-norm vector in embedding space. The norm invariant is checked at
// construction, so holding an Embedding is proof it is normalized (within
// 1e-9).
class Embedding {
public:
    explicit Embedding(std::vector<double> values) : values_(std::move(values)) {
        const double norm = detail::l2_norm(values_);
        if (!(norm >= 1.0 - 1e-9 && norm <= 1.0 + 1e-9)) {
            throw ContractError("embedding norm " + std::to_string(norm) + " is not 1 within 1e-9");
        }
    }

    std::size_t dim() const { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }
    const std::vector<double>& values() const { return values_; }

private:
    std::vector<double> values_;
};

}  // namespace seco

#include "seco/memory_queue.hpp"

#include "seco/errors.hpp"

namespace seco {

KeyQueue::KeyQueue(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw ArgumentError("queue capacity must be positive");
}

void KeyQueue::enqueue(std::span<const Embedding> keys) {
    for (const Embedding& key : keys) {
        if (!entries_.empty() && key.dim() != entries_.front().dim()) {
            throw ContractError("enqueue: key dim " + std::to_string(key.dim()) +
                                " differs from queue entry dim " +
                                std::to_string(entries_.front().dim()));
        }
        entries_.push_back(key);
        if (entries_.size() > capacity_) entries_.pop_front();
    }
}

std::vector<Embedding> KeyQueue::snapshot() const {
    return std::vector<Embedding>(entries_.begin(), entries_.end());
}

std::shared_ptr<const Tensor> KeyQueue::snapshot_matrix() const {
    if (entries_.empty()) return nullptr;
    const std::size_t dim = entries_.front().dim();
    Tensor m({entries_.size(), dim});
    std::size_t row = 0;
    for (const Embedding& e : entries_) {
        for (std::size_t j = 0; j < dim; ++j) m.at(row, j) = e[j];
        ++row;
    }
    return std::make_shared<const Tensor>(std::move(m));
}

}  // namespace seco

#pragma once

#include <cstddef>
#include <deque>
#include <memory>
#include <span>
#include <vector>

#include "seco/embedding.hpp"
#include "seco/tensor.hpp"

namespace seco {

// Fixed-capacity FIFO of key embeddings: the cross-batch negative pool.
// Single writer; snapshots are value copies and never mutate afterwards.
class KeyQueue {
public:
    explicit KeyQueue(std::size_t capacity);

    // Appends keys in order, evicting the oldest entries so size() never
    // exceeds capacity. Every key must be unit norm (the Embedding type
    // already guarantees it).
    void enqueue(std::span<const Embedding> keys);

    // Copy of the current entries, oldest first.
    std::vector<Embedding> snapshot() const;

    // Entries packed into a [size x dim] matrix, oldest first; null when
    // empty. Shared ownership so graphs can hold it past further enqueues.
    std::shared_ptr<const Tensor> snapshot_matrix() const;

    std::size_t size() const { return entries_.size(); }
    std::size_t capacity() const { return capacity_; }

private:
    std::size_t capacity_;
    std::deque<Embedding> entries_;
};

}  // namespace seco

#pragma once

#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "rda/random.hpp"

namespace rda {

/// Bounded FIFO. Index 0 is the oldest retained item; pushing onto a full
/// buffer evicts it.
template <typename T>
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
        if (capacity_ == 0) throw std::invalid_argument("replay capacity must be >= 1");
        items_.reserve(capacity_ < 4096 ? capacity_ : 4096);
    }

    void push(T item) {
        if (items_.size() < capacity_) {
            items_.push_back(std::move(item));
            return;
        }
        items_[head_] = std::move(item);
        head_ = (head_ + 1) % capacity_;
    }

    std::size_t size() const { return items_.size(); }
    std::size_t capacity() const { return capacity_; }
    bool empty() const { return items_.empty(); }

    const T& operator[](std::size_t i) const { return items_[(head_ + i) % items_.size()]; }

private:
    std::size_t capacity_;
    std::size_t head_ = 0;
    std::vector<T> items_;
};

/// k distinct indices drawn uniformly from [0, n) (Floyd's algorithm).
std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k, Rng& rng);

}  // namespace rda

// Bounded single-producer single-consumer queue.
#pragma once

#include <atomic>
#include <cstddef>
#include <utility>
#include <vector>

namespace httptap {

// Fixed-capacity ring buffer. Exactly one thread may push and exactly one
// may pop; both are wait-free. Capacity is rounded up so that at least the
// requested number of elements fit.
template <typename T>
class SpscQueue {
public:
    explicit SpscQueue(size_t capacity) {
        size_t slots = 2;
        while (slots < capacity + 1) slots <<= 1;
        buf_.resize(slots);
        mask_ = slots - 1;
    }

    bool try_push(T&& value) {
        size_t w = write_.load(std::memory_order_relaxed);
        size_t next = (w + 1) & mask_;
        if (next == read_.load(std::memory_order_acquire)) return false;  // full
        buf_[w] = std::move(value);
        write_.store(next, std::memory_order_release);
        return true;
    }

    bool try_pop(T& out) {
        size_t r = read_.load(std::memory_order_relaxed);
        if (r == write_.load(std::memory_order_acquire)) return false;  // empty
        out = std::move(buf_[r]);
        read_.store((r + 1) & mask_, std::memory_order_release);
        return true;
    }

    size_t capacity() const { return mask_; }

    bool empty() const {
        return read_.load(std::memory_order_acquire) ==
               write_.load(std::memory_order_acquire);
    }

private:
    std::vector<T> buf_;
    size_t mask_ = 0;
    alignas(64) std::atomic<size_t> write_{0};
    alignas(64) std::atomic<size_t> read_{0};
};

}  // namespace httptap

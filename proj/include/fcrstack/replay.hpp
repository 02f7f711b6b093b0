#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <vector>

#include "fcrstack/errors.hpp"
#include "fcrstack/rl_env.hpp"
#include "fcrstack/safety.hpp"

namespace fcrstack {

struct Transition {
    Observation obs;
    int action = 0;
    double reward = 0.0;
    Observation next_obs;
    ActionMask next_mask;
    bool done = false;
};

// Fixed-capacity ring buffer with uniform batch sampling (distinct indices
// within a batch, Floyd's algorithm).
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
        if (capacity_ == 0) throw ValidationError("replay: capacity must be > 0");
    }

    std::size_t size() const { return data_.size(); }
    std::size_t capacity() const { return capacity_; }

    void push(Transition t) {
        if (data_.size() < capacity_) {
            data_.push_back(std::move(t));
        } else {
            data_[head_] = std::move(t);
            head_ = (head_ + 1) % capacity_;
        }
    }

    std::vector<const Transition*> sample(std::size_t batch, std::mt19937_64& rng) const {
        if (batch == 0 || batch > data_.size())
            throw ValidationError("replay: batch larger than buffer");
        std::vector<std::size_t> picked;
        picked.reserve(batch);
        const std::size_t n = data_.size();
        for (std::size_t j = n - batch; j < n; ++j) {
            std::uniform_int_distribution<std::size_t> dist(0, j);
            const std::size_t k = dist(rng);
            bool dup = false;
            for (std::size_t p : picked)
                if (p == k) {
                    dup = true;
                    break;
                }
            picked.push_back(dup ? j : k);
        }
        std::vector<const Transition*> out;
        out.reserve(batch);
        for (std::size_t i : picked) out.push_back(&data_[i]);
        return out;
    }

private:
    std::size_t capacity_;
    std::size_t head_ = 0;
    std::vector<Transition> data_;
};

} // namespace fcrstack

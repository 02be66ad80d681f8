#include "skilldisc/replay.hpp"

#include <cmath>

#include "skilldisc/errors.hpp"

namespace sd {

ReplayBuffer::ReplayBuffer(std::int64_t capacity, int state_dim, int action_dim, int num_skills)
    : capacity_(capacity), state_dim_(state_dim), action_dim_(action_dim), num_skills_(num_skills) {
    if (capacity < 1) throw ValidationError("replay buffer capacity must be >= 1");
    storage_.reserve(static_cast<std::size_t>(std::min<std::int64_t>(capacity, 1 << 20)));
}

void ReplayBuffer::add(const Transition& t) {
    if (t.state.size() != state_dim_ || t.next_state.size() != state_dim_)
        throw ValidationError("transition state dimension mismatch");
    if (t.action.size() != action_dim_)
        throw ValidationError("transition action dimension mismatch");
    if (t.skill < 0 || t.skill >= num_skills_)
        throw ValidationError("transition skill index out of range");
    for (int i = 0; i < t.action.size(); ++i)
        if (!(t.action[i] > -1.0 && t.action[i] < 1.0))
            throw ValidationError("transition action component outside (-1, 1)");

    if (size() < capacity_) {
        storage_.push_back(t);
    } else {
        storage_[static_cast<std::size_t>(cursor_)] = t;
        cursor_ = (cursor_ + 1) % capacity_;
    }
}

std::vector<Transition> ReplayBuffer::sample(int n, Rng& rng) const {
    if (storage_.empty()) throw ValidationError("cannot sample from an empty replay buffer");
    std::vector<Transition> batch;
    batch.reserve(static_cast<std::size_t>(n));
    std::uniform_int_distribution<std::int64_t> dist(0, size() - 1);
    for (int i = 0; i < n; ++i) batch.push_back(storage_[static_cast<std::size_t>(dist(rng))]);
    return batch;
}

}  // namespace sd

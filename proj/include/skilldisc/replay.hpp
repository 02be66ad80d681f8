#pragma once

#include <Eigen/Dense>
#include <vector>

#include "skilldisc/rng.hpp"

namespace sd {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// One environment interaction. The skill is stored per transition even though
// it is constant within an episode.
struct Transition {
    Vec state;
    int skill = 0;
    Vec action;
    Vec next_state;
    double extrinsic_reward = 0.0;
    bool done = false;
};

// FIFO ring buffer of transitions. Single writer / single reader, alternating.
class ReplayBuffer {
public:
    ReplayBuffer(std::int64_t capacity, int state_dim, int action_dim, int num_skills);

    // Validates dimensions and ranges; throws ValidationError on mismatch.
    void add(const Transition& t);

    // n transitions drawn uniformly with replacement. Throws on empty buffer.
    std::vector<Transition> sample(int n, Rng& rng) const;

    std::int64_t size() const { return static_cast<std::int64_t>(storage_.size()); }
    std::int64_t capacity() const { return capacity_; }
    const Transition& at(std::int64_t i) const { return storage_[static_cast<std::size_t>(i)]; }

private:
    std::int64_t capacity_;
    int state_dim_;
    int action_dim_;
    int num_skills_;
    std::vector<Transition> storage_;
    std::int64_t cursor_ = 0;  // next overwrite position once full
};

}  // namespace sd

#pragma once

#include <Eigen/Dense>
#include <memory>

#include "skilldisc/rng.hpp"

namespace sd {

using Vec = Eigen::VectorXd;

struct EnvSpec {
    int state_dim = 0;
    int action_dim = 0;
    Vec action_low;
    Vec action_high;
    int max_episode_steps = 0;

    void validate() const;  // positive dims, low < high componentwise
};

struct StepResult {
    Vec next_state;
    double extrinsic_reward = 0.0;
    bool done = false;
};

// Uniform contract over the built-in maze and external adapters. Episodes
// terminate at max_episode_steps; stepping a finished episode is an error.
class Environment {
public:
    virtual ~Environment() = default;
    virtual const EnvSpec& spec() const = 0;
    virtual Vec reset(Rng& rng) = 0;
    virtual StepResult step(const Vec& action) = 0;
};

}  // namespace sd

#include "skilldisc/point_maze.hpp"

#include <cmath>

#include "skilldisc/errors.hpp"

namespace sd {

void EnvSpec::validate() const {
    if (state_dim < 1 || action_dim < 1) throw ValidationError("environment dimensions must be positive");
    if (action_low.size() != action_dim || action_high.size() != action_dim)
        throw ValidationError("action bound vectors must have length action_dim");
    for (int i = 0; i < action_dim; ++i)
        if (!(action_low[i] < action_high[i]))
            throw ValidationError("action_low must be strictly below action_high componentwise");
    if (max_episode_steps < 1) throw ValidationError("max_episode_steps must be >= 1");
}

PointMaze::PointMaze(int max_episode_steps, bool shared_reset_epsilon)
    : shared_reset_epsilon_(shared_reset_epsilon) {
    spec_.state_dim = 2;
    spec_.action_dim = 2;
    spec_.action_low = Vec::Constant(2, -1.0);
    spec_.action_high = Vec::Constant(2, 1.0);
    spec_.max_episode_steps = max_episode_steps;
    spec_.validate();
}

Vec PointMaze::reset(Rng& rng) {
    double ex = uniform(rng, -1.0, 1.0);
    double ey = shared_reset_epsilon_ ? ex : uniform(rng, -1.0, 1.0);
    position_ = Vec(2);
    position_ << (7.0 + ex) / 14.0, (7.0 + ey) / 14.0;
    steps_ = 0;
    active_ = true;
    return position_;
}

Vec PointMaze::next_position(const Vec& position, const Vec& action) {
    Vec next = position + action * kStepScale;
    return next.cwiseMax(kWallLow).cwiseMin(kWallHigh);
}

double PointMaze::reward_at(const Vec& position) {
    double dx = position[0] - kKernelX;
    double dy = position[1] - kKernelY;
    return std::exp(-(dx * dx + dy * dy) / (2.0 * kKernelSigma * kKernelSigma));
}

StepResult PointMaze::step(const Vec& action) {
    if (!active_) throw ValidationError("step called on a finished or unreset episode");
    if (action.size() != 2) throw ValidationError("point maze action must have length 2");
    for (int i = 0; i < 2; ++i)
        if (!(action[i] > -1.0 && action[i] < 1.0))
            throw ValidationError("point maze action component outside (-1, 1)");

    position_ = next_position(position_, action);
    ++steps_;
    StepResult r;
    r.next_state = position_;
    r.extrinsic_reward = reward_at(position_);
    r.done = steps_ >= spec_.max_episode_steps;
    if (r.done) active_ = false;
    return r;
}

}  // namespace sd

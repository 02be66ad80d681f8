#pragma once

#include "skilldisc/env.hpp"

namespace sd {

// Open 2D plane bounded by walls at [1/7, 6/7] on both axes. The agent starts
// near the center and may move by up to 1/70 per axis per step. The extrinsic
// reward is a Gaussian kernel centered at (9/14, 3/14).
class PointMaze : public Environment {
public:
    static constexpr double kWallLow = 1.0 / 7.0;
    static constexpr double kWallHigh = 6.0 / 7.0;
    static constexpr double kStepScale = 1.0 / 70.0;
    static constexpr double kKernelX = 9.0 / 14.0;
    static constexpr double kKernelY = 3.0 / 14.0;
    static constexpr double kKernelSigma = 1.0 / 14.0;

    explicit PointMaze(int max_episode_steps = 100, bool shared_reset_epsilon = false);

    const EnvSpec& spec() const override { return spec_; }
    Vec reset(Rng& rng) override;
    StepResult step(const Vec& action) override;

    // Pure transition function: clipped position after one action.
    static Vec next_position(const Vec& position, const Vec& action);
    static double reward_at(const Vec& position);

private:
    EnvSpec spec_;
    Vec position_;
    int steps_ = 0;
    bool active_ = false;
    bool shared_reset_epsilon_;
};

}  // namespace sd

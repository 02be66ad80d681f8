#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace sd {

// Experiment configuration. Loaded from a flat key=value text file; unknown
// keys are rejected. Every field has a documented default so a minimal config
// only needs to name what it overrides.
struct Config {
    std::string experiment = "default";
    std::uint64_t seed = 0;

    int num_skills = 50;
    int embedding_dim = 1;
    int state_dim = 2;
    int action_dim = 2;

    double entropy_weight = 0.1;   // alpha
    double discount = 0.99;        // gamma
    double polyak_rate = 0.005;    // tau

    std::int64_t buffer_capacity = 1000000;
    int batch_size = 256;
    int epochs = 100;
    int env_steps_per_epoch = 1000;
    int train_steps_per_epoch = 1000;
    int init_random_steps = 1000;  // uniform-action warmup before the policy acts

    double lr_policy = 3e-4;
    double lr_q = 3e-4;
    double lr_discriminator = 3e-4;
    double lr_encoder = 3e-4;

    int gmm_components = 4;
    double gumbel_temperature = 1.0;
    std::vector<int> hidden_sizes = {300, 300};

    // Reference training stops early once the deterministic evaluation return
    // reaches this value; 0 disables early stopping.
    double early_stop_return = 0.0;

    int max_episode_steps = 100;
    int n_traj = 10;           // trajectories per label for dataset collection
    int eval_rollouts = 5;     // rollouts per skill at evaluation time

    bool projection_enabled = true;
    bool standardize = true;
    bool shared_reset_epsilon = false;  // share the maze reset noise across axes

    // Parse "key = value" lines; '#' starts a comment. Throws ConfigError on
    // unknown keys, unparsable values, or failed validation.
    static Config from_file(const std::string& path);
    static Config from_string(const std::string& text);

    // Throws ConfigError if any range or dimensional invariant is violated.
    void validate() const;

    // Canonical key=value serialization (sorted keys), used for hashing and
    // for the manifests written next to every output artifact.
    std::string to_string() const;
    std::uint64_t hash() const;

    void set(const std::string& key, const std::string& value);
};

}  // namespace sd

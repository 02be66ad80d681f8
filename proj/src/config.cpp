#include "skilldisc/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "skilldisc/errors.hpp"
#include "skilldisc/rng.hpp"

namespace sd {

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_real(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': cannot parse real value '" + v + "'");
    }
}

std::int64_t parse_int(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        std::int64_t i = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return i;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': cannot parse integer value '" + v + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("config key '" + key + "': cannot parse boolean value '" + v + "'");
}

std::vector<int> parse_int_list(const std::string& key, const std::string& v) {
    std::vector<int> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(static_cast<int>(parse_int(key, item)));
    }
    if (out.empty()) throw ConfigError("config key '" + key + "': empty list");
    return out;
}

}  // namespace

void Config::set(const std::string& key, const std::string& value) {
    if (key == "experiment") experiment = value;
    else if (key == "seed") seed = static_cast<std::uint64_t>(parse_int(key, value));
    else if (key == "num_skills") num_skills = static_cast<int>(parse_int(key, value));
    else if (key == "embedding_dim") embedding_dim = static_cast<int>(parse_int(key, value));
    else if (key == "state_dim") state_dim = static_cast<int>(parse_int(key, value));
    else if (key == "action_dim") action_dim = static_cast<int>(parse_int(key, value));
    else if (key == "entropy_weight") entropy_weight = parse_real(key, value);
    else if (key == "discount") discount = parse_real(key, value);
    else if (key == "polyak_rate") polyak_rate = parse_real(key, value);
    else if (key == "buffer_capacity") buffer_capacity = parse_int(key, value);
    else if (key == "batch_size") batch_size = static_cast<int>(parse_int(key, value));
    else if (key == "epochs") epochs = static_cast<int>(parse_int(key, value));
    else if (key == "env_steps_per_epoch") env_steps_per_epoch = static_cast<int>(parse_int(key, value));
    else if (key == "train_steps_per_epoch") train_steps_per_epoch = static_cast<int>(parse_int(key, value));
    else if (key == "init_random_steps") init_random_steps = static_cast<int>(parse_int(key, value));
    else if (key == "lr_policy") lr_policy = parse_real(key, value);
    else if (key == "lr_q") lr_q = parse_real(key, value);
    else if (key == "lr_discriminator") lr_discriminator = parse_real(key, value);
    else if (key == "lr_encoder") lr_encoder = parse_real(key, value);
    else if (key == "gmm_components") gmm_components = static_cast<int>(parse_int(key, value));
    else if (key == "gumbel_temperature") gumbel_temperature = parse_real(key, value);
    else if (key == "hidden_sizes") hidden_sizes = parse_int_list(key, value);
    else if (key == "early_stop_return") early_stop_return = parse_real(key, value);
    else if (key == "max_episode_steps") max_episode_steps = static_cast<int>(parse_int(key, value));
    else if (key == "n_traj") n_traj = static_cast<int>(parse_int(key, value));
    else if (key == "eval_rollouts") eval_rollouts = static_cast<int>(parse_int(key, value));
    else if (key == "projection_enabled") projection_enabled = parse_bool(key, value);
    else if (key == "standardize") standardize = parse_bool(key, value);
    else if (key == "shared_reset_epsilon") shared_reset_epsilon = parse_bool(key, value);
    else throw ConfigError("unknown config key '" + key + "'");
}

Config Config::from_string(const std::string& text) {
    Config cfg;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value'");
        cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    cfg.validate();
    return cfg;
}

Config Config::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return from_string(buf.str());
}

void Config::validate() const {
    auto require = [](bool ok, const std::string& msg) {
        if (!ok) throw ConfigError("config: " + msg);
    };
    require(num_skills >= 1, "num_skills must be >= 1");
    require(embedding_dim >= 1, "embedding_dim must be >= 1");
    require(state_dim >= 1, "state_dim must be >= 1");
    require(action_dim >= 1, "action_dim must be >= 1");
    if (projection_enabled)
        require(embedding_dim < state_dim,
                "embedding_dim must be strictly smaller than state_dim when the projection is enabled");
    require(entropy_weight > 0.0, "entropy_weight must be > 0");
    require(discount > 0.0 && discount <= 1.0, "discount must be in (0, 1]");
    require(polyak_rate > 0.0 && polyak_rate <= 1.0, "polyak_rate must be in (0, 1]");
    require(buffer_capacity >= 1, "buffer_capacity must be >= 1");
    require(batch_size >= 1, "batch_size must be >= 1");
    require(epochs >= 0, "epochs must be >= 0");
    require(env_steps_per_epoch >= 0, "env_steps_per_epoch must be >= 0");
    require(train_steps_per_epoch >= 0, "train_steps_per_epoch must be >= 0");
    require(init_random_steps >= 0, "init_random_steps must be >= 0");
    require(lr_policy > 0 && lr_q > 0 && lr_discriminator > 0 && lr_encoder > 0,
            "learning rates must be > 0");
    require(gmm_components >= 1, "gmm_components must be >= 1");
    require(gumbel_temperature > 0.0, "gumbel_temperature must be > 0");
    for (int h : hidden_sizes) require(h >= 1, "hidden sizes must be >= 1");
    require(max_episode_steps >= 1, "max_episode_steps must be >= 1");
    require(n_traj >= 1, "n_traj must be >= 1");
    require(eval_rollouts >= 1, "eval_rollouts must be >= 1");
}

std::string Config::to_string() const {
    std::ostringstream out;
    out.precision(17);
    out << "action_dim = " << action_dim << "\n";
    out << "batch_size = " << batch_size << "\n";
    out << "buffer_capacity = " << buffer_capacity << "\n";
    out << "discount = " << discount << "\n";
    out << "early_stop_return = " << early_stop_return << "\n";
    out << "embedding_dim = " << embedding_dim << "\n";
    out << "entropy_weight = " << entropy_weight << "\n";
    out << "env_steps_per_epoch = " << env_steps_per_epoch << "\n";
    out << "epochs = " << epochs << "\n";
    out << "eval_rollouts = " << eval_rollouts << "\n";
    out << "experiment = " << experiment << "\n";
    out << "gmm_components = " << gmm_components << "\n";
    out << "gumbel_temperature = " << gumbel_temperature << "\n";
    out << "hidden_sizes = ";
    for (std::size_t i = 0; i < hidden_sizes.size(); ++i)
        out << (i ? "," : "") << hidden_sizes[i];
    out << "\n";
    out << "init_random_steps = " << init_random_steps << "\n";
    out << "lr_discriminator = " << lr_discriminator << "\n";
    out << "lr_encoder = " << lr_encoder << "\n";
    out << "lr_policy = " << lr_policy << "\n";
    out << "lr_q = " << lr_q << "\n";
    out << "max_episode_steps = " << max_episode_steps << "\n";
    out << "n_traj = " << n_traj << "\n";
    out << "num_skills = " << num_skills << "\n";
    out << "polyak_rate = " << polyak_rate << "\n";
    out << "projection_enabled = " << (projection_enabled ? "true" : "false") << "\n";
    out << "seed = " << seed << "\n";
    out << "shared_reset_epsilon = " << (shared_reset_epsilon ? "true" : "false") << "\n";
    out << "standardize = " << (standardize ? "true" : "false") << "\n";
    out << "state_dim = " << state_dim << "\n";
    out << "train_steps_per_epoch = " << train_steps_per_epoch << "\n";
    return out.str();
}

std::uint64_t Config::hash() const { return fnv1a(to_string()); }

}  // namespace sd

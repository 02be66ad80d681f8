#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "skilldisc/env.hpp"

namespace sd {

// Wire protocol for external continuous-control environments, spoken over a
// local socket or pipe pair. All integers and doubles are little-endian.
//
//   handshake: client sends magic "SDEV" + version byte; the server echoes
//   both and follows with one length-prefixed SPEC payload:
//     u32 state_dim, u32 action_dim, u32 max_episode_steps,
//     action_dim f64 action_low, action_dim f64 action_high.
//
//   messages: u32 payload length, then the payload. Client payloads start
//   with an opcode byte: 0x01 RESET, 0x02 STEP (followed by action_dim f64),
//   0x03 CLOSE. Server replies: RESET -> state_dim f64; STEP -> state_dim
//   f64 + f64 reward + done byte.
namespace wire {
inline constexpr char kMagic[4] = {'S', 'D', 'E', 'V'};
inline constexpr std::uint8_t kVersion = 1;
inline constexpr std::uint8_t kOpReset = 0x01;
inline constexpr std::uint8_t kOpStep = 0x02;
inline constexpr std::uint8_t kOpClose = 0x03;
}  // namespace wire

// Client side: presents a remote process as an Environment. The remote owns
// its episode state and seeding; the Rng argument of reset() is unused.
class RemoteEnv : public Environment {
public:
    // Takes ownership of the descriptors. When expected_state_dim /
    // expected_action_dim are given, a handshake mismatch is a construction
    // error.
    RemoteEnv(int read_fd, int write_fd, std::optional<int> expected_state_dim = std::nullopt,
              std::optional<int> expected_action_dim = std::nullopt);
    ~RemoteEnv() override;

    RemoteEnv(const RemoteEnv&) = delete;
    RemoteEnv& operator=(const RemoteEnv&) = delete;

    const EnvSpec& spec() const override { return spec_; }
    Vec reset(Rng& rng) override;
    StepResult step(const Vec& action) override;

private:
    void send_payload(const std::string& payload);
    std::string recv_payload();

    int read_fd_ = -1;
    int write_fd_ = -1;
    EnvSpec spec_;
    int steps_ = 0;
    bool active_ = false;
};

// Server side: answers the wire protocol on behalf of a local Environment
// until CLOSE or EOF. Used by tests and by adapter executables.
void serve_environment(Environment& env, std::uint64_t seed, int read_fd, int write_fd);

}  // namespace sd

#include "skilldisc/remote_env.hpp"

#include <unistd.h>

#include <cstring>

#include "skilldisc/errors.hpp"

namespace sd {

namespace {

void write_all(int fd, const void* data, std::size_t n) {
    const char* p = static_cast<const char*>(data);
    while (n > 0) {
        ssize_t w = ::write(fd, p, n);
        if (w <= 0) throw ArtifactError("remote env: write failed");
        p += w;
        n -= static_cast<std::size_t>(w);
    }
}

bool read_all(int fd, void* data, std::size_t n) {
    char* p = static_cast<char*>(data);
    while (n > 0) {
        ssize_t r = ::read(fd, p, n);
        if (r == 0) return false;  // EOF
        if (r < 0) throw ArtifactError("remote env: read failed");
        p += r;
        n -= static_cast<std::size_t>(r);
    }
    return true;
}

void append(std::string& buf, const void* data, std::size_t n) {
    buf.append(static_cast<const char*>(data), n);
}

template <typename T>
T take(const std::string& buf, std::size_t& at) {
    if (at + sizeof(T) > buf.size()) throw ArtifactError("remote env: short message");
    T v;
    std::memcpy(&v, buf.data() + at, sizeof(T));
    at += sizeof(T);
    return v;
}

void send_framed(int fd, const std::string& payload) {
    std::uint32_t len = static_cast<std::uint32_t>(payload.size());
    write_all(fd, &len, 4);
    write_all(fd, payload.data(), payload.size());
}

std::optional<std::string> recv_framed(int fd) {
    std::uint32_t len;
    if (!read_all(fd, &len, 4)) return std::nullopt;
    std::string payload(len, '\0');
    if (len > 0 && !read_all(fd, payload.data(), len))
        throw ArtifactError("remote env: truncated message");
    return payload;
}

}  // namespace

RemoteEnv::RemoteEnv(int read_fd, int write_fd, std::optional<int> expected_state_dim,
                     std::optional<int> expected_action_dim)
    : read_fd_(read_fd), write_fd_(write_fd) {
    char hello[5];
    std::memcpy(hello, wire::kMagic, 4);
    hello[4] = static_cast<char>(wire::kVersion);
    write_all(write_fd_, hello, 5);

    char echo[5];
    if (!read_all(read_fd_, echo, 5) || std::memcmp(echo, wire::kMagic, 4) != 0)
        throw ArtifactError("remote env: handshake failed (bad magic)");
    if (static_cast<std::uint8_t>(echo[4]) != wire::kVersion)
        throw ArtifactError("remote env: protocol version mismatch");

    auto payload = recv_framed(read_fd_);
    if (!payload) throw ArtifactError("remote env: missing spec message");
    std::size_t at = 0;
    spec_.state_dim = static_cast<int>(take<std::uint32_t>(*payload, at));
    spec_.action_dim = static_cast<int>(take<std::uint32_t>(*payload, at));
    spec_.max_episode_steps = static_cast<int>(take<std::uint32_t>(*payload, at));
    spec_.action_low.resize(spec_.action_dim);
    spec_.action_high.resize(spec_.action_dim);
    for (int i = 0; i < spec_.action_dim; ++i) spec_.action_low[i] = take<double>(*payload, at);
    for (int i = 0; i < spec_.action_dim; ++i) spec_.action_high[i] = take<double>(*payload, at);
    spec_.validate();

    if (expected_state_dim && *expected_state_dim != spec_.state_dim)
        throw ArtifactError("remote env: state_dim mismatch (expected " +
                            std::to_string(*expected_state_dim) + ", got " +
                            std::to_string(spec_.state_dim) + ")");
    if (expected_action_dim && *expected_action_dim != spec_.action_dim)
        throw ArtifactError("remote env: action_dim mismatch");
}

RemoteEnv::~RemoteEnv() {
    try {
        std::string payload(1, static_cast<char>(wire::kOpClose));
        send_framed(write_fd_, payload);
    } catch (...) {
    }
    if (read_fd_ >= 0) ::close(read_fd_);
    if (write_fd_ >= 0 && write_fd_ != read_fd_) ::close(write_fd_);
}

Vec RemoteEnv::reset(Rng&) {
    std::string payload(1, static_cast<char>(wire::kOpReset));
    send_framed(write_fd_, payload);
    auto reply = recv_framed(read_fd_);
    if (!reply) throw ArtifactError("remote env: connection closed during reset");
    std::size_t at = 0;
    Vec state(spec_.state_dim);
    for (int i = 0; i < spec_.state_dim; ++i) state[i] = take<double>(*reply, at);
    steps_ = 0;
    active_ = true;
    return state;
}

StepResult RemoteEnv::step(const Vec& action) {
    if (!active_) throw ValidationError("remote env: step called on a finished or unreset episode");
    if (action.size() != spec_.action_dim)
        throw ValidationError("remote env: action dimension mismatch");
    std::string payload(1, static_cast<char>(wire::kOpStep));
    for (int i = 0; i < spec_.action_dim; ++i) append(payload, &action[i], sizeof(double));
    send_framed(write_fd_, payload);

    auto reply = recv_framed(read_fd_);
    if (!reply) throw ArtifactError("remote env: connection closed during step");
    std::size_t at = 0;
    StepResult r;
    r.next_state.resize(spec_.state_dim);
    for (int i = 0; i < spec_.state_dim; ++i) r.next_state[i] = take<double>(*reply, at);
    r.extrinsic_reward = take<double>(*reply, at);
    r.done = take<std::uint8_t>(*reply, at) != 0;
    ++steps_;
    if (r.done || steps_ >= spec_.max_episode_steps) {
        r.done = true;
        active_ = false;
    }
    return r;
}

void serve_environment(Environment& env, std::uint64_t seed, int read_fd, int write_fd) {
    char hello[5];
    if (!read_all(read_fd, hello, 5)) return;
    if (std::memcmp(hello, wire::kMagic, 4) != 0 ||
        static_cast<std::uint8_t>(hello[4]) != wire::kVersion)
        throw ArtifactError("remote env server: bad handshake");
    write_all(write_fd, hello, 5);

    const EnvSpec& spec = env.spec();
    std::string spec_msg;
    std::uint32_t sd32 = static_cast<std::uint32_t>(spec.state_dim);
    std::uint32_t ad32 = static_cast<std::uint32_t>(spec.action_dim);
    std::uint32_t hs32 = static_cast<std::uint32_t>(spec.max_episode_steps);
    append(spec_msg, &sd32, 4);
    append(spec_msg, &ad32, 4);
    append(spec_msg, &hs32, 4);
    for (int i = 0; i < spec.action_dim; ++i) append(spec_msg, &spec.action_low[i], 8);
    for (int i = 0; i < spec.action_dim; ++i) append(spec_msg, &spec.action_high[i], 8);
    send_framed(write_fd, spec_msg);

    Rng rng(seed);
    while (true) {
        auto msg = recv_framed(read_fd);
        if (!msg || msg->empty()) return;
        std::size_t at = 0;
        auto op = take<std::uint8_t>(*msg, at);
        if (op == wire::kOpClose) return;
        if (op == wire::kOpReset) {
            Vec s = env.reset(rng);
            std::string reply;
            for (int i = 0; i < s.size(); ++i) append(reply, &s[i], 8);
            send_framed(write_fd, reply);
        } else if (op == wire::kOpStep) {
            Vec a(spec.action_dim);
            for (int i = 0; i < spec.action_dim; ++i) a[i] = take<double>(*msg, at);
            StepResult r = env.step(a);
            std::string reply;
            for (int i = 0; i < r.next_state.size(); ++i) append(reply, &r.next_state[i], 8);
            append(reply, &r.extrinsic_reward, 8);
            std::uint8_t done = r.done ? 1 : 0;
            append(reply, &done, 1);
            send_framed(write_fd, reply);
        } else {
            throw ArtifactError("remote env server: unknown opcode");
        }
    }
}

}  // namespace sd

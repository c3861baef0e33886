#include "smsotp/wire.hpp"

#include <unistd.h>

#include <array>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <utility>

namespace smsotp {

std::string_view to_string(Channel via) {
    return via == Channel::Http ? "Http" : "Sms";
}

std::string_view to_string(MsgKind kind) {
    switch (kind) {
        case MsgKind::Login: return "Login";
        case MsgKind::LoginOk: return "LoginOk";
        case MsgKind::Initiate: return "Initiate";
        case MsgKind::SmsOtp: return "SmsOtp";
        case MsgKind::Confirm: return "Confirm";
        case MsgKind::Result: return "Result";
    }
    return "?";
}

std::optional<Channel> parse_channel(std::string_view s) {
    if (s == "Http") return Channel::Http;
    if (s == "Sms") return Channel::Sms;
    return std::nullopt;
}

std::optional<MsgKind> parse_msg_kind(std::string_view s) {
    if (s == "Login") return MsgKind::Login;
    if (s == "LoginOk") return MsgKind::LoginOk;
    if (s == "Initiate") return MsgKind::Initiate;
    if (s == "SmsOtp") return MsgKind::SmsOtp;
    if (s == "Confirm") return MsgKind::Confirm;
    if (s == "Result") return MsgKind::Result;
    return std::nullopt;
}

WireMessage::WireMessage(MsgKind kind, Channel via, std::string from, std::string to)
    : kind_(kind), via_(via), from_(std::move(from)), to_(std::move(to)) {}

WireMessage& WireMessage::set(std::string key, std::string value) {
    if (key == kReservedSecretKeyField) {
        throw std::invalid_argument("WireMessage: the secret key never goes on the wire");
    }
    fields_[std::move(key)] = std::move(value);
    return *this;
}

const std::string* WireMessage::get(const std::string& key) const {
    auto it = fields_.find(key);
    return it == fields_.end() ? nullptr : &it->second;
}

nlohmann::json WireMessage::to_json() const {
    return {
        {"kind", to_string(kind_)},
        {"via", to_string(via_)},
        {"from", from_},
        {"to", to_},
        {"fields", fields_},
    };
}

WireMessage WireMessage::from_json(const nlohmann::json& j) {
    const auto kind = parse_msg_kind(j.at("kind").get<std::string>());
    const auto via = parse_channel(j.at("via").get<std::string>());
    if (!kind || !via) {
        throw std::runtime_error("WireMessage: unknown kind or channel tag");
    }
    WireMessage msg(*kind, *via, j.at("from").get<std::string>(), j.at("to").get<std::string>());
    if (j.contains("fields")) {
        // Deliberately not routed through set(): received data is recorded
        // as-is, reserved fields included, and judged by the transcript checks.
        msg.fields_ = j.at("fields").get<std::map<std::string, std::string>>();
    }
    return msg;
}

Transcript::Transcript(const Transcript& other) {
    std::lock_guard lock(other.mu_);
    entries_ = other.entries_;
}

Transcript& Transcript::operator=(const Transcript& other) {
    if (this == &other) return *this;
    std::scoped_lock lock(mu_, other.mu_);
    entries_ = other.entries_;
    return *this;
}

std::uint64_t Transcript::log(const WireMessage& msg) {
    std::lock_guard lock(mu_);
    const std::uint64_t seq = entries_.size();
    entries_.push_back(TranscriptEntry{seq, msg});
    return seq;
}

std::vector<TranscriptEntry> Transcript::entries() const {
    std::lock_guard lock(mu_);
    return entries_;
}

std::size_t Transcript::size() const {
    std::lock_guard lock(mu_);
    return entries_.size();
}

std::string Transcript::to_jsonl() const {
    std::lock_guard lock(mu_);
    std::string out;
    for (const TranscriptEntry& entry : entries_) {
        nlohmann::json line = entry.msg.to_json();
        line["seq"] = entry.seq;
        out += line.dump();
        out += '\n';
    }
    return out;
}

void Transcript::write_file(const std::string& path) const {
    std::ofstream f(path, std::ios::trunc | std::ios::binary);
    if (!f) {
        throw std::runtime_error("Transcript: cannot open " + path + " for writing");
    }
    f << to_jsonl();
}

namespace {

bool read_exact(int fd, unsigned char* buf, std::size_t len, bool eof_ok_at_start) {
    std::size_t got = 0;
    while (got < len) {
        const ssize_t r = ::read(fd, buf + got, len - got);
        if (r == 0) {
            if (got == 0 && eof_ok_at_start) return false;
            throw std::runtime_error("read_frame: connection closed mid-frame");
        }
        if (r < 0) {
            if (errno == EINTR) continue;
            throw std::runtime_error(std::string("read_frame: ") + std::strerror(errno));
        }
        got += static_cast<std::size_t>(r);
    }
    return true;
}

} // namespace

std::optional<nlohmann::json> read_frame(int fd) {
    std::array<unsigned char, 4> header{};
    if (!read_exact(fd, header.data(), header.size(), true)) {
        return std::nullopt;
    }
    const std::uint32_t len = (std::uint32_t{header[0]} << 24) | (std::uint32_t{header[1]} << 16) |
                              (std::uint32_t{header[2]} << 8) | std::uint32_t{header[3]};
    if (len == 0 || len > kMaxFrameBytes) {
        throw std::runtime_error("read_frame: frame length " + std::to_string(len) +
                                 " outside 1.." + std::to_string(kMaxFrameBytes));
    }
    std::string payload(len, '\0');
    read_exact(fd, reinterpret_cast<unsigned char*>(payload.data()), len, false);
    return nlohmann::json::parse(payload);
}

void write_frame(int fd, const nlohmann::json& j) {
    const std::string payload = j.dump();
    if (payload.size() > kMaxFrameBytes) {
        throw std::runtime_error("write_frame: frame too large");
    }
    const std::uint32_t len = static_cast<std::uint32_t>(payload.size());
    std::string out;
    out.reserve(4 + payload.size());
    out.push_back(static_cast<char>((len >> 24) & 0xff));
    out.push_back(static_cast<char>((len >> 16) & 0xff));
    out.push_back(static_cast<char>((len >> 8) & 0xff));
    out.push_back(static_cast<char>(len & 0xff));
    out += payload;

    std::size_t sent = 0;
    while (sent < out.size()) {
        const ssize_t w = ::write(fd, out.data() + sent, out.size() - sent);
        if (w < 0) {
            if (errno == EINTR) continue;
            throw std::runtime_error(std::string("write_frame: ") + std::strerror(errno));
        }
        sent += static_cast<std::size_t>(w);
    }
}

} // namespace smsotp

#pragma once

#include <json.hpp>

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace smsotp {

/// Which channel a message travels on. Http stands for the website leg,
/// Sms for the phone leg; the whole point of the scheme is what may appear
/// on each.
enum class Channel { Http, Sms };

enum class MsgKind { Login, LoginOk, Initiate, SmsOtp, Confirm, Result };

std::string_view to_string(Channel via);
std::string_view to_string(MsgKind kind);
std::optional<Channel> parse_channel(std::string_view s);
std::optional<MsgKind> parse_msg_kind(std::string_view s);

/// One protocol message: a kind, a channel tag, endpoints, and a flat
/// string->string field map.
///
/// The field name "secret_key" is reserved: set() refuses it, so no code
/// path in this repo can put the secret key on the wire. from_json() stores
/// whatever arrived (a transcript has to record hostile input faithfully);
/// the transcript checks flag such fields instead.
class WireMessage {
public:
    static constexpr const char* kReservedSecretKeyField = "secret_key";

    WireMessage() = default;
    WireMessage(MsgKind kind, Channel via, std::string from, std::string to);

    WireMessage& set(std::string key, std::string value);
    const std::string* get(const std::string& key) const;

    MsgKind kind() const { return kind_; }
    Channel via() const { return via_; }
    const std::string& from() const { return from_; }
    const std::string& to() const { return to_; }
    const std::map<std::string, std::string>& fields() const { return fields_; }

    nlohmann::json to_json() const;
    static WireMessage from_json(const nlohmann::json& j);

    friend bool operator==(const WireMessage&, const WireMessage&) = default;

private:
    MsgKind kind_ = MsgKind::Result;
    Channel via_ = Channel::Http;
    std::string from_;
    std::string to_;
    std::map<std::string, std::string> fields_;
};

struct TranscriptEntry {
    std::uint64_t seq = 0;
    WireMessage msg;
};

/// Append-only ordered log of every message a run produced, one JSON object
/// per line. Logging is serialized, so seq numbers are dense and unique even
/// with concurrent connections.
class Transcript {
public:
    Transcript() = default;
    Transcript(const Transcript& other);
    Transcript& operator=(const Transcript& other);

    std::uint64_t log(const WireMessage& msg);

    std::vector<TranscriptEntry> entries() const;
    std::size_t size() const;

    std::string to_jsonl() const;
    void write_file(const std::string& path) const;

private:
    mutable std::mutex mu_;
    std::vector<TranscriptEntry> entries_;
};

/// Length-prefixed framing for the TCP transport: 4-byte big-endian length,
/// then that many bytes of JSON text.
inline constexpr std::uint32_t kMaxFrameBytes = 1 << 16;

/// Reads one frame. Returns nullopt on clean EOF before any byte of a frame;
/// throws std::runtime_error on truncation, oversized frames, or bad JSON.
std::optional<nlohmann::json> read_frame(int fd);
void write_frame(int fd, const nlohmann::json& j);

} // namespace smsotp

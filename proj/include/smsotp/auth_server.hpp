#pragma once

#include "smsotp/otp_service.hpp"
#include "smsotp/txn_password.hpp"
#include "smsotp/wire.hpp"

#include <json.hpp>

#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace smsotp {

/// A provisioned customer: hashed login PIN, the pre-shared secret key, and
/// the SMS address the OTP goes to. The PIN is never stored in clear; the
/// secret key must be (the server recomputes transaction passwords from it),
/// which is exactly what the scheme's login table prescribes.
struct Enrollment {
    std::string username;
    std::string pin_salt;  // hex
    std::string pin_hash;  // hex SHA-256 over salt and pin
    SecretKey secret_key;
    std::string mobile_number;
};

struct Session {
    std::string id;
    std::string username;
    std::string machine_id;
    std::int64_t created_at = 0;
};

/// What handling one request produced: the reply for the requesting
/// connection (Http channel) and any messages bound for the SMS channel.
struct HandleResult {
    WireMessage reply;
    std::vector<WireMessage> sms;
};

std::string sha256_hex(std::string_view data);
std::string hash_pin(std::string_view salt_hex, std::string_view pin);

/// The bank side: enrollment, PIN login, transaction initiation (issues the
/// OTP and hands the SMS to the gateway), confirmation. The wire entry point
/// is handle(); the named methods are the same operations for in-process use.
///
/// All mutations are serialized on one mutex; requests may arrive from any
/// number of connections.
class AuthServer {
public:
    static constexpr const char* kName = "server";
    static constexpr const char* kSmsGateway = "sms-gw";

    AuthServer(AuthMode mode, RsaKeyPair rsa, const Clock& clock, SeededRng& rng);

    void enroll(const std::string& username, const std::string& pin,
                const std::string& secret_key, const std::string& mobile_number);

    /// nullopt on unknown user or wrong PIN; callers present the same
    /// uniform failure either way, so there is no username oracle.
    std::optional<Session> login(const std::string& username, const std::string& pin,
                                 const std::string& machine_id);

    struct InitiateResult {
        std::string token;   // returned only on the Http reply
        WireMessage sms;     // the OTP, bound for the Sms channel only
    };
    InitiateResult initiate_transaction(const std::string& session_id,
                                        std::optional<AuthMode> mode_override = std::nullopt);

    ConsumeOutcome confirm_transaction(const std::string& session_id, std::string_view password,
                                       std::string_view token);

    /// Dispatch one wire request (Login / Initiate / Confirm). Unknown or
    /// out-of-place kinds get an error Result. Never throws on bad input.
    HandleResult handle(const WireMessage& request);

    AuthMode mode() const { return mode_; }
    const RsaKeyPair& rsa() const { return rsa_; }
    const OtpStore& store() const { return store_; }
    OtpStore& store() { return store_; }
    std::optional<Session> find_session(const std::string& session_id) const;
    bool is_enrolled(const std::string& username) const;

    /// Snapshot persistence: everything but live sessions, written on every
    /// change once a path is set.
    void set_state_path(std::string path);
    void load_state_file();
    void save_state_file() const;
    nlohmann::json state_json() const;
    void load_state_json(const nlohmann::json& j);

private:
    HandleResult handle_locked(const WireMessage& request);
    void persist_if_configured() const;

    AuthMode mode_;
    RsaKeyPair rsa_;
    const Clock& clock_;
    SeededRng& rng_;

    mutable std::recursive_mutex mu_;
    std::map<std::string, Enrollment> enrollments_;
    std::map<std::string, Session> sessions_;
    OtpStore store_;
    std::string state_path_;
};

} // namespace smsotp

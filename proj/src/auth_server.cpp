#include "smsotp/auth_server.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace smsotp {

namespace {

bool all_digits(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) {
        return std::isdigit(c) != 0;
    });
}

} // namespace

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int digest_len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &digest_len, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("sha256_hex: digest failed");
    }
    std::string hex(digest_len * 2, '\0');
    for (unsigned int i = 0; i < digest_len; ++i) {
        std::snprintf(hex.data() + 2 * i, 3, "%02x", digest[i]);
    }
    return hex;
}

std::string hash_pin(std::string_view salt_hex, std::string_view pin) {
    std::string buf;
    buf.reserve(salt_hex.size() + 1 + pin.size());
    buf.append(salt_hex).append(":").append(pin);
    return sha256_hex(buf);
}

AuthServer::AuthServer(AuthMode mode, RsaKeyPair rsa, const Clock& clock, SeededRng& rng)
    : mode_(mode), rsa_(rsa), clock_(clock), rng_(rng) {}

void AuthServer::enroll(const std::string& username, const std::string& pin,
                        const std::string& secret_key, const std::string& mobile_number) {
    std::lock_guard lock(mu_);
    if (enrollments_.contains(username)) {
        throw std::invalid_argument("enroll: username already taken");
    }
    if (!all_digits(pin)) {
        throw std::invalid_argument("enroll: pin must be a non-empty digit string");
    }
    // SecretKey's own constructor enforces the digits-only rule for the key.
    const std::string salt = rng_.hex128();
    enrollments_.emplace(username, Enrollment{username, salt, hash_pin(salt, pin),
                                              SecretKey(secret_key), mobile_number});
    persist_if_configured();
}

std::optional<Session> AuthServer::login(const std::string& username, const std::string& pin,
                                         const std::string& machine_id) {
    std::lock_guard lock(mu_);
    auto it = enrollments_.find(username);
    if (it == enrollments_.end()) {
        return std::nullopt;
    }
    if (hash_pin(it->second.pin_salt, pin) != it->second.pin_hash) {
        return std::nullopt;
    }
    Session session{rng_.hex64(), username, machine_id, clock_.now()};
    sessions_.emplace(session.id, session);
    return session;
}

AuthServer::InitiateResult AuthServer::initiate_transaction(const std::string& session_id,
                                                            std::optional<AuthMode> mode_override) {
    std::lock_guard lock(mu_);
    auto sit = sessions_.find(session_id);
    if (sit == sessions_.end()) {
        throw std::invalid_argument("initiate_transaction: unknown session");
    }
    const Session& session = sit->second;
    auto eit = enrollments_.find(session.username);
    if (eit == enrollments_.end()) {
        throw std::invalid_argument("initiate_transaction: user no longer enrolled");
    }
    const Enrollment& enrollment = eit->second;
    const AuthMode mode = mode_override.value_or(mode_);

    // The key only reaches the record in transaction-password mode; a plain
    // OTP row mirrors the key-less login table.
    const std::optional<SecretKey> key =
        mode == AuthMode::TxnPassword ? std::optional<SecretKey>(enrollment.secret_key)
                                      : std::nullopt;
    const OtpRecord rec =
        store_.issue(session.username, session.machine_id, mode, key, rsa_, clock_, rng_);
    persist_if_configured();

    WireMessage sms(MsgKind::SmsOtp, Channel::Sms, kName, kSmsGateway);
    sms.set("to", enrollment.mobile_number).set("otp", rec.otp.digits());
    return InitiateResult{rec.token.value, std::move(sms)};
}

ConsumeOutcome AuthServer::confirm_transaction(const std::string& session_id,
                                               std::string_view password,
                                               std::string_view token) {
    std::lock_guard lock(mu_);
    auto sit = sessions_.find(session_id);
    if (sit == sessions_.end()) {
        throw std::invalid_argument("confirm_transaction: unknown session");
    }
    const Session& session = sit->second;
    const ConsumeOutcome outcome =
        store_.consume(session.username, password, token, session.machine_id, clock_);
    persist_if_configured();
    return outcome;
}

HandleResult AuthServer::handle(const WireMessage& request) {
    std::lock_guard lock(mu_);
    return handle_locked(request);
}

HandleResult AuthServer::handle_locked(const WireMessage& request) {
    const auto field = [&](const char* key) -> std::string {
        const std::string* v = request.get(key);
        return v ? *v : std::string{};
    };
    const auto reply_to = request.from();

    switch (request.kind()) {
        case MsgKind::Login: {
            WireMessage reply(MsgKind::LoginOk, Channel::Http, kName, reply_to);
            const auto session = login(field("username"), field("pin"), field("machine_id"));
            if (session) {
                reply.set("ok", "true").set("session_id", session->id);
            } else {
                // Same message for unknown user and wrong PIN.
                reply.set("ok", "false").set("error", "AuthFailed");
            }
            return HandleResult{std::move(reply), {}};
        }
        case MsgKind::Initiate: {
            WireMessage reply(MsgKind::Result, Channel::Http, kName, reply_to);
            std::optional<AuthMode> mode_override;
            if (const std::string* m = request.get("mode")) {
                mode_override = parse_auth_mode(*m);
                if (!mode_override) {
                    reply.set("ok", "false").set("error", "BadMode");
                    return HandleResult{std::move(reply), {}};
                }
            }
            try {
                InitiateResult r = initiate_transaction(field("session_id"), mode_override);
                reply.set("ok", "true").set("token", r.token);
                return HandleResult{std::move(reply), {std::move(r.sms)}};
            } catch (const std::invalid_argument&) {
                reply.set("ok", "false").set("error", "InvalidSession");
                return HandleResult{std::move(reply), {}};
            }
        }
        case MsgKind::Confirm: {
            WireMessage reply(MsgKind::Result, Channel::Http, kName, reply_to);
            try {
                const ConsumeOutcome outcome =
                    confirm_transaction(field("session_id"), field("password"), field("token"));
                if (outcome == ConsumeOutcome::Accepted) {
                    reply.set("ok", "true").set("status", "accepted");
                } else {
                    reply.set("ok", "false")
                        .set("status", "rejected")
                        .set("reason", std::string(to_string(outcome)));
                }
            } catch (const std::invalid_argument&) {
                reply.set("ok", "false").set("error", "InvalidSession");
            }
            return HandleResult{std::move(reply), {}};
        }
        default: {
            WireMessage reply(MsgKind::Result, Channel::Http, kName, reply_to);
            reply.set("ok", "false").set("error", "UnexpectedKind");
            return HandleResult{std::move(reply), {}};
        }
    }
}

std::optional<Session> AuthServer::find_session(const std::string& session_id) const {
    std::lock_guard lock(mu_);
    auto it = sessions_.find(session_id);
    if (it == sessions_.end()) return std::nullopt;
    return it->second;
}

bool AuthServer::is_enrolled(const std::string& username) const {
    std::lock_guard lock(mu_);
    return enrollments_.contains(username);
}

void AuthServer::set_state_path(std::string path) {
    std::lock_guard lock(mu_);
    state_path_ = std::move(path);
}

void AuthServer::load_state_file() {
    std::lock_guard lock(mu_);
    std::ifstream f(state_path_);
    if (!f) {
        return;  // first run, nothing to load
    }
    nlohmann::json j;
    f >> j;
    load_state_json(j);
}

void AuthServer::save_state_file() const {
    std::lock_guard lock(mu_);
    if (state_path_.empty()) return;
    const std::string tmp = state_path_ + ".tmp";
    {
        std::ofstream f(tmp, std::ios::trunc);
        if (!f) {
            throw std::runtime_error("save_state_file: cannot write " + tmp);
        }
        f << state_json().dump(2) << '\n';
    }
    if (std::rename(tmp.c_str(), state_path_.c_str()) != 0) {
        throw std::runtime_error("save_state_file: rename into place failed");
    }
}

nlohmann::json AuthServer::state_json() const {
    std::lock_guard lock(mu_);
    nlohmann::json enrollments = nlohmann::json::array();
    for (const auto& [name, e] : enrollments_) {
        enrollments.push_back({
            {"username", e.username},
            {"pin_salt", e.pin_salt},
            {"pin_hash", e.pin_hash},
            {"secret_key", e.secret_key.digits()},
            {"mobile_number", e.mobile_number},
        });
    }
    return {
        {"mode", to_string(mode_)},
        {"enrollments", enrollments},
        {"otp_records", store_.to_json()},
    };
}

void AuthServer::load_state_json(const nlohmann::json& j) {
    std::lock_guard lock(mu_);
    enrollments_.clear();
    for (const auto& e : j.at("enrollments")) {
        Enrollment enr{
            e.at("username").get<std::string>(),
            e.at("pin_salt").get<std::string>(),
            e.at("pin_hash").get<std::string>(),
            SecretKey(e.at("secret_key").get<std::string>()),
            e.at("mobile_number").get<std::string>(),
        };
        enrollments_.emplace(enr.username, std::move(enr));
    }
    store_.load_json(j.at("otp_records"));
}

void AuthServer::persist_if_configured() const {
    if (!state_path_.empty()) {
        save_state_file();
    }
}

} // namespace smsotp

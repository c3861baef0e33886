#include "smsotp/otp_service.hpp"

#include "smsotp/txn_password.hpp"

#include <cstdio>
#include <stdexcept>

namespace smsotp {

std::string_view to_string(AuthMode mode) {
    return mode == AuthMode::PlainOtp ? "plain" : "txn";
}

std::optional<AuthMode> parse_auth_mode(std::string_view s) {
    if (s == "plain") return AuthMode::PlainOtp;
    if (s == "txn") return AuthMode::TxnPassword;
    return std::nullopt;
}

std::string_view to_string(ConsumeOutcome outcome) {
    switch (outcome) {
        case ConsumeOutcome::Accepted: return "Accepted";
        case ConsumeOutcome::Expired: return "Expired";
        case ConsumeOutcome::TokenMismatch: return "TokenMismatch";
        case ConsumeOutcome::MachineMismatch: return "MachineMismatch";
        case ConsumeOutcome::BadPassword: return "BadPassword";
        case ConsumeOutcome::AlreadyUsed: return "AlreadyUsed";
    }
    return "?";
}

Otp generate_otp(SeededRng& rng) {
    char buf[7];
    std::snprintf(buf, sizeof(buf), "%06llu",
                  static_cast<unsigned long long>(rng.below(1'000'000)));
    return Otp(buf);
}

namespace {

void expire_record(OtpRecord& rec) {
    rec.status = RecordStatus::Expired;
    rec.token.status_bit = 0;
}

} // namespace

OtpRecord OtpStore::issue(const std::string& username, const std::string& machine_id,
                          AuthMode mode, const std::optional<SecretKey>& key,
                          const RsaKeyPair& rsa, const Clock& clock, SeededRng& rng,
                          std::optional<Otp> forced_otp) {
    if (mode == AuthMode::TxnPassword && !key.has_value()) {
        throw std::invalid_argument("issue: transaction-password mode needs the user's secret key");
    }

    std::lock_guard lock(mu_);

    OtpRecord rec{
        .username = username,
        .otp = forced_otp.has_value() ? *forced_otp : generate_otp(rng),
        .token = TokenRecord{rng.hex128(), machine_id, 1, clock.now()},
        .expected_password = "",
        .status = RecordStatus::Valid,
        .consumed = false,
        .mode = mode,
        .has_secret_key = key.has_value(),
    };
    if (mode == AuthMode::TxnPassword) {
        rec.expected_password = generate_password(rec.otp, *key, rsa).canonical;
    }

    // One active record per user: a fresh issue retires the previous one.
    auto it = records_.find(username);
    if (it != records_.end()) {
        if (it->second.status == RecordStatus::Valid) {
            expire_record(it->second);
        }
        it->second = rec;
    } else {
        records_.emplace(username, rec);
    }
    return rec;
}

ConsumeOutcome OtpStore::consume(const std::string& username, std::string_view presented,
                                 std::string_view presented_token, std::string_view machine_id,
                                 const Clock& clock) {
    std::lock_guard lock(mu_);

    auto it = records_.find(username);
    if (it == records_.end()) {
        return ConsumeOutcome::Expired;
    }
    OtpRecord& rec = it->second;

    if (rec.consumed) {
        return ConsumeOutcome::AlreadyUsed;
    }
    if (rec.status == RecordStatus::Expired) {
        return ConsumeOutcome::Expired;
    }
    if (clock.now() - rec.token.issued_at > kOtpTtlSeconds) {
        expire_record(rec);
        return ConsumeOutcome::Expired;
    }
    if (presented_token != rec.token.value) {
        return ConsumeOutcome::TokenMismatch;
    }
    if (machine_id != rec.token.machine_id) {
        return ConsumeOutcome::MachineMismatch;
    }
    const std::string& expected =
        rec.mode == AuthMode::PlainOtp ? rec.otp.digits() : rec.expected_password;
    if (!constant_time_equal(presented, expected)) {
        return ConsumeOutcome::BadPassword;
    }

    rec.consumed = true;
    expire_record(rec);
    return ConsumeOutcome::Accepted;
}

int OtpStore::expire_sweep(const Clock& clock) {
    std::lock_guard lock(mu_);
    int flipped = 0;
    for (auto& [name, rec] : records_) {
        if (rec.status == RecordStatus::Valid &&
            clock.now() - rec.token.issued_at > kOtpTtlSeconds) {
            expire_record(rec);
            ++flipped;
        }
    }
    return flipped;
}

std::optional<OtpRecord> OtpStore::find(const std::string& username) const {
    std::lock_guard lock(mu_);
    auto it = records_.find(username);
    if (it == records_.end()) return std::nullopt;
    return it->second;
}

std::size_t OtpStore::size() const {
    std::lock_guard lock(mu_);
    return records_.size();
}

nlohmann::json OtpStore::snapshot_table() const {
    std::lock_guard lock(mu_);
    nlohmann::json table = nlohmann::json::array();
    for (const auto& [name, rec] : records_) {
        table.push_back({
            {"username", rec.username},
            {"otp", rec.otp.digits()},
            {"has_secret_key", rec.has_secret_key},
            {"token", rec.token.status_bit},
            {"status", rec.status == RecordStatus::Valid ? "Valid" : "Expired"},
            {"transaction_password", rec.expected_password},
        });
    }
    return table;
}

nlohmann::json OtpStore::to_json() const {
    std::lock_guard lock(mu_);
    nlohmann::json records = nlohmann::json::array();
    for (const auto& [name, rec] : records_) {
        records.push_back({
            {"username", rec.username},
            {"otp", rec.otp.digits()},
            {"token_value", rec.token.value},
            {"machine_id", rec.token.machine_id},
            {"status_bit", rec.token.status_bit},
            {"issued_at", rec.token.issued_at},
            {"expected_password", rec.expected_password},
            {"status", rec.status == RecordStatus::Valid ? "Valid" : "Expired"},
            {"consumed", rec.consumed},
            {"mode", to_string(rec.mode)},
            {"has_secret_key", rec.has_secret_key},
        });
    }
    return records;
}

void OtpStore::load_json(const nlohmann::json& j) {
    std::lock_guard lock(mu_);
    records_.clear();
    for (const auto& r : j) {
        OtpRecord rec{
            .username = r.at("username").get<std::string>(),
            .otp = Otp(r.at("otp").get<std::string>()),
            .token = TokenRecord{r.at("token_value").get<std::string>(),
                                 r.at("machine_id").get<std::string>(),
                                 r.at("status_bit").get<int>(),
                                 r.at("issued_at").get<std::int64_t>()},
            .expected_password = r.at("expected_password").get<std::string>(),
            .status = r.at("status").get<std::string>() == "Valid" ? RecordStatus::Valid
                                                                   : RecordStatus::Expired,
            .consumed = r.at("consumed").get<bool>(),
            .mode = parse_auth_mode(r.at("mode").get<std::string>()).value_or(AuthMode::PlainOtp),
            .has_secret_key = r.at("has_secret_key").get<bool>(),
        };
        records_.emplace(rec.username, std::move(rec));
    }
}

} // namespace smsotp

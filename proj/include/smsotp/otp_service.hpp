#pragma once

#include "smsotp/clock.hpp"
#include "smsotp/passcode.hpp"
#include "smsotp/rng.hpp"
#include "smsotp/rsa.hpp"

#include <json.hpp>

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

namespace smsotp {

enum class AuthMode { PlainOtp, TxnPassword };

std::string_view to_string(AuthMode mode);
std::optional<AuthMode> parse_auth_mode(std::string_view s);

/// Server-issued token stored on the machine that initiated the transaction.
/// status_bit mirrors the login table's Status column: 1 valid, 0 expired.
/// The 1 -> 0 transition is one-way.
struct TokenRecord {
    std::string value;       // 128 random bits, hex
    std::string machine_id;  // opaque client identifier
    int status_bit = 1;
    std::int64_t issued_at = 0;
};

enum class RecordStatus { Valid, Expired };

/// One row of the server's login table. Note there is no secret-key field:
/// in transaction-password mode the key's contribution is baked into
/// expected_password at issue time and the key itself stays in the
/// enrollment store.
struct OtpRecord {
    std::string username;
    Otp otp;
    TokenRecord token;
    std::string expected_password;  // txn-password mode only
    RecordStatus status = RecordStatus::Valid;
    bool consumed = false;
    AuthMode mode = AuthMode::PlainOtp;
    bool has_secret_key = false;
};

/// Accepted, or the first failing check in a fixed order so multi-fault
/// inputs reject deterministically: AlreadyUsed, Expired, TokenMismatch,
/// MachineMismatch, BadPassword. (AlreadyUsed runs before Expired because
/// acceptance itself flips the record to Expired; it would otherwise mask
/// every replay.)
enum class ConsumeOutcome {
    Accepted,
    Expired,
    TokenMismatch,
    MachineMismatch,
    BadPassword,
    AlreadyUsed,
};

std::string_view to_string(ConsumeOutcome outcome);

/// OTPs live this long, inclusive: a consume at exactly +300 s still passes.
inline constexpr std::int64_t kOtpTtlSeconds = 300;

/// Uniform 6-digit string over 000000..999999.
Otp generate_otp(SeededRng& rng);

/// The login-table store: issuance, single-use consumption, expiry. One
/// active record per user; issuing again expires the previous one. consume
/// and expire_sweep serialize on an internal mutex, so a record can be
/// accepted at most once under any interleaving.
class OtpStore {
public:
    /// In TxnPassword mode `key` is required and expected_password is
    /// computed here, at issue time, exactly as the authenticator app will
    /// compute it. `forced_otp` pins the OTP for table demos and tests.
    OtpRecord issue(const std::string& username, const std::string& machine_id, AuthMode mode,
                    const std::optional<SecretKey>& key, const RsaKeyPair& rsa, const Clock& clock,
                    SeededRng& rng, std::optional<Otp> forced_otp = std::nullopt);

    /// Runs the full check chain against the user's active record. Accepted
    /// and detected expiry both flip the record to Expired / status_bit 0.
    /// A user with no record at all reports Expired (the reason set is
    /// closed, and to the caller an absent OTP and a long-dead one look the
    /// same).
    ConsumeOutcome consume(const std::string& username, std::string_view presented,
                           std::string_view presented_token, std::string_view machine_id,
                           const Clock& clock);

    /// Expires every Valid record older than the TTL; returns how many
    /// flipped.
    int expire_sweep(const Clock& clock);

    std::optional<OtpRecord> find(const std::string& username) const;
    std::size_t size() const;

    /// Login-table snapshot in the shape of the demo tables: one object per
    /// user with username, otp, secret-key presence flag, token bit, status,
    /// and expected transaction password.
    nlohmann::json snapshot_table() const;

    nlohmann::json to_json() const;
    void load_json(const nlohmann::json& j);

private:
    mutable std::mutex mu_;
    std::map<std::string, OtpRecord> records_;
};

} // namespace smsotp

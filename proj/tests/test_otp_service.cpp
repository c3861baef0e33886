#include "smsotp/otp_service.hpp"

#include <doctest.h>

#include <array>
#include <cctype>
#include <stdexcept>
#include <string>

using namespace smsotp;

namespace {

struct Fixture {
    ScriptedClock clock;
    SeededRng rng{12345};
    RsaKeyPair rsa = demo_key_pair();
    OtpStore store;

    OtpRecord issue_txn(const std::string& user = "John", const std::string& machine = "m1",
                        const std::string& key = "4321",
                        std::optional<Otp> forced = std::nullopt) {
        return store.issue(user, machine, AuthMode::TxnPassword, SecretKey(key), rsa, clock, rng,
                           forced);
    }
};

} // namespace

TEST_CASE("generate_otp is six digits and seed-deterministic") {
    SeededRng a(99), b(99), c(100);
    bool diverged = false;
    for (int i = 0; i < 200; ++i) {
        const Otp x = generate_otp(a);
        const Otp y = generate_otp(b);
        REQUIRE(x.digits().size() == 6);
        for (char ch : x.digits()) REQUIRE(std::isdigit(static_cast<unsigned char>(ch)));
        REQUIRE(x == y);
        diverged = diverged || !(x == generate_otp(c));
    }
    CHECK(diverged);  // a different seed gives a different stream
}

TEST_CASE("generate_otp digit frequencies pass a chi-square test") {
    SeededRng rng(4242);
    std::array<long long, 10> counts{};
    const int draws = 100'000;
    for (int i = 0; i < draws; ++i) {
        const Otp otp = generate_otp(rng);
        REQUIRE(otp.digits().size() == 6);
        for (char ch : otp.digits()) {
            REQUIRE(std::isdigit(static_cast<unsigned char>(ch)));
            ++counts[ch - '0'];
        }
    }
    const double expected = draws * 6 / 10.0;
    double chi2 = 0.0;
    for (long long count : counts) {
        const double diff = count - expected;
        chi2 += diff * diff / expected;
    }
    // Upper critical value of chi-square with 9 degrees of freedom at
    // p = 0.001. A uniform generator stays below it essentially always.
    CHECK(chi2 < 27.877);
}

TEST_CASE("issue computes the expected password exactly like the client") {
    Fixture f;
    const OtpRecord rec = f.issue_txn("John", "m1", "4321", Otp("891632"));
    CHECK(rec.expected_password == "17103118278");
    CHECK(rec.otp == Otp("891632"));
    CHECK(rec.token.status_bit == 1);
    CHECK(rec.status == RecordStatus::Valid);
    CHECK(rec.has_secret_key);
    CHECK(rec.token.machine_id == "m1");
    CHECK(rec.token.issued_at == f.clock.now());
}

TEST_CASE("issue in plain mode keeps no password and no key") {
    Fixture f;
    const OtpRecord rec =
        f.store.issue("John", "m1", AuthMode::PlainOtp, std::nullopt, f.rsa, f.clock, f.rng);
    CHECK(rec.expected_password.empty());
    CHECK_FALSE(rec.has_secret_key);
}

TEST_CASE("issue in txn mode without a key refuses") {
    Fixture f;
    CHECK_THROWS_AS(
        f.store.issue("John", "m1", AuthMode::TxnPassword, std::nullopt, f.rsa, f.clock, f.rng),
        std::invalid_argument);
}

TEST_CASE("successive issues give distinct tokens and expire the prior record") {
    Fixture f;
    const OtpRecord first = f.issue_txn();
    const OtpRecord second = f.issue_txn();
    CHECK(first.token.value != second.token.value);
    CHECK(f.store.size() == 1);  // one row per user
    const auto current = f.store.find("John");
    REQUIRE(current.has_value());
    CHECK(current->token.value == second.token.value);
}

TEST_CASE("consume boundaries around the five minute lifetime") {
    for (const std::int64_t age : {std::int64_t{0}, std::int64_t{299}, std::int64_t{300}}) {
        Fixture f;
        const OtpRecord rec = f.issue_txn();
        f.clock.advance(age);
        CAPTURE(age);
        CHECK(f.store.consume("John", rec.expected_password, rec.token.value, "m1", f.clock) ==
              ConsumeOutcome::Accepted);
    }
    Fixture f;
    const OtpRecord rec = f.issue_txn();
    f.clock.advance(301);
    CHECK(f.store.consume("John", rec.expected_password, rec.token.value, "m1", f.clock) ==
          ConsumeOutcome::Expired);
    const auto after = f.store.find("John");
    REQUIRE(after.has_value());
    CHECK(after->status == RecordStatus::Expired);
    CHECK(after->token.status_bit == 0);
}

TEST_CASE("consume rejection reasons, one condition at a time") {
    Fixture f;
    const OtpRecord rec = f.issue_txn();
    CHECK(f.store.consume("John", rec.expected_password, "deadbeef", "m1", f.clock) ==
          ConsumeOutcome::TokenMismatch);
    CHECK(f.store.consume("John", rec.expected_password, rec.token.value, "other", f.clock) ==
          ConsumeOutcome::MachineMismatch);
    CHECK(f.store.consume("John", "17103118277", rec.token.value, "m1", f.clock) ==
          ConsumeOutcome::BadPassword);
    CHECK(f.store.consume("Nobody", "x", "y", "m1", f.clock) == ConsumeOutcome::Expired);
    // The record survived all those rejections and still accepts.
    CHECK(f.store.consume("John", rec.expected_password, rec.token.value, "m1", f.clock) ==
          ConsumeOutcome::Accepted);
}

TEST_CASE("acceptance is single-use and reported as AlreadyUsed afterwards") {
    Fixture f;
    const OtpRecord rec = f.issue_txn();
    CHECK(f.store.consume("John", rec.expected_password, rec.token.value, "m1", f.clock) ==
          ConsumeOutcome::Accepted);
    CHECK(f.store.consume("John", rec.expected_password, rec.token.value, "m1", f.clock) ==
          ConsumeOutcome::AlreadyUsed);
    // Still AlreadyUsed once time runs out: replay reporting never degrades
    // into a plain Expired.
    f.clock.advance(10'000);
    CHECK(f.store.consume("John", rec.expected_password, rec.token.value, "m1", f.clock) ==
          ConsumeOutcome::AlreadyUsed);
}

TEST_CASE("status_bit drops to zero exactly once and stays there") {
    Fixture f;
    const OtpRecord rec = f.issue_txn();
    CHECK(f.store.find("John")->token.status_bit == 1);
    f.store.consume("John", rec.expected_password, rec.token.value, "m1", f.clock);
    CHECK(f.store.find("John")->token.status_bit == 0);
    f.store.consume("John", rec.expected_password, rec.token.value, "m1", f.clock);
    f.clock.advance(400);
    f.store.expire_sweep(f.clock);
    CHECK(f.store.find("John")->token.status_bit == 0);
    CHECK(f.store.find("John")->status == RecordStatus::Expired);
}

TEST_CASE("expire_sweep flips only overage records") {
    Fixture f;
    CHECK(f.store.expire_sweep(f.clock) == 0);

    f.issue_txn("John", "m1");
    f.clock.advance(300);
    f.issue_txn("Jim", "m2", "4567");
    f.clock.advance(100);
    // John's record is now 400s old, Jim's 100s.
    CHECK(f.store.expire_sweep(f.clock) == 1);
    CHECK(f.store.find("John")->status == RecordStatus::Expired);
    CHECK(f.store.find("John")->token.status_bit == 0);
    CHECK(f.store.find("Jim")->status == RecordStatus::Valid);
    CHECK(f.store.find("Jim")->token.status_bit == 1);
    // Exactly at the boundary nothing more flips; the sweep uses the same
    // inclusive rule as consume.
    f.clock.advance(200);
    CHECK(f.store.expire_sweep(f.clock) == 0);
    f.clock.advance(1);
    CHECK(f.store.expire_sweep(f.clock) == 1);
}

TEST_CASE("snapshot_table mirrors the login table columns") {
    Fixture f;
    f.issue_txn("John", "m1", "4321", Otp("891632"));
    f.store.issue("Jim", "m2", AuthMode::PlainOtp, std::nullopt, f.rsa, f.clock, f.rng);
    const nlohmann::json table = f.store.snapshot_table();
    REQUIRE(table.is_array());
    REQUIRE(table.size() == 2);
    for (const auto& row : table) {
        REQUIRE(row.contains("username"));
        REQUIRE(row.contains("otp"));
        REQUIRE(row.contains("has_secret_key"));
        REQUIRE(row.contains("token"));
        REQUIRE(row.contains("status"));
        REQUIRE(row.contains("transaction_password"));
    }
    const auto& john = table[0]["username"] == "Jim" ? table[1] : table[0];
    CHECK(john["otp"] == "891632");
    CHECK(john["has_secret_key"] == true);
    CHECK(john["token"] == 1);
    CHECK(john["transaction_password"] == "17103118278");
}

TEST_CASE("store state survives a json round trip") {
    Fixture f;
    const OtpRecord rec = f.issue_txn("John", "m1", "4321", Otp("891632"));
    f.clock.advance(10);

    OtpStore copy;
    copy.load_json(f.store.to_json());
    CHECK(copy.size() == 1);
    CHECK(copy.consume("John", rec.expected_password, rec.token.value, "m1", f.clock) ==
          ConsumeOutcome::Accepted);
}

TEST_CASE("outcome names match the wire words") {
    CHECK(to_string(ConsumeOutcome::Accepted) == "Accepted");
    CHECK(to_string(ConsumeOutcome::Expired) == "Expired");
    CHECK(to_string(ConsumeOutcome::TokenMismatch) == "TokenMismatch");
    CHECK(to_string(ConsumeOutcome::MachineMismatch) == "MachineMismatch");
    CHECK(to_string(ConsumeOutcome::BadPassword) == "BadPassword");
    CHECK(to_string(ConsumeOutcome::AlreadyUsed) == "AlreadyUsed");
    CHECK(parse_auth_mode("plain") == AuthMode::PlainOtp);
    CHECK(parse_auth_mode("txn") == AuthMode::TxnPassword);
    CHECK_FALSE(parse_auth_mode("bogus").has_value());
}

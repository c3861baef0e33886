#include "smsotp/txn_password.hpp"

#include "smsotp/errors.hpp"

#include <doctest.h>

#include <stdexcept>
#include <vector>

using namespace smsotp;

TEST_CASE("generate_password reproduces the demo passwords") {
    const RsaKeyPair rsa = demo_key_pair();
    struct Row {
        const char* otp;
        const char* key;
        const char* password;
    };
    const Row rows[] = {
        {"891632", "4321", "17103118278"},
        {"621589", "4567", "1881261730088"},
        {"123151", "2234", "1118271261"},
        {"356123", "3458", "272680181827"},
    };
    for (const Row& row : rows) {
        CAPTURE(row.otp);
        const TransactionPassword tp = generate_password(Otp(row.otp), SecretKey(row.key), rsa);
        CHECK(tp.canonical == row.password);
    }
}

TEST_CASE("the cipher digits behind the first demo password") {
    const RsaKeyPair rsa = demo_key_pair();
    const TransactionPassword tp = generate_password(Otp("891632"), SecretKey("4321"), rsa);
    const std::vector<u64> expected = {17, 1, 0, 3, 1, 18, 27, 8};
    REQUIRE(tp.cipher_digits.size() == expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) {
        CAPTURE(i);
        CHECK(tp.cipher_digits[i].value == expected[i]);
    }
}

TEST_CASE("generate_password equals manual per-digit encryption of the pass code") {
    const RsaKeyPair rsa = demo_key_pair();
    const Otp otp("356123");
    const SecretKey key("3458");
    const PassCode pc = build_passcode(otp, key);

    std::string manual;
    for (char c : pc.digits) {
        manual += std::to_string(encrypt_digit(c - '0', rsa).value);
    }
    CHECK(generate_password(otp, key, rsa).canonical == manual);
}

TEST_CASE("decrypt_to_passcode_digits undoes the encryption") {
    const RsaKeyPair rsa = demo_key_pair();
    const TransactionPassword tp = generate_password(Otp("891632"), SecretKey("4321"), rsa);
    CHECK(decrypt_to_passcode_digits(tp, rsa) == "81091632");

    TransactionPassword tampered = tp;
    tampered.cipher_digits[3] = DigitCiphertext{2};  // decrypts to 29, not a digit
    CHECK_THROWS_WITH_AS(decrypt_to_passcode_digits(tampered, rsa), doctest::Contains("index 3"),
                         IntegrityError);
}

TEST_CASE("constant_time_equal semantics") {
    CHECK(constant_time_equal("17103118278", "17103118278"));
    CHECK_FALSE(constant_time_equal("17103118279", "17103118278"));
    CHECK_FALSE(constant_time_equal("1710311827", "17103118278"));   // shorter
    CHECK_FALSE(constant_time_equal("171031182788", "17103118278")); // longer
    CHECK_FALSE(constant_time_equal("", "17103118278"));
    CHECK(constant_time_equal("", ""));
}

TEST_CASE("verify_password accepts the real password and nothing else") {
    const RsaKeyPair rsa = demo_key_pair();
    const Otp otp("891632");
    const SecretKey key("4321");
    CHECK(verify_password("17103118278", otp, key, rsa));
    CHECK_FALSE(verify_password("17103118277", otp, key, rsa));
    CHECK_FALSE(verify_password("891632", otp, key, rsa));  // the raw OTP is not enough
    CHECK_THROWS_AS(verify_password("17103118278 ", otp, key, rsa), std::invalid_argument);
    CHECK_THROWS_AS(verify_password("passw0rd!", otp, key, rsa), std::invalid_argument);
    CHECK_THROWS_AS(verify_password("", otp, key, rsa), std::invalid_argument);
}

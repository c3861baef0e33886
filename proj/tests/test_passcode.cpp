#include "smsotp/passcode.hpp"

#include "smsotp/errors.hpp"
#include "smsotp/rng.hpp"

#include <doctest.h>

#include <algorithm>
#include <stdexcept>
#include <string>

using namespace smsotp;

namespace {

Otp random_otp(SeededRng& rng) {
    std::string digits;
    for (int i = 0; i < 6; ++i) {
        digits += static_cast<char>('0' + rng.below(10));
    }
    return Otp(digits);
}

SecretKey random_key(SeededRng& rng) {
    const std::size_t len = 1 + rng.below(8);
    std::string digits;
    for (std::size_t i = 0; i < len; ++i) {
        digits += static_cast<char>('0' + rng.below(10));
    }
    return SecretKey(digits);
}

} // namespace

TEST_CASE("Otp accepts exactly six digits") {
    CHECK(Otp("891632").digits() == "891632");
    CHECK(Otp("000000").digits() == "000000");
    CHECK(Otp("004217").last_digit() == '7');
    CHECK_THROWS_AS(Otp("12345"), std::invalid_argument);
    CHECK_THROWS_AS(Otp("1234567"), std::invalid_argument);
    CHECK_THROWS_AS(Otp("12a456"), std::invalid_argument);
    CHECK_THROWS_AS(Otp(""), std::invalid_argument);
    CHECK_THROWS_AS(Otp(" 891632"), std::invalid_argument);
}

TEST_CASE("SecretKey accepts any nonempty digit string") {
    CHECK(SecretKey("4321").digits() == "4321");
    CHECK(SecretKey("7").digits() == "7");
    CHECK(SecretKey("00000000").digits() == "00000000");
    CHECK_THROWS_AS(SecretKey(""), std::invalid_argument);
    CHECK_THROWS_AS(SecretKey("43x1"), std::invalid_argument);
    CHECK_THROWS_AS(SecretKey("-431"), std::invalid_argument);
}

TEST_CASE("digit_sum of the demo keys") {
    CHECK(digit_sum(SecretKey("4321")) == 10);
    CHECK(digit_sum(SecretKey("4567")) == 22);
    CHECK(digit_sum(SecretKey("2234")) == 11);
    CHECK(digit_sum(SecretKey("3458")) == 20);
    CHECK(digit_sum(SecretKey("7")) == 7);
    CHECK(digit_sum(SecretKey("0")) == 0);
    CHECK(digit_sum(SecretKey("99999999")) == 72);
}

TEST_CASE("insertion_position follows the OTP's last digit, 0 meaning 10") {
    CHECK(insertion_position(Otp("891632")) == 2);
    CHECK(insertion_position(Otp("123151")) == 1);
    CHECK(insertion_position(Otp("621589")) == 9);
    CHECK(insertion_position(Otp("356123")) == 3);
    CHECK(insertion_position(Otp("402340")) == 10);
    CHECK(insertion_position(Otp("111117")) == 7);
}

TEST_CASE("build_passcode reproduces the demo pass codes") {
    struct Row {
        const char* otp;
        const char* key;
        const char* passcode;
        int pos;
        int len;
    };
    const Row rows[] = {
        {"891632", "4321", "81091632", 2, 2},
        {"621589", "4567", "6215890022", 9, 2},
        {"123151", "2234", "11123151", 1, 2},
        {"356123", "3458", "35206123", 3, 2},
    };
    for (const Row& row : rows) {
        CAPTURE(row.otp);
        const PassCode pc = build_passcode(Otp(row.otp), SecretKey(row.key));
        CHECK(pc.digits == row.passcode);
        CHECK(pc.sum_pos == row.pos);
        CHECK(pc.sum_len == row.len);
    }
}

TEST_CASE("build_passcode boundary positions") {
    // Position 6 still splices inside the OTP.
    CHECK(build_passcode(Otp("123456"), SecretKey("4321")).digits == "12345106");
    // Position 7 appends with no padding.
    CHECK(build_passcode(Otp("123457"), SecretKey("4321")).digits == "12345710");
    // Position 10 (last digit 0) pads with three zeros.
    CHECK(build_passcode(Otp("123450"), SecretKey("4321")).digits == "12345000010");
    // Single-digit summation.
    CHECK(build_passcode(Otp("123455"), SecretKey("5")).digits == "1234555");
    // Zero summation is the single digit "0".
    CHECK(build_passcode(Otp("123451"), SecretKey("000")).digits == "0123451");
}

TEST_CASE("extract inverts build_passcode on the demo rows") {
    for (const char* otp : {"891632", "621589", "123151", "356123"}) {
        for (const char* key : {"4321", "4567", "2234", "3458"}) {
            const PassCode pc = build_passcode(Otp(otp), SecretKey(key));
            const ExtractedPassCode out = extract(pc);
            CHECK(out.otp == Otp(otp));
            CHECK(out.summation == digit_sum(SecretKey(key)));
        }
    }
}

TEST_CASE("extract rejects inconsistent metadata") {
    // Valid digits, but the claimed position disagrees with the OTP's last
    // digit once the summation is removed.
    CHECK_THROWS_AS(extract(PassCode{"81091632", 3, 2}), IntegrityError);
    // Length law violated.
    CHECK_THROWS_AS(extract(PassCode{"81091632", 2, 3}), IntegrityError);
    CHECK_THROWS_AS(extract(PassCode{"8109163", 2, 2}), IntegrityError);
    // Summation rendered with a leading zero.
    CHECK_THROWS_AS(extract(PassCode{"80191632", 2, 2}), IntegrityError);
    // Non-zero character where padding belongs: otp 123458, pad, sum 10.
    CHECK_THROWS_AS(extract(PassCode{"123458710", 8, 2}), IntegrityError);
    // Out-of-range metadata.
    CHECK_THROWS_AS(extract(PassCode{"81091632", 0, 2}), IntegrityError);
    CHECK_THROWS_AS(extract(PassCode{"81091632", 11, 2}), IntegrityError);
    CHECK_THROWS_AS(extract(PassCode{"81091632", 2, 0}), IntegrityError);
}

TEST_CASE("extract accepts the padded layout it should") {
    const ExtractedPassCode out = extract(PassCode{"123458010", 8, 2});
    CHECK(out.otp == Otp("123458"));
    CHECK(out.summation == 10);
}

TEST_CASE("pass code length law and round trip over random inputs") {
    SeededRng rng(20'240'817);
    for (int i = 0; i < 2'000; ++i) {
        const Otp otp = random_otp(rng);
        const SecretKey key = random_key(rng);
        const PassCode pc = build_passcode(otp, key);

        // Length oracle computed from the layout definition, not the code
        // under test: OTP length, plus the summation rendering, plus padding
        // when the position runs past the end.
        const int pos = insertion_position(otp);
        const std::string sum_str = std::to_string(digit_sum(key));
        const std::size_t expected_len =
            Otp::kLength + sum_str.size() + static_cast<std::size_t>(std::max(0, pos - 7));
        CAPTURE(otp.digits());
        CAPTURE(key.digits());
        REQUIRE(pc.digits.size() == expected_len);
        REQUIRE(pc.sum_pos == pos);
        REQUIRE(pc.sum_len == static_cast<int>(sum_str.size()));
        REQUIRE(pc.digits.substr(static_cast<std::size_t>(pc.sum_pos) - 1, sum_str.size()) ==
                sum_str);

        const ExtractedPassCode back = extract(pc);
        REQUIRE(back.otp == otp);
        REQUIRE(back.summation == digit_sum(key));
    }
}

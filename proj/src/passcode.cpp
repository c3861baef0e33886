#include "smsotp/passcode.hpp"

#include "smsotp/errors.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>
#include <utility>

namespace smsotp {

namespace {

bool all_digits(const std::string& s) {
    return std::all_of(s.begin(), s.end(),
                       [](unsigned char c) { return std::isdigit(c) != 0; });
}

} // namespace

Otp::Otp(std::string digits) : digits_(std::move(digits)) {
    if (digits_.size() != kLength) {
        throw std::invalid_argument("Otp: expected exactly 6 digits, got \"" + digits_ + "\"");
    }
    if (!all_digits(digits_)) {
        throw std::invalid_argument("Otp: non-digit character in \"" + digits_ + "\"");
    }
}

SecretKey::SecretKey(std::string digits) : digits_(std::move(digits)) {
    if (digits_.empty()) {
        throw std::invalid_argument("SecretKey: must contain at least one digit");
    }
    if (!all_digits(digits_)) {
        throw std::invalid_argument("SecretKey: digits only");
    }
}

int digit_sum(const SecretKey& key) {
    int sum = 0;
    for (char c : key.digits()) {
        sum += c - '0';
    }
    return sum;
}

int insertion_position(const Otp& otp) {
    const char last = otp.last_digit();
    return last == '0' ? 10 : last - '0';
}

PassCode build_passcode(const Otp& otp, const SecretKey& key) {
    const std::string sum = std::to_string(digit_sum(key));
    const int pos = insertion_position(otp);

    std::string digits;
    if (pos <= PassCode::kOtpLength) {
        digits = otp.digits().substr(0, pos - 1) + sum + otp.digits().substr(pos - 1);
    } else {
        digits = otp.digits() + std::string(pos - 7, '0') + sum;
    }
    return PassCode{std::move(digits), pos, static_cast<int>(sum.size())};
}

ExtractedPassCode extract(const PassCode& pc) {
    if (pc.sum_len < 1) {
        throw IntegrityError("extract: sum_len must be >= 1");
    }
    if (pc.sum_pos < 1 || pc.sum_pos > 10) {
        throw IntegrityError("extract: sum_pos must be in 1..10");
    }
    const std::size_t pos = static_cast<std::size_t>(pc.sum_pos);
    const std::size_t sum_len = static_cast<std::size_t>(pc.sum_len);
    const std::size_t expected_len =
        pos <= PassCode::kOtpLength ? PassCode::kOtpLength + sum_len : (pos - 1) + sum_len;
    if (pc.digits.size() != expected_len) {
        throw IntegrityError("extract: digit count does not match sum_pos/sum_len metadata");
    }

    const std::string sum_str = pc.digits.substr(pos - 1, sum_len);
    if (sum_len > 1 && sum_str.front() == '0') {
        throw IntegrityError("extract: summation has a leading zero, not a minimal rendering");
    }

    std::string otp_digits;
    if (pos <= PassCode::kOtpLength) {
        otp_digits = pc.digits.substr(0, pos - 1) + pc.digits.substr(pos - 1 + sum_len);
    } else {
        otp_digits = pc.digits.substr(0, PassCode::kOtpLength);
        for (std::size_t i = PassCode::kOtpLength; i < pos - 1; ++i) {
            if (pc.digits[i] != '0') {
                throw IntegrityError("extract: padding positions must hold '0'");
            }
        }
    }

    Otp otp(otp_digits);
    if (insertion_position(otp) != pc.sum_pos) {
        throw IntegrityError("extract: sum_pos does not match the OTP's last digit");
    }
    return ExtractedPassCode{std::move(otp), std::stoi(sum_str)};
}

} // namespace smsotp

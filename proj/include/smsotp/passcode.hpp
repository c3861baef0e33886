#pragma once

#include <string>

namespace smsotp {

/// Six-digit SMS one-time password. Leading zeros are real digits here:
/// "004217" is valid, "4217" is not. All reads go through the string form,
/// never a numeric conversion.
class Otp {
public:
    static constexpr std::size_t kLength = 6;

    explicit Otp(std::string digits);

    const std::string& digits() const { return digits_; }
    char last_digit() const { return digits_.back(); }

    friend bool operator==(const Otp&, const Otp&) = default;

private:
    std::string digits_;
};

/// Pre-shared decimal key, length >= 1 (typically 4). It lives on the user's
/// device and in the bank's enrollment table and is never put on the wire.
class SecretKey {
public:
    explicit SecretKey(std::string digits);

    const std::string& digits() const { return digits_; }

    friend bool operator==(const SecretKey&, const SecretKey&) = default;

private:
    std::string digits_;
};

/// The OTP with the key's digit sum spliced in. sum_pos / sum_len travel with
/// the digits so the construction can be inverted and property-checked.
///
/// Layout, 1-based positions, s = decimal rendering of the digit sum:
///   pos <= 6:  otp[1..pos-1] ++ s ++ otp[pos..6]
///   pos >= 7:  otp ++ '0' x (pos-7) ++ s
/// Either way the summation substring starts at index pos.
struct PassCode {
    std::string digits;
    int sum_pos = 0;  // 1..10
    int sum_len = 0;  // >= 1

    static constexpr int kOtpLength = 6;

    friend bool operator==(const PassCode&, const PassCode&) = default;
};

/// Sum of the key's decimal digits ("4321" -> 10). Rendered downstream as a
/// minimal decimal string: no leading zeros, "0" for the all-zero key.
int digit_sum(const SecretKey& key);

/// Where the summation goes: the OTP's last digit, read from the string.
/// '1'..'9' map to positions 1..9; '0' extends the padding rule to 10 so the
/// mapping is total without colliding with position 1.
int insertion_position(const Otp& otp);

PassCode build_passcode(const Otp& otp, const SecretKey& key);

struct ExtractedPassCode {
    Otp otp;
    int summation = 0;
};

/// Inverse of build_passcode. Metadata inconsistent with the digit string
/// (wrong length, non-zero padding, unparseable summation) raises
/// IntegrityError.
ExtractedPassCode extract(const PassCode& pc);

} // namespace smsotp

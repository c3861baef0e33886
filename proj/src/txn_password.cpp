#include "smsotp/txn_password.hpp"

#include "smsotp/errors.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

namespace smsotp {

TransactionPassword generate_password(const Otp& otp, const SecretKey& key, const RsaKeyPair& rsa) {
    const PassCode pc = build_passcode(otp, key);

    std::vector<int> digits;
    digits.reserve(pc.digits.size());
    for (char c : pc.digits) {
        digits.push_back(c - '0');
    }

    TransactionPassword tp;
    tp.cipher_digits = encrypt_digits(digits, rsa);
    for (const DigitCiphertext& c : tp.cipher_digits) {
        tp.canonical += std::to_string(c.value);
    }
    return tp;
}

bool constant_time_equal(std::string_view candidate, std::string_view expected) {
    unsigned char acc = candidate.size() == expected.size() ? 0 : 1;
    for (std::size_t i = 0; i < candidate.size(); ++i) {
        const char e = expected.empty() ? '\0' : expected[i % expected.size()];
        acc = static_cast<unsigned char>(acc | (candidate[i] ^ e));
    }
    return acc == 0;
}

bool verify_password(std::string_view candidate, const Otp& otp, const SecretKey& key,
                     const RsaKeyPair& rsa) {
    if (candidate.empty() ||
        !std::all_of(candidate.begin(), candidate.end(),
                     [](unsigned char c) { return std::isdigit(c) != 0; })) {
        throw std::invalid_argument("verify_password: candidate must be a non-empty digit string");
    }
    return constant_time_equal(candidate, generate_password(otp, key, rsa).canonical);
}

std::string decrypt_to_passcode_digits(const TransactionPassword& tp, const RsaKeyPair& rsa) {
    std::string out;
    out.reserve(tp.cipher_digits.size());
    for (std::size_t i = 0; i < tp.cipher_digits.size(); ++i) {
        try {
            out += static_cast<char>('0' + decrypt_digit(tp.cipher_digits[i], rsa));
        } catch (const IntegrityError& err) {
            throw IntegrityError("cipher digit at index " + std::to_string(i) + ": " + err.what());
        }
    }
    return out;
}

} // namespace smsotp

#pragma once

#include "smsotp/passcode.hpp"
#include "smsotp/rsa.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace smsotp {

/// The credential the user actually types: the pass code encrypted digit by
/// digit, each ciphertext rendered in minimal decimal and concatenated.
///
/// The concatenation is not uniquely parseable back into digits ("17" could
/// be one ciphertext or two), so the canonical string is treated as an opaque
/// credential everywhere: it is compared, never parsed. Decryption works from
/// the per-digit list, which only the generating side holds.
struct TransactionPassword {
    std::vector<DigitCiphertext> cipher_digits;
    std::string canonical;
};

/// The same pure computation the authenticator app and the server both run:
/// build_passcode, then per-digit RSA.
TransactionPassword generate_password(const Otp& otp, const SecretKey& key, const RsaKeyPair& rsa);

/// Byte comparison whose running time depends only on candidate.size().
bool constant_time_equal(std::string_view candidate, std::string_view expected);

/// true iff candidate equals generate_password(...).canonical. A candidate
/// containing non-digits is malformed and throws std::invalid_argument,
/// which is distinct from a clean mismatch.
bool verify_password(std::string_view candidate, const Otp& otp, const SecretKey& key,
                     const RsaKeyPair& rsa);

/// Per-digit decryption back to the pass-code digit string. Propagates
/// IntegrityError (with the offending index) for ciphertexts that do not
/// decrypt to digits.
std::string decrypt_to_passcode_digits(const TransactionPassword& tp, const RsaKeyPair& rsa);

} // namespace smsotp

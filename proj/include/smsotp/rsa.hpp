#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace smsotp {

using u64 = std::uint64_t;

/// Textbook RSA parameters over deliberately tiny integers. With the demo
/// defaults (p=3, q=11) the per-digit cipher degenerates into a ten-entry
/// substitution table; that is by specification of the scheme being modeled,
/// not an oversight. See the README's security notes.
struct RsaKeyPair {
    u64 p = 0;
    u64 q = 0;
    u64 n = 0;    // p * q
    u64 phi = 0;  // (p-1) * (q-1)
    u64 e = 0;    // encryption exponent, inverse of d mod phi
    u64 d = 0;    // decryption exponent

    friend bool operator==(const RsaKeyPair&, const RsaKeyPair&) = default;
};

/// Ciphertext of a single decimal digit; value is always < n of the key pair
/// that produced it.
struct DigitCiphertext {
    u64 value = 0;
    friend bool operator==(const DigitCiphertext&, const DigitCiphertext&) = default;
};

/// Greatest common divisor. Both arguments zero is a domain error.
u64 gcd(u64 a, u64 b);

/// Smallest e in [1, phi) with (e * d) % phi == 1. Requires phi >= 2 and
/// gcd(d, phi) == 1; throws std::domain_error otherwise.
u64 mod_inverse(u64 d, u64 phi);

/// Square-and-multiply base^exponent mod modulus. modulus < 2 is a domain
/// error. exponent 0 yields 1 for any base.
u64 mod_pow(u64 base, u64 exponent, u64 modulus);

/// Trial division primality check; intended for the small parameters this
/// scheme uses.
bool is_prime(u64 n);

/// Largest modulus keygen accepts. Anything bigger buys nothing for a
/// per-digit cipher and would push mod_pow toward overflow territory.
inline constexpr u64 kMaxModulus = 1'000'000;

/// Validates p, q (prime, distinct, 11 <= p*q <= kMaxModulus) and assembles
/// the key pair. When d is omitted the smallest d >= 3 coprime to phi is
/// chosen; pass d explicitly to reproduce a specific published pair.
/// Parameter violations throw std::invalid_argument.
RsaKeyPair keygen(u64 p, u64 q, std::optional<u64> d = std::nullopt);

/// The (p=3, q=11, d=7) pair every demo table in this repo is built on.
RsaKeyPair demo_key_pair();

/// digit^e mod n for digit in 0..9. Out-of-range digit is a domain error.
DigitCiphertext encrypt_digit(int digit, const RsaKeyPair& key);

/// c^d mod n. Requires c.value < n. A result outside 0..9 means the
/// ciphertext was not produced from a digit and raises IntegrityError.
int decrypt_digit(DigitCiphertext c, const RsaKeyPair& key);

/// Element-wise encrypt_digit, order preserved. Range errors name the
/// offending index.
std::vector<DigitCiphertext> encrypt_digits(std::span<const int> digits, const RsaKeyPair& key);

} // namespace smsotp

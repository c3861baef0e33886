#include "smsotp/rsa.hpp"

#include "smsotp/errors.hpp"

#include <stdexcept>
#include <string>
#include <utility>

namespace smsotp {

u64 gcd(u64 a, u64 b) {
    if (a == 0 && b == 0) {
        throw std::domain_error("gcd(0, 0) is undefined");
    }
    while (b != 0) {
        a %= b;
        std::swap(a, b);
    }
    return a;
}

u64 mod_inverse(u64 d, u64 phi) {
    if (phi < 2) {
        throw std::domain_error("mod_inverse: modulus must be >= 2");
    }
    // Extended Euclid on (d mod phi, phi); the inverse is unchanged by the
    // reduction and the intermediates then fit comfortably in 64 bits.
    std::int64_t r0 = static_cast<std::int64_t>(phi);
    std::int64_t r1 = static_cast<std::int64_t>(d % phi);
    std::int64_t t0 = 0;
    std::int64_t t1 = 1;
    while (r1 != 0) {
        const std::int64_t qt = r0 / r1;
        r0 -= qt * r1;
        std::swap(r0, r1);
        t0 -= qt * t1;
        std::swap(t0, t1);
    }
    if (r0 != 1) {
        throw std::domain_error("mod_inverse: arguments are not coprime, no inverse exists");
    }
    const std::int64_t m = static_cast<std::int64_t>(phi);
    return static_cast<u64>(((t0 % m) + m) % m);
}

u64 mod_pow(u64 base, u64 exponent, u64 modulus) {
    if (modulus < 2) {
        throw std::domain_error("mod_pow: modulus must be >= 2");
    }
    u64 result = 1;
    base %= modulus;
    while (exponent != 0) {
        if (exponent & 1) {
            result = static_cast<u64>((static_cast<unsigned __int128>(result) * base) % modulus);
        }
        base = static_cast<u64>((static_cast<unsigned __int128>(base) * base) % modulus);
        exponent >>= 1;
    }
    return result;
}

bool is_prime(u64 n) {
    if (n < 2) return false;
    for (u64 i = 2; i <= n / i; ++i) {
        if (n % i == 0) return false;
    }
    return true;
}

RsaKeyPair keygen(u64 p, u64 q, std::optional<u64> d) {
    if (!is_prime(p)) {
        throw std::invalid_argument("keygen: p = " + std::to_string(p) + " is not prime");
    }
    if (!is_prime(q)) {
        throw std::invalid_argument("keygen: q = " + std::to_string(q) + " is not prime");
    }
    if (p == q) {
        throw std::invalid_argument("keygen: p and q must be distinct");
    }
    if (p > kMaxModulus / q) {
        throw std::invalid_argument("keygen: p*q exceeds the supported modulus bound");
    }
    const u64 n = p * q;
    if (n < 11) {
        throw std::invalid_argument("keygen: modulus must be >= 11 so all ten digits are distinct messages");
    }
    const u64 phi = (p - 1) * (q - 1);

    u64 dec = 0;
    if (d.has_value()) {
        if (*d == 0 || gcd(*d, phi) != 1) {
            throw std::invalid_argument("keygen: d must be coprime to phi");
        }
        dec = *d;
    } else {
        dec = 3;
        while (gcd(dec, phi) != 1) ++dec;
    }

    const u64 enc = mod_inverse(dec, phi);
    return RsaKeyPair{p, q, n, phi, enc, dec};
}

RsaKeyPair demo_key_pair() {
    return keygen(3, 11, 7);
}

DigitCiphertext encrypt_digit(int digit, const RsaKeyPair& key) {
    if (digit < 0 || digit > 9) {
        throw std::domain_error("encrypt_digit: digit must be in 0..9, got " + std::to_string(digit));
    }
    return DigitCiphertext{mod_pow(static_cast<u64>(digit), key.e, key.n)};
}

int decrypt_digit(DigitCiphertext c, const RsaKeyPair& key) {
    if (c.value >= key.n) {
        throw std::invalid_argument("decrypt_digit: ciphertext value must be < n");
    }
    const u64 plain = mod_pow(c.value, key.d, key.n);
    if (plain > 9) {
        throw IntegrityError("decrypt_digit: ciphertext " + std::to_string(c.value) +
                             " decrypts to " + std::to_string(plain) + ", not a digit");
    }
    return static_cast<int>(plain);
}

std::vector<DigitCiphertext> encrypt_digits(std::span<const int> digits, const RsaKeyPair& key) {
    std::vector<DigitCiphertext> out;
    out.reserve(digits.size());
    for (std::size_t i = 0; i < digits.size(); ++i) {
        if (digits[i] < 0 || digits[i] > 9) {
            throw std::domain_error("encrypt_digits: element at index " + std::to_string(i) +
                                    " is out of range 0..9");
        }
        out.push_back(encrypt_digit(digits[i], key));
    }
    return out;
}

} // namespace smsotp

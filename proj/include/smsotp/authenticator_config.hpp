#pragma once

#include "smsotp/passcode.hpp"
#include "smsotp/rsa.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>

namespace smsotp {

/// What the offline authenticator needs: the pre-shared key and the RSA
/// parameters, defaulting to the demo pair. Loaded from a small JSON file;
/// the key sits there in clear, which is the deal the scheme itself makes
/// (the device is trusted, the network is not). Keep the file out of
/// version control.
struct AuthenticatorConfig {
    SecretKey secret_key;
    u64 p = 3;
    u64 q = 11;
    u64 d = 7;

    explicit AuthenticatorConfig(SecretKey key) : secret_key(std::move(key)) {}

    /// Validates p/q/d by running them through keygen.
    RsaKeyPair key_pair() const;

    /// Fields: secret_key (digit string, required); p, q, d (integers,
    /// optional). Unknown fields rejected so typos fail loudly.
    static AuthenticatorConfig from_json(const nlohmann::json& j);
    static AuthenticatorConfig load_file(const std::string& path);
};

} // namespace smsotp

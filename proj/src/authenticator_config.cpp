#include "smsotp/authenticator_config.hpp"

#include <fstream>
#include <stdexcept>

namespace smsotp {

RsaKeyPair AuthenticatorConfig::key_pair() const {
    return keygen(p, q, d);
}

AuthenticatorConfig AuthenticatorConfig::from_json(const nlohmann::json& j) {
    if (!j.is_object()) {
        throw std::invalid_argument("config must be a JSON object");
    }
    if (!j.contains("secret_key") || !j.at("secret_key").is_string()) {
        throw std::invalid_argument("config needs a \"secret_key\" string");
    }
    AuthenticatorConfig config{SecretKey(j.at("secret_key").get<std::string>())};
    for (const auto& [key, value] : j.items()) {
        if (key == "secret_key") continue;
        u64* slot = nullptr;
        if (key == "p") slot = &config.p;
        else if (key == "q") slot = &config.q;
        else if (key == "d") slot = &config.d;
        if (!slot) {
            throw std::invalid_argument("unknown config field \"" + key + "\"");
        }
        if (!value.is_number_unsigned()) {
            throw std::invalid_argument("config field \"" + key + "\" must be a positive integer");
        }
        *slot = value.get<u64>();
    }
    return config;
}

AuthenticatorConfig AuthenticatorConfig::load_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) {
        throw std::invalid_argument("cannot read config file '" + path + "'");
    }
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("config file '" + path + "' is not valid JSON: " + e.what());
    }
    return from_json(j);
}

} // namespace smsotp

#pragma once

#include <stdexcept>

namespace smsotp {

/// Data that should be internally consistent is not: a ciphertext that did
/// not come from a digit, pass-code metadata that contradicts its digits.
struct IntegrityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace smsotp

#include "smsotp/clock.hpp"

#include <ctime>
#include <stdexcept>

namespace smsotp {

std::int64_t SystemClock::now() const {
    return static_cast<std::int64_t>(std::time(nullptr));
}

void ScriptedClock::advance(std::int64_t seconds) {
    if (seconds < 0) {
        throw std::invalid_argument("ScriptedClock::advance: clock cannot move backwards");
    }
    now_ += seconds;
}

} // namespace smsotp

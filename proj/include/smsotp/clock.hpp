#pragma once

#include <cstdint>

namespace smsotp {

/// Time source in whole seconds. Injected everywhere expiry matters so the
/// lifecycle rules can be tested without sleeping.
class Clock {
public:
    virtual ~Clock() = default;
    virtual std::int64_t now() const = 0;
};

class SystemClock final : public Clock {
public:
    std::int64_t now() const override;
};

/// Clock that moves only when told to. advance() rejects negative steps, so
/// now() is monotone non-decreasing within a run.
class ScriptedClock final : public Clock {
public:
    static constexpr std::int64_t kDefaultEpoch = 1'700'000'000;

    explicit ScriptedClock(std::int64_t start = kDefaultEpoch) : now_(start) {}

    std::int64_t now() const override { return now_; }
    void advance(std::int64_t seconds);

private:
    std::int64_t now_;
};

} // namespace smsotp

#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>

namespace ezb {

// Source of the "other" latency bucket. Virtual clocks keep reports replayable.
class Clock {
public:
    virtual ~Clock() = default;
    virtual std::int64_t now_micros() = 0;
};

class SteadyClock final : public Clock {
public:
    std::int64_t now_micros() override {
        return std::chrono::duration_cast<std::chrono::microseconds>(
                   std::chrono::steady_clock::now().time_since_epoch())
            .count();
    }
};

// Stands still unless advanced explicitly.
class VirtualClock final : public Clock {
public:
    explicit VirtualClock(std::int64_t start = 0) : now_(start) {}
    std::int64_t now_micros() override { return now_.load(); }
    void advance(std::int64_t micros) { now_ += micros; }

private:
    std::atomic<std::int64_t> now_;
};

} // namespace ezb

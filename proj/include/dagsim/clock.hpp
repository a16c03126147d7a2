#pragma once

#include <chrono>
#include <functional>

namespace dagsim {

// Timestamps and durations are milliseconds. Double keeps sub-millisecond
// resolution for latency accounting while staying in one unit everywhere.
using TimeMs = double;

// Injected time source. Pipeline components never read the system clock
// directly, so tests can drive expiry and latency with simulated time.
using Clock = std::function<TimeMs()>;

inline TimeMs steady_now_ms() {
    using namespace std::chrono;
    return duration<double, std::milli>(steady_clock::now().time_since_epoch()).count();
}

inline Clock wall_clock() {
    return [] { return steady_now_ms(); };
}

// Fully manual clock: time moves only when the test says so.
struct ManualClock {
    TimeMs now = 0;

    void advance(TimeMs delta) { now += delta; }
    Clock clock() {
        return [this] { return now; };
    }
};

// Auto-advancing clock: every reading moves time forward by a fixed step.
// Lets a whole pipeline run under simulated time without instrumentation.
struct StepClock {
    TimeMs now = 0;
    TimeMs step = 1;

    Clock clock() {
        return [this] {
            now += step;
            return now;
        };
    }
};

}  // namespace dagsim

#pragma once

// Injectable time source so the watcher can run against a fake clock.

#include <chrono>
#include <condition_variable>
#include <mutex>
#include <stop_token>
#include <string>
#include <string_view>

namespace biokg {

using SysTime = std::chrono::system_clock::time_point;

class Clock {
public:
    virtual ~Clock() = default;
    virtual SysTime now() const = 0;
    // Returns false if interrupted by a stop request before `deadline`.
    virtual bool sleep_until(SysTime deadline, std::stop_token stop) = 0;

    bool sleep_for(std::chrono::nanoseconds d, std::stop_token stop = {}) {
        return sleep_until(now() + std::chrono::duration_cast<SysTime::duration>(d), std::move(stop));
    }
};

class SystemClock final : public Clock {
public:
    SysTime now() const override { return std::chrono::system_clock::now(); }
    bool sleep_until(SysTime deadline, std::stop_token stop) override;

private:
    std::mutex mutex_;
    std::condition_variable_any cv_;
};

// Time moves only when something sleeps on it or advance() is called.
class FakeClock final : public Clock {
public:
    explicit FakeClock(SysTime start) : now_(start) {}

    SysTime now() const override {
        std::lock_guard lock(mutex_);
        return now_;
    }
    bool sleep_until(SysTime deadline, std::stop_token stop) override;
    void advance(std::chrono::nanoseconds d);

private:
    mutable std::mutex mutex_;
    SysTime now_;
};

// "2025-07-01T12:00:00Z"
std::string format_utc(SysTime t);
// Throws InvalidArgument.
SysTime parse_utc(std::string_view text);
// "2025-07-01"
std::string format_utc_date(SysTime t);

} // namespace biokg

#include "biokg/clock.hpp"

#include "biokg/error.hpp"

#include <ctime>
#include <iomanip>
#include <sstream>

#include <fmt/chrono.h>
#include <fmt/format.h>

namespace biokg {

bool SystemClock::sleep_until(SysTime deadline, std::stop_token stop) {
    std::unique_lock lock(mutex_);
    cv_.wait_until(lock, stop, deadline, [] { return false; });
    return !stop.stop_requested();
}

bool FakeClock::sleep_until(SysTime deadline, std::stop_token stop) {
    if (stop.stop_requested())
        return false;
    std::lock_guard lock(mutex_);
    if (deadline > now_)
        now_ = deadline;
    return true;
}

void FakeClock::advance(std::chrono::nanoseconds d) {
    std::lock_guard lock(mutex_);
    now_ += std::chrono::duration_cast<SysTime::duration>(d);
}

std::string format_utc(SysTime t) {
    return fmt::format("{:%Y-%m-%dT%H:%M:%S}Z", fmt::gmtime(std::chrono::system_clock::to_time_t(t)));
}

std::string format_utc_date(SysTime t) {
    return fmt::format("{:%Y-%m-%d}", fmt::gmtime(std::chrono::system_clock::to_time_t(t)));
}

SysTime parse_utc(std::string_view text) {
    std::tm tm{};
    std::istringstream in{std::string(text)};
    in >> std::get_time(&tm, "%Y-%m-%dT%H:%M:%S");
    if (in.fail() || in.get() != 'Z')
        throw Error(ErrorCode::InvalidArgument, "expected UTC timestamp YYYY-MM-DDTHH:MM:SSZ, got '" +
                                                    std::string(text) + "'");
    return std::chrono::system_clock::from_time_t(timegm(&tm));
}

} // namespace biokg

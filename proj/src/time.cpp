#include "meterhub/time.hpp"

#include <cstdio>
#include <ctime>

namespace meterhub {

std::string format_iso8601(UnixSeconds t) {
    std::time_t tt = static_cast<std::time_t>(t);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ",
                  tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday, tm.tm_hour,
                  tm.tm_min, tm.tm_sec);
    return buf;
}

std::optional<UnixSeconds> parse_iso8601(std::string_view s) {
    int y, mo, d, h, mi, sec;
    int consumed = 0;
    std::string str(s);
    if (std::sscanf(str.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d%n", &y, &mo, &d, &h,
                    &mi, &sec, &consumed) != 6) {
        return std::nullopt;
    }
    std::string_view rest = s.substr(static_cast<size_t>(consumed));
    if (!rest.empty() && rest[0] == '.') {
        size_t i = 1;
        while (i < rest.size() && rest[i] >= '0' && rest[i] <= '9') ++i;
        if (i == 1) return std::nullopt;
        rest = rest.substr(i);
    }
    if (rest != "Z" && rest != "+00:00") return std::nullopt;
    if (mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || sec > 60)
        return std::nullopt;

    std::tm tm{};
    tm.tm_year = y - 1900;
    tm.tm_mon = mo - 1;
    tm.tm_mday = d;
    tm.tm_hour = h;
    tm.tm_min = mi;
    tm.tm_sec = sec;
    return static_cast<UnixSeconds>(timegm(&tm));
}

std::string utc_day(UnixSeconds t) {
    std::string full = format_iso8601(t);
    return full.substr(0, 10);
}

UnixSeconds utc_day_start(UnixSeconds t) {
    // floor division so pre-epoch times still land on a day boundary
    UnixSeconds day = t / 86400;
    if (t < 0 && t % 86400 != 0) --day;
    return day * 86400;
}

}  // namespace meterhub

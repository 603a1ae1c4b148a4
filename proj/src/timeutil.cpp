#include "sentinel/timeutil.hpp"

#include <cstdio>

#include "sentinel/errors.hpp"

namespace sentinel {

std::int64_t days_from_civil(int y, int m, int d) {
    // Howard Hinnant's algorithm, days since 1970-01-01.
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& year, int& month, int& day) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    day = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    month = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    year = static_cast<int>(y + (month <= 2));
}

Timestamp parse_iso8601(const std::string& text) {
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
    int consumed = 0;
    if (std::sscanf(text.c_str(), "%d-%d-%dT%d:%d:%d%n", &y, &mo, &d, &h, &mi, &s,
                    &consumed) != 6) {
        // Allow a date-only form, midnight UTC.
        if (std::sscanf(text.c_str(), "%d-%d-%d%n", &y, &mo, &d, &consumed) == 3 &&
            static_cast<std::size_t>(consumed) == text.size()) {
            h = mi = s = 0;
            consumed = static_cast<int>(text.size());
        } else {
            throw_data("malformed timestamp '" + text + "' (expected ISO-8601)");
        }
    }
    if (mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || s > 60)
        throw_data("timestamp field out of range in '" + text + "'");
    // Reject day numbers the month does not have (e.g. Feb 29 off-leap-year):
    // a valid civil date survives the days round trip unchanged.
    int y2 = 0, mo2 = 0, d2 = 0;
    civil_from_days(days_from_civil(y, mo, d), y2, mo2, d2);
    if (y2 != y || mo2 != mo || d2 != d)
        throw_data("timestamp names a nonexistent calendar day in '" + text + "'");

    std::int64_t offset = 0;
    std::string rest = text.substr(static_cast<std::size_t>(consumed));
    if (!rest.empty()) {
        if (rest == "Z" || rest == "z") {
            offset = 0;
        } else if ((rest[0] == '+' || rest[0] == '-')) {
            int oh = 0, om = 0;
            if (std::sscanf(rest.c_str() + 1, "%d:%d", &oh, &om) < 1)
                throw_data("malformed zone offset in '" + text + "'");
            offset = oh * 3600 + om * 60;
            if (rest[0] == '-') offset = -offset;
        } else {
            throw_data("malformed zone suffix in '" + text + "'");
        }
    }
    Timestamp utc = days_from_civil(y, mo, d) * kSecondsPerDay + h * 3600 + mi * 60 + s;
    return utc - offset;
}

std::string format_iso8601(Timestamp t) {
    std::int64_t days = t / kSecondsPerDay;
    std::int64_t sod = t % kSecondsPerDay;
    if (sod < 0) {
        sod += kSecondsPerDay;
        days -= 1;
    }
    int y, mo, d;
    civil_from_days(days, y, mo, d);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02lld:%02lld:%02lldZ", y, mo, d,
                  static_cast<long long>(sod / 3600), static_cast<long long>((sod / 60) % 60),
                  static_cast<long long>(sod % 60));
    return buf;
}

} // namespace sentinel

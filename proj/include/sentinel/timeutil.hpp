#pragma once

#include <cstdint>
#include <string>

namespace sentinel {

/// Unix timestamp in whole seconds, UTC.
using Timestamp = std::int64_t;

/// Parse an ISO-8601 instant ("2015-01-01T00:00:00Z" or with a "+HH:MM"
/// offset) into a UTC unix timestamp. Throws a data error on malformed input.
Timestamp parse_iso8601(const std::string& text);

/// Format a UTC unix timestamp as "YYYY-MM-DDTHH:MM:SSZ".
std::string format_iso8601(Timestamp t);

/// Days since the unix epoch for a civil date (proleptic Gregorian).
std::int64_t days_from_civil(int year, int month, int day);

/// Inverse of days_from_civil.
void civil_from_days(std::int64_t days, int& year, int& month, int& day);

constexpr std::int64_t kSecondsPerDay = 86400;

} // namespace sentinel

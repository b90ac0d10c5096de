#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace volharness {

using Date = std::chrono::sys_days;

/// Seconds since the Unix epoch, UTC.
using EpochSeconds = std::int64_t;

constexpr EpochSeconds kSecondsPerDay = 86400;

Date date_of(EpochSeconds ts);
EpochSeconds midnight_of(Date d);

/// YYYY-MM-DD
std::string format_date(Date d);
std::optional<Date> parse_date(std::string_view text);

/// ISO-8601 UTC instant, second precision: YYYY-MM-DDTHH:MM:SSZ.
std::string format_timestamp(EpochSeconds ts);

/// Accepts integer epoch seconds, `YYYY-MM-DDTHH:MM:SS[Z|+00:00]` and the
/// space-separated variant. Offsets other than UTC are applied.
std::optional<EpochSeconds> parse_timestamp(std::string_view text);

/// Offset of America/New_York from UTC in seconds at a given UTC instant
/// (-18000 standard, -14400 daylight), US federal DST rules.
int new_york_utc_offset(EpochSeconds ts);

/// UTC instant of a New York wall-clock time on the given local date.
EpochSeconds new_york_to_utc(Date local_date, int minutes_after_midnight);

}  // namespace volharness

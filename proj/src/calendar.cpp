#include "volharness/calendar.hpp"

#include <charconv>
#include <cstdio>

namespace volharness {

namespace {

using namespace std::chrono;

bool parse_int(std::string_view s, int& out) {
    if (s.empty()) return false;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

std::optional<Date> parse_ymd(std::string_view s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
    int y = 0, m = 0, d = 0;
    if (!parse_int(s.substr(0, 4), y) || !parse_int(s.substr(5, 2), m) || !parse_int(s.substr(8, 2), d)) {
        return std::nullopt;
    }
    year_month_day ymd{year{y}, month{static_cast<unsigned>(m)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) return std::nullopt;
    return sys_days{ymd};
}

// nth (1-based) weekday of a month; n = -1 selects the last one.
sys_days nth_weekday(int y, unsigned m, weekday wd, int n) {
    if (n > 0) {
        return sys_days{year{y} / month{m} / wd[static_cast<unsigned>(n)]};
    }
    return sys_days{year{y} / month{m} / wd[last]};
}

// Local dates (New York) on which DST begins and ends.
std::pair<sys_days, sys_days> dst_dates(int y) {
    if (y >= 2007) {
        return {nth_weekday(y, 3, Sunday, 2), nth_weekday(y, 11, Sunday, 1)};
    }
    return {nth_weekday(y, 4, Sunday, 1), nth_weekday(y, 10, Sunday, -1)};
}

}  // namespace

Date date_of(EpochSeconds ts) {
    return floor<days>(sys_seconds{seconds{ts}});
}

EpochSeconds midnight_of(Date d) {
    return duration_cast<seconds>(d.time_since_epoch()).count();
}

std::string format_date(Date d) {
    year_month_day ymd{d};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

std::optional<Date> parse_date(std::string_view text) {
    return parse_ymd(text);
}

std::string format_timestamp(EpochSeconds ts) {
    const Date d = date_of(ts);
    const EpochSeconds rem = ts - midnight_of(d);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%sT%02lld:%02lld:%02lldZ", format_date(d).c_str(),
                  static_cast<long long>(rem / 3600), static_cast<long long>(rem / 60 % 60),
                  static_cast<long long>(rem % 60));
    return buf;
}

std::optional<EpochSeconds> parse_timestamp(std::string_view text) {
    if (text.empty()) return std::nullopt;
    {
        EpochSeconds v = 0;
        auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
        if (ec == std::errc{} && ptr == text.data() + text.size()) return v;
    }
    if (text.size() < 19) return std::nullopt;
    auto date = parse_ymd(text.substr(0, 10));
    if (!date || (text[10] != 'T' && text[10] != ' ') || text[13] != ':' || text[16] != ':') {
        return std::nullopt;
    }
    int hh = 0, mm = 0, ss = 0;
    if (!parse_int(text.substr(11, 2), hh) || !parse_int(text.substr(14, 2), mm) ||
        !parse_int(text.substr(17, 2), ss) || hh > 23 || mm > 59 || ss > 60) {
        return std::nullopt;
    }
    EpochSeconds ts = midnight_of(*date) + hh * 3600 + mm * 60 + ss;
    std::string_view zone = text.substr(19);
    if (zone.empty() || zone == "Z") return ts;
    if (zone.size() == 6 && (zone[0] == '+' || zone[0] == '-') && zone[3] == ':') {
        int oh = 0, om = 0;
        if (!parse_int(zone.substr(1, 2), oh) || !parse_int(zone.substr(4, 2), om)) return std::nullopt;
        const int offset = (oh * 3600 + om * 60) * (zone[0] == '+' ? 1 : -1);
        return ts - offset;
    }
    return std::nullopt;
}

int new_york_utc_offset(EpochSeconds ts) {
    const int y = static_cast<int>(year_month_day{date_of(ts)}.year());
    auto [begin, end] = dst_dates(y);
    // Transitions at 02:00 local: 07:00 UTC in spring, 06:00 UTC in autumn.
    const EpochSeconds on = midnight_of(begin) + 7 * 3600;
    const EpochSeconds off = midnight_of(end) + 6 * 3600;
    return (ts >= on && ts < off) ? -4 * 3600 : -5 * 3600;
}

EpochSeconds new_york_to_utc(Date local_date, int minutes_after_midnight) {
    const EpochSeconds local = midnight_of(local_date) + minutes_after_midnight * 60;
    const EpochSeconds guess = local + 5 * 3600;
    return local - new_york_utc_offset(guess);
}

}  // namespace volharness

#include "chaincohort/time_grid.hpp"

#include <cstdio>
#include <stdexcept>

namespace chaincohort {

int64_t sample_time(int64_t unix_s, const TimeGrid& grid) {
    if (grid.step_s <= 0) throw std::invalid_argument("grid step must be positive");
    if (unix_s < grid.epoch_s)
        throw std::invalid_argument("timestamp " + std::to_string(unix_s) +
                                    " precedes grid epoch " + std::to_string(grid.epoch_s));
    const int64_t offset = unix_s - grid.epoch_s;
    return (offset + grid.step_s - 1) / grid.step_s;  // round up, boundary maps to itself
}

namespace {

// Civil-date conversions on the proleptic Gregorian calendar.
int64_t days_from_civil(int64_t y, int64_t m, int64_t d) {
    y -= m <= 2;
    const int64_t era = (y >= 0 ? y : y - 399) / 400;
    const int64_t yoe = y - era * 400;
    const int64_t doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const int64_t doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + doe - 719468;
}

void civil_from_days(int64_t z, int64_t& y, int64_t& m, int64_t& d) {
    z += 719468;
    const int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const int64_t doe = z - era * 146097;
    const int64_t yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    y = yoe + era * 400;
    const int64_t doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const int64_t mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp + (mp < 10 ? 3 : -9);
    y += m <= 2;
}

}  // namespace

int64_t parse_iso(const std::string& text) {
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
    char tail = '\0';
    int n = std::sscanf(text.c_str(), "%d-%d-%d%c%d:%d:%d", &y, &mo, &d, &tail, &h, &mi, &s);
    if (n != 3 && n != 7)
        throw std::invalid_argument("unparseable ISO-8601 timestamp: '" + text + "'");
    if (n == 7 && tail != 'T' && tail != ' ')
        throw std::invalid_argument("unparseable ISO-8601 timestamp: '" + text + "'");
    if (n == 3 && text.size() != 10)
        throw std::invalid_argument("unparseable ISO-8601 timestamp: '" + text + "'");
    if (mo < 1 || mo > 12 || d < 1 || d > 31 || h < 0 || h > 23 || mi < 0 || mi > 59 ||
        s < 0 || s > 60)
        throw std::invalid_argument("out-of-range ISO-8601 field in '" + text + "'");
    return days_from_civil(y, mo, d) * 86400 + h * 3600 + mi * 60 + s;
}

std::string format_iso_date(int64_t unix_s) {
    int64_t days = unix_s / 86400;
    if (unix_s < 0 && unix_s % 86400 != 0) --days;
    int64_t y, m, d;
    civil_from_days(days, y, m, d);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%04lld-%02lld-%02lld",
                  static_cast<long long>(y), static_cast<long long>(m),
                  static_cast<long long>(d));
    return buf;
}

std::string format_iso_datetime(int64_t unix_s) {
    int64_t days = unix_s / 86400;
    int64_t rem = unix_s % 86400;
    if (rem < 0) {
        rem += 86400;
        --days;
    }
    int64_t y, m, d;
    civil_from_days(days, y, m, d);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%04lld-%02lld-%02lldT%02d:%02d:%02dZ",
                  static_cast<long long>(y), static_cast<long long>(m),
                  static_cast<long long>(d), static_cast<int>(rem / 3600),
                  static_cast<int>((rem / 60) % 60), static_cast<int>(rem % 60));
    return buf;
}

}  // namespace chaincohort

#include "snap/time.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>

#include "snap/errors.hpp"

namespace snap {

namespace {

// Howard Hinnant's civil-date algorithms; keeps us independent of the
// system time zone database.
std::int64_t days_from_civil(int y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, unsigned& m, unsigned& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t yr = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp < 10 ? mp + 3 : mp - 9;
    y = static_cast<int>(yr + (m <= 2));
}

bool parse_uint(std::string_view s, std::size_t pos, std::size_t len, int& out) {
    if (pos + len > s.size()) return false;
    int v = 0;
    for (std::size_t i = pos; i < pos + len; ++i) {
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
        v = v * 10 + (s[i] - '0');
    }
    out = v;
    return true;
}

} // namespace

bool try_parse_timestamp(std::string_view text, Timestamp& out) {
    // Trim surrounding whitespace.
    std::size_t b = 0, e = text.size();
    while (b < e && std::isspace(static_cast<unsigned char>(text[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(text[e - 1]))) --e;
    std::string_view s = text.substr(b, e - b);

    int year, month, day;
    if (!parse_uint(s, 0, 4, year)) return false;
    if (s.size() < 10 || s[4] != '-' || s[7] != '-') return false;
    if (!parse_uint(s, 5, 2, month) || !parse_uint(s, 8, 2, day)) return false;
    if (month < 1 || month > 12 || day < 1 || day > 31) return false;

    int hour = 0, minute = 0, second = 0;
    std::int64_t frac_ms = 0;
    std::size_t pos = 10;
    if (pos < s.size()) {
        if (s[pos] != 'T' && s[pos] != ' ') return false;
        ++pos;
        if (!parse_uint(s, pos, 2, hour)) return false;
        if (pos + 5 > s.size() || s[pos + 2] != ':') return false;
        if (!parse_uint(s, pos + 3, 2, minute)) return false;
        pos += 5;
        if (pos < s.size() && s[pos] == ':') {
            if (!parse_uint(s, pos + 1, 2, second)) return false;
            pos += 3;
        }
        if (hour > 23 || minute > 59 || second > 60) return false;
        if (pos < s.size() && s[pos] == '.') {
            ++pos;
            std::size_t digits = 0;
            double frac = 0.0, scale = 0.1;
            while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
                frac += (s[pos] - '0') * scale;
                scale *= 0.1;
                ++pos;
                ++digits;
            }
            if (digits == 0) return false;
            frac_ms = static_cast<std::int64_t>(std::lround(frac * 1000.0));
        }
    }

    std::int64_t offset_min = 0;
    if (pos < s.size()) {
        const char c = s[pos];
        if (c == 'Z' || c == 'z') {
            ++pos;
        } else if (c == '+' || c == '-') {
            int oh = 0, om = 0;
            if (!parse_uint(s, pos + 1, 2, oh)) return false;
            std::size_t opos = pos + 3;
            if (opos < s.size() && s[opos] == ':') {
                if (!parse_uint(s, opos + 1, 2, om)) return false;
                opos += 3;
            } else if (opos + 2 <= s.size() &&
                       std::isdigit(static_cast<unsigned char>(s[opos]))) {
                if (!parse_uint(s, opos, 2, om)) return false;
                opos += 2;
            }
            offset_min = (c == '+' ? 1 : -1) * (oh * 60 + om);
            pos = opos;
        } else {
            return false;
        }
    }
    if (pos != s.size()) return false;

    const std::int64_t days = days_from_civil(year, static_cast<unsigned>(month),
                                              static_cast<unsigned>(day));
    std::int64_t total =
        ((days * 24 + hour) * 60 + minute) * 60 + second;
    total -= offset_min * 60;
    out.ms = total * 1000 + frac_ms;
    return true;
}

Timestamp parse_timestamp(std::string_view text) {
    Timestamp t;
    if (!try_parse_timestamp(text, t)) {
        throw DataError("unparseable timestamp: '" + std::string(text) + "'");
    }
    return t;
}

std::string format_timestamp(Timestamp t) {
    std::int64_t ms = t.ms % 1000;
    std::int64_t sec = t.ms / 1000;
    if (ms < 0) {
        ms += 1000;
        sec -= 1;
    }
    std::int64_t days = sec / 86400;
    std::int64_t rem = sec % 86400;
    if (rem < 0) {
        rem += 86400;
        days -= 1;
    }
    int y;
    unsigned mo, d;
    civil_from_days(days, y, mo, d);
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02lld:%02lld:%02lld.%03lldZ",
                  y, mo, d, static_cast<long long>(rem / 3600),
                  static_cast<long long>((rem / 60) % 60),
                  static_cast<long long>(rem % 60), static_cast<long long>(ms));
    return buf;
}

std::string render_duration(DurationMs ms) {
    const DurationMs two_minutes = 2 * 60 * 1000;
    const DurationMs two_hours = 2 * 60 * 60 * 1000;
    const DurationMs two_days = 2 * 24 * 60 * 60 * 1000;

    long long value;
    const char* unit;
    if (ms < two_minutes) {
        value = std::llround(ms / 1000.0);
        unit = "second";
    } else if (ms < two_hours) {
        value = std::llround(ms / 60000.0);
        unit = "minute";
    } else if (ms < two_days) {
        value = std::llround(ms / 3600000.0);
        unit = "hour";
    } else {
        value = std::llround(ms / 86400000.0);
        unit = "day";
    }
    std::string out = std::to_string(value) + " " + unit;
    if (value != 1) out += "s";
    return out;
}

} // namespace snap

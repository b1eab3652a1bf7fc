#include "personagraph/timestamp.hpp"

#include "personagraph/error.hpp"

#include <cstdio>

namespace personagraph {

namespace {

using namespace std::chrono;

bool digits(std::string_view s, std::size_t pos, std::size_t n, int& out) {
    if (pos + n > s.size()) return false;
    int v = 0;
    for (std::size_t i = pos; i < pos + n; ++i) {
        const char c = s[i];
        if (c < '0' || c > '9') return false;
        v = v * 10 + (c - '0');
    }
    out = v;
    return true;
}

// Parses the fixed `YYYY-MM-DDThh:mm:ss` prefix (19 chars).
std::optional<Timestamp> parse_prefix(std::string_view s) {
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, se = 0;
    if (s.size() < 19) return std::nullopt;
    if (!digits(s, 0, 4, y) || s[4] != '-' || !digits(s, 5, 2, mo) || s[7] != '-' || !digits(s, 8, 2, d) ||
        s[10] != 'T' || !digits(s, 11, 2, h) || s[13] != ':' || !digits(s, 14, 2, mi) || s[16] != ':' ||
        !digits(s, 17, 2, se))
        return std::nullopt;
    const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok() || h > 23 || mi > 59 || se > 59) return std::nullopt;
    return Timestamp{sys_days{ymd}.time_since_epoch() + hours{h} + minutes{mi} + seconds{se}};
}

} // namespace

std::string format_timestamp(Timestamp t) {
    const auto day_point = floor<days>(t);
    const year_month_day ymd{day_point};
    const hh_mm_ss<seconds> tod{t - day_point};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02lld:%02lld:%02lldZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<long long>(tod.hours().count()), static_cast<long long>(tod.minutes().count()),
                  static_cast<long long>(tod.seconds().count()));
    return buf;
}

std::optional<Timestamp> parse_timestamp_strict(std::string_view text) {
    if (text.size() != 20 || text[19] != 'Z') return std::nullopt;
    return parse_prefix(text);
}

std::optional<Timestamp> parse_timestamp(std::string_view text) {
    auto base = parse_prefix(text);
    if (!base) return std::nullopt;
    std::size_t pos = 19;
    if (pos < text.size() && text[pos] == '.') {
        ++pos;
        const std::size_t start = pos;
        while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') ++pos;
        if (pos == start) return std::nullopt;
    }
    if (pos == text.size()) return std::nullopt;
    if (text[pos] == 'Z') return pos + 1 == text.size() ? base : std::nullopt;
    if (text[pos] != '+' && text[pos] != '-') return std::nullopt;
    const int sign = text[pos] == '+' ? 1 : -1;
    int oh = 0, om = 0;
    if (text.size() != pos + 6 || !digits(text, pos + 1, 2, oh) || text[pos + 3] != ':' ||
        !digits(text, pos + 4, 2, om) || oh > 23 || om > 59)
        return std::nullopt;
    // local = utc + offset
    return *base - sign * (hours{oh} + minutes{om});
}

Timestamp require_timestamp(std::string_view text, std::string_view what) {
    if (auto t = parse_timestamp(text)) return *t;
    throw Error(ErrorKind::Parse, std::string(what) + ": invalid timestamp '" + std::string(text) + "'");
}

Timestamp from_unix_seconds(std::int64_t s) { return Timestamp{seconds{s}}; }

std::int64_t to_unix_seconds(Timestamp t) { return t.time_since_epoch().count(); }

Timestamp subtract_years(Timestamp t, int n) {
    const auto day_point = floor<days>(t);
    const auto tod = t - day_point;
    year_month_day ymd{day_point};
    ymd -= years{n};
    if (!ymd.ok()) ymd = ymd.year() / ymd.month() / last;
    return Timestamp{sys_days{ymd}.time_since_epoch() + tod};
}

} // namespace personagraph

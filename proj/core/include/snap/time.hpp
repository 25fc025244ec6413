#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace snap {

// Milliseconds since the Unix epoch, UTC.
struct Timestamp {
    std::int64_t ms = 0;
    auto operator<=>(const Timestamp&) const = default;
};

using DurationMs = std::int64_t;

// Parses ISO-8601-style timestamps: "YYYY-MM-DD", "YYYY-MM-DD[T ]HH:MM:SS",
// optional fractional seconds, optional zone ("Z", "+02:00", "+0200", "+02").
// Offsets are folded into UTC. Throws DataError on anything else.
Timestamp parse_timestamp(std::string_view text);
bool try_parse_timestamp(std::string_view text, Timestamp& out);

// ISO 8601 UTC with millisecond precision, e.g. "2011-04-08T13:59:42.000Z".
std::string format_timestamp(Timestamp t);

// Human-readable duration for story text. Unit picked by magnitude:
// under 2 minutes -> seconds, under 2 hours -> minutes, under 2 days -> hours,
// otherwise days. Value rounded to the nearest integer, singular/plural unit.
std::string render_duration(DurationMs ms);

} // namespace snap

#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace personagraph {

/// UTC instant with second precision.
using Timestamp = std::chrono::sys_seconds;
using Duration = std::chrono::seconds;

/// Formats as `YYYY-MM-DDThh:mm:ssZ`.
std::string format_timestamp(Timestamp t);

/// Accepts exactly `YYYY-MM-DDThh:mm:ssZ` with in-range fields. Returns
/// nullopt for anything else, including non-canonical spellings of a valid
/// instant, so that parse is injective on accepted input.
std::optional<Timestamp> parse_timestamp_strict(std::string_view text);

/// Accepts the ISO-8601 shapes the forge API emits: the strict form, an
/// optional fractional second, and a `Z` or `+hh:mm`/`-hh:mm` offset.
/// The result is normalized to UTC.
std::optional<Timestamp> parse_timestamp(std::string_view text);

/// Same as parse_timestamp but throws Error(Parse) naming `what`.
Timestamp require_timestamp(std::string_view text, std::string_view what);

Timestamp from_unix_seconds(std::int64_t seconds);
std::int64_t to_unix_seconds(Timestamp t);

/// Calendar subtraction; Feb 29 maps to Feb 28 when the target year has none.
Timestamp subtract_years(Timestamp t, int years);

} // namespace personagraph

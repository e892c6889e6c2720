#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace meterhub {

/// Seconds since the UNIX epoch, UTC. All timestamps in the system are
/// second resolution.
using UnixSeconds = std::int64_t;

/// "2024-01-01T00:00:00Z"
std::string format_iso8601(UnixSeconds t);

/// Accepts "YYYY-MM-DDTHH:MM:SSZ" with an optional fractional-second part
/// (truncated) and either "Z" or "+00:00" as the UTC designator.
std::optional<UnixSeconds> parse_iso8601(std::string_view s);

/// "2024-01-01" (UTC day of t), used for store day-file names.
std::string utc_day(UnixSeconds t);

/// Start of the UTC day containing t.
UnixSeconds utc_day_start(UnixSeconds t);

}  // namespace meterhub

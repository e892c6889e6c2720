#pragma once

#include <nlohmann/json.hpp>

#include "meterhub/expected.hpp"
#include "meterhub/types.hpp"

namespace meterhub {

/// Wire encoding of a reading. Field names are part of the external
/// contract; the link subobject omits absent fields; timestamps are
/// ISO-8601 UTC with a Z suffix.
nlohmann::json reading_to_json(const MeterReading& r);
std::string reading_to_string(const MeterReading& r);

Expected<MeterReading> reading_from_json(const nlohmann::json& j);
Expected<MeterReading> reading_from_string(std::string_view text);

}  // namespace meterhub

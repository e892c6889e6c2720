#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "meterhub/expected.hpp"
#include "meterhub/types.hpp"

namespace meterhub {

/// Parse a campaign document: {"samples": [...], "reference_map": [...]}.
/// Each sample carries mp, technology, variant, direction, rssi_dbm and an
/// optional captured_at; each mapping carries indoor, technology, variant,
/// direction, outdoor (null for explicitly unmapped MPs).
Expected<RssiCampaign> campaign_from_json(const nlohmann::json& j);
Expected<RssiCampaign> load_campaign(const std::filesystem::path& file);

nlohmann::json campaign_to_json(const RssiCampaign& c);

/// Invariant check: RSSI within [-150, 0], reference targets are outdoor
/// MPs, and every non-outdoor MP with samples for a tuple is either mapped
/// or explicitly unmapped. Returns all violations.
std::vector<std::string> validate_campaign(const RssiCampaign& c);

}  // namespace meterhub

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "meterhub/bus/bus.hpp"
#include "meterhub/connect/config.hpp"
#include "meterhub/types.hpp"

namespace meterhub::connect {

std::string dead_letter_topic(Technology t);

/// {device_id, technology, reason, raw, received_at} on
/// meterhub/deadletter/<technology>.
void publish_dead_letter(bus::Bus& bus, const RawUplink& uplink,
                         const std::string& reason);

struct DispatchResult {
    std::vector<MeterReading> published;
    std::optional<std::string> dead_letter_reason;
};

/// Runs one uplink through its registered codec, normalizes, validates
/// and publishes each reading to topic_for(reading). Anything that cannot
/// become a reading (unregistered device, empty payload, decode or
/// validation failure) is published exactly once to the technology's
/// dead-letter topic with the reason and the raw payload hex; no uplink
/// is dropped silently.
DispatchResult dispatch(const RawUplink& uplink, const ConnectorConfig& config,
                        bus::Bus& bus);

}  // namespace meterhub::connect

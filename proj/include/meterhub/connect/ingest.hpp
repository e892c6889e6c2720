#pragma once

#include <nlohmann/json.hpp>

#include "meterhub/expected.hpp"
#include "meterhub/types.hpp"

namespace meterhub::connect {

/// Network-server uplink envelope (TTN style): end_device_ids.device_id,
/// uplink_message.frm_payload (base-64), uplink_message.rx_metadata[],
/// received_at. RSSI is the strongest gateway's; SNR comes from the same
/// entry; gateway_count is the number of entries.
Expected<RawUplink> ingest_lorawan(const nlohmann::json& envelope);

/// Sigfox backend callback: {device, time (unix s), data (hex, <=12
/// bytes), rssi, seqNumber}. Oversized data fails with reason
/// "payload cap" so the HTTP layer can answer 422 instead of 400.
Expected<RawUplink> ingest_sigfox(const nlohmann::json& doc);

/// Device-published document on meterhub/ingest/<tech>/<id>:
/// {imei, rssi_dbm, payload (hex), sent_at}. The same shape serves
/// NB-IoT and Wi-SUN, which both report RSSI device-side.
Expected<RawUplink> ingest_nbiot(const nlohmann::json& doc,
                                 Technology technology = Technology::nbiot);

}  // namespace meterhub::connect

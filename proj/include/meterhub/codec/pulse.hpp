#pragma once

#include <cstdint>

#include "meterhub/bytes.hpp"
#include "meterhub/codec/record.hpp"
#include "meterhub/expected.hpp"

namespace meterhub::codec {

/// Pulse-counter payload: version 0x01 followed by a uint32 big-endian
/// cumulative count. The configured weight converts counts to the
/// metered quantity (e.g. 0.01 m3 per pulse).
Expected<DecodedRecord> decode_pulse(const Bytes& payload, double pulse_weight,
                                     Unit weight_unit);

Bytes encode_pulse(std::uint32_t counter);

}  // namespace meterhub::codec

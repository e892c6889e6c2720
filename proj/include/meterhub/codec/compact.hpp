#pragma once

#include <cstdint>

#include "meterhub/bytes.hpp"
#include "meterhub/codec/record.hpp"
#include "meterhub/expected.hpp"

namespace meterhub::codec {

/// Fixed 7-byte uplink record for byte-budgeted technologies:
/// [medium][quantity][exponent int8][mantissa int32 BE],
/// value = mantissa * 10^exponent. Mantissas are canonical (no trailing
/// zero factors; zero encodes as 0e0) so encode/decode round-trips.
Expected<Bytes> encode_compact(const DecodedRecord& record);

Expected<DecodedRecord> decode_compact(const Bytes& payload);

}  // namespace meterhub::codec

#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "meterhub/bytes.hpp"
#include "meterhub/codec/record.hpp"
#include "meterhub/expected.hpp"

namespace meterhub::codec {

/// One OBIS-addressed value row from an SML message.
struct SmlValue {
    std::array<std::uint8_t, 6> obis{};
    std::uint8_t unit_code = 0;  // DLMS unit, 0x1E = Wh, 0x1B = W
    std::int8_t scaler = 0;
    std::int64_t value = 0;
};

struct SmlMessage {
    std::vector<SmlValue> values;
    bool crc_ok = true;
};

/// CRC-16/X-25: reflected 0x1021, init 0xFFFF, final xor 0xFFFF.
std::uint16_t crc16_x25(const std::uint8_t* data, std::size_t len);

/// Parses an escaped SML transport envelope and walks the TL tree for
/// value rows. With strict_crc a checksum mismatch is an error instead
/// of a flag on the result.
Expected<SmlMessage> decode_sml(const Bytes& message, bool strict_crc = false);

/// Wraps the given rows in a well-formed envelope with a valid CRC.
Bytes encode_sml(const std::vector<SmlValue>& values);

/// Maps a row to the shared record shape; false when the unit code is
/// outside the supported set (caller should skip the row).
bool sml_value_to_record(const SmlValue& value, DecodedRecord& out);

}  // namespace meterhub::codec

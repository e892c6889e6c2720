#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "meterhub/bytes.hpp"
#include "meterhub/codec/record.hpp"
#include "meterhub/expected.hpp"

namespace meterhub::codec {

/// Decoded wired/wireless M-Bus long frame (the subset in FORMATS.md).
struct MbusFrame {
    std::string ident;           // 8-digit BCD identification number
    std::uint8_t medium_code = 0;
    Medium medium = Medium::unknown;
    std::vector<DecodedRecord> records;
    std::vector<std::string> warnings;  // e.g. skipped unknown-VIF records
};

/// A data record the encoder should emit. `value` is the raw integer
/// stored on the wire; the VIF supplies quantity and scale.
struct MbusEncodeRecord {
    std::uint8_t dif = 0x04;  // 0x01/02/03/04 int LE, 0x0C BCD8
    std::uint8_t vif = 0x03;
    std::uint64_t value = 0;
};

Medium medium_from_mbus_code(std::uint8_t code);
std::uint8_t mbus_code_for_medium(Medium m);

/// Parses a long frame 68 L L 68 C A CI(72) <header> <records> CS 16.
Expected<MbusFrame> decode_mbus(const Bytes& frame);

/// Builds a checksummed long frame around the given records.
Bytes encode_mbus(std::uint32_t ident, std::uint8_t medium_code,
                  const std::vector<MbusEncodeRecord>& records);

}  // namespace meterhub::codec

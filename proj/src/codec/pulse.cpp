#include "meterhub/codec/pulse.hpp"

namespace meterhub::codec {

Expected<DecodedRecord> decode_pulse(const Bytes& payload, double pulse_weight,
                                     Unit weight_unit) {
    if (payload.size() != 5) return fail("wrong length");
    if (payload[0] != 0x01) return fail("wrong version");
    if (!(pulse_weight > 0)) return fail("pulse weight must be positive");
    const std::uint32_t counter = std::uint32_t{payload[1]} << 24 |
                                  std::uint32_t{payload[2]} << 16 |
                                  std::uint32_t{payload[3]} << 8 | payload[4];
    DecodedRecord rec;
    switch (weight_unit) {
        case Unit::count: rec.quantity = Quantity::pulse_count; break;
        case Unit::m3: rec.quantity = Quantity::volume; break;
        case Unit::wh: rec.quantity = Quantity::energy; break;
        case Unit::w: rec.quantity = Quantity::power; break;
    }
    rec.unit = weight_unit;
    rec.medium = Medium::unknown;  // the connector config supplies it
    rec.value = counter * pulse_weight;
    return rec;
}

Bytes encode_pulse(std::uint32_t counter) {
    return {0x01, static_cast<std::uint8_t>(counter >> 24),
            static_cast<std::uint8_t>(counter >> 16),
            static_cast<std::uint8_t>(counter >> 8),
            static_cast<std::uint8_t>(counter)};
}

}  // namespace meterhub::codec

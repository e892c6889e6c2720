#include "meterhub/codec/compact.hpp"

#include <cmath>
#include <cstdint>

namespace meterhub::codec {
namespace {

std::uint8_t medium_byte(Medium m) {
    switch (m) {
        case Medium::electricity: return 0x02;
        case Medium::gas: return 0x03;
        case Medium::heat: return 0x04;
        case Medium::water: return 0x07;
        case Medium::cooling: return 0x0A;
        case Medium::unknown: return 0x00;
    }
    return 0x00;
}

bool medium_from_byte(std::uint8_t b, Medium& out) {
    switch (b) {
        case 0x00: out = Medium::unknown; return true;
        case 0x02: out = Medium::electricity; return true;
        case 0x03: out = Medium::gas; return true;
        case 0x04: out = Medium::heat; return true;
        case 0x07: out = Medium::water; return true;
        case 0x0A: out = Medium::cooling; return true;
        default: return false;
    }
}

std::uint8_t quantity_byte(Quantity q) {
    switch (q) {
        case Quantity::energy: return 0x01;
        case Quantity::volume: return 0x02;
        case Quantity::power: return 0x03;
        case Quantity::pulse_count: return 0x04;
    }
    return 0x01;
}

bool quantity_from_byte(std::uint8_t b, Quantity& out) {
    switch (b) {
        case 0x01: out = Quantity::energy; return true;
        case 0x02: out = Quantity::volume; return true;
        case 0x03: out = Quantity::power; return true;
        case 0x04: out = Quantity::pulse_count; return true;
        default: return false;
    }
}

}  // namespace

Expected<Bytes> encode_compact(const DecodedRecord& record) {
    double v = record.value;
    if (!std::isfinite(v)) return fail("value not finite");

    int exp = 0;
    for (;;) {  // scale up until integral (tolerating double rounding)
        const double r = std::round(v);
        if (std::fabs(v - r) <= 1e-9 * std::fmax(1.0, std::fabs(v))) {
            v = r;
            break;
        }
        if (exp <= -12) return fail("value not representable");
        v *= 10;
        --exp;
    }
    if (std::fabs(v) > 9.0e18) return fail("mantissa out of range");
    long long m = static_cast<long long>(v);
    while (m != 0 && m % 10 == 0 && exp < 127) {
        m /= 10;
        ++exp;
    }
    if (m == 0) exp = 0;
    if (m > INT32_MAX || m < INT32_MIN) return fail("mantissa out of range");
    if (exp < -128) return fail("exponent out of range");

    const auto mant = static_cast<std::uint32_t>(static_cast<std::int32_t>(m));
    return Bytes{medium_byte(record.medium),
                 quantity_byte(record.quantity),
                 static_cast<std::uint8_t>(static_cast<std::int8_t>(exp)),
                 static_cast<std::uint8_t>(mant >> 24),
                 static_cast<std::uint8_t>(mant >> 16),
                 static_cast<std::uint8_t>(mant >> 8),
                 static_cast<std::uint8_t>(mant)};
}

Expected<DecodedRecord> decode_compact(const Bytes& payload) {
    if (payload.size() != 7) return fail("wrong length");
    DecodedRecord rec;
    if (!medium_from_byte(payload[0], rec.medium))
        return fail("unknown medium byte");
    if (!quantity_from_byte(payload[1], rec.quantity))
        return fail("unknown quantity byte");
    const auto exp = static_cast<std::int8_t>(payload[2]);
    const auto mant = static_cast<std::int32_t>(
        std::uint32_t{payload[3]} << 24 | std::uint32_t{payload[4]} << 16 |
        std::uint32_t{payload[5]} << 8 | payload[6]);
    rec.unit = unit_for(rec.quantity);
    rec.value = mant * std::pow(10.0, exp);
    return rec;
}

}  // namespace meterhub::codec

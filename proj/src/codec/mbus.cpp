#include "meterhub/codec/mbus.hpp"

#include <cmath>
#include <cstdio>

namespace meterhub::codec {
namespace {

constexpr std::uint8_t kStart = 0x68;
constexpr std::uint8_t kStop = 0x16;
constexpr std::uint8_t kCiVariableData = 0x72;
constexpr std::size_t kFixedHeaderLen = 12;

// Bytes of stored integer per DIF data-field coding; 0 = unsupported.
std::size_t value_len_for_dif(std::uint8_t coding) {
    switch (coding) {
        case 0x01: return 1;
        case 0x02: return 2;
        case 0x03: return 3;
        case 0x04: return 4;
        case 0x0C: return 4;  // 8-digit BCD
        default: return 0;
    }
}

Expected<std::uint64_t> read_bcd_le(const std::uint8_t* p, std::size_t n) {
    std::uint64_t value = 0;
    std::uint64_t place = 1;
    for (std::size_t i = 0; i < n; ++i) {
        std::uint8_t lo = p[i] & 0x0F;
        std::uint8_t hi = p[i] >> 4;
        if (lo > 9 || hi > 9) return fail("malformed BCD digit");
        value += (lo + 10ull * hi) * place;
        place *= 100;
    }
    return value;
}

std::uint64_t read_uint_le(const std::uint8_t* p, std::size_t n) {
    std::uint64_t value = 0;
    for (std::size_t i = 0; i < n; ++i) value |= std::uint64_t{p[i]} << (8 * i);
    return value;
}

void write_bcd_le(Bytes& out, std::uint64_t value, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        std::uint8_t lo = value % 10;
        value /= 10;
        std::uint8_t hi = value % 10;
        value /= 10;
        out.push_back(static_cast<std::uint8_t>(hi << 4 | lo));
    }
}

}  // namespace

Medium medium_from_mbus_code(std::uint8_t code) {
    switch (code) {
        case 0x02: return Medium::electricity;
        case 0x03: return Medium::gas;
        case 0x04: return Medium::heat;
        case 0x0A: return Medium::cooling;
        default: return Medium::unknown;
    }
}

std::uint8_t mbus_code_for_medium(Medium m) {
    switch (m) {
        case Medium::electricity: return 0x02;
        case Medium::gas: return 0x03;
        case Medium::heat: return 0x04;
        case Medium::cooling: return 0x0A;
        case Medium::water: return 0x07;  // decodes back as "unknown"
        case Medium::unknown: return 0x00;
    }
    return 0x00;
}

Expected<MbusFrame> decode_mbus(const Bytes& frame) {
    if (frame.size() < 6) return fail("truncated frame");
    if (frame[0] != kStart || frame[3] != kStart) return fail("bad start byte");
    if (frame[1] != frame[2]) return fail("length fields disagree");
    const std::size_t len = frame[1];
    const std::size_t total = 4 + len + 2;
    if (frame.size() < total) return fail("truncated frame");
    if (frame.size() > total) return fail("trailing bytes after frame");
    if (frame[total - 1] != kStop) return fail("bad stop byte");

    std::uint8_t sum = 0;
    for (std::size_t i = 4; i < 4 + len; ++i) sum += frame[i];
    if (sum != frame[total - 2]) return fail("checksum mismatch");

    if (len < 3 + kFixedHeaderLen) return fail("truncated frame");
    if (frame[6] != kCiVariableData) return fail("unsupported CI field");

    const std::uint8_t* user = frame.data() + 7;  // after C, A, CI
    const std::size_t user_len = len - 3;

    MbusFrame out;
    auto ident = read_bcd_le(user, 4);
    if (!ident.ok()) return fail(ident.error());
    char buf[16];
    std::snprintf(buf, sizeof buf, "%08llu",
                  static_cast<unsigned long long>(ident.value()));
    out.ident = buf;
    out.medium_code = user[7];
    out.medium = medium_from_mbus_code(out.medium_code);

    std::size_t i = kFixedHeaderLen;
    while (i < user_len) {
        const std::uint8_t dif = user[i];
        if (dif & 0x80) return fail("unsupported record (DIF extension)");
        const std::size_t vlen = value_len_for_dif(dif & 0x0F);
        if (vlen == 0) return fail("unsupported record (DIF coding)");
        if (i + 1 >= user_len) return fail("truncated record");
        const std::uint8_t vif = user[i + 1];
        if (vif & 0x80) return fail("unsupported record (VIF extension)");
        if (i + 2 + vlen > user_len) return fail("truncated record");
        const std::uint8_t* vp = user + i + 2;

        std::uint64_t raw = 0;
        if ((dif & 0x0F) == 0x0C) {
            auto bcd = read_bcd_le(vp, vlen);
            if (!bcd.ok()) return fail(bcd.error());
            raw = bcd.value();
        } else {
            raw = read_uint_le(vp, vlen);
        }

        DecodedRecord rec;
        rec.medium = out.medium;
        if (vif <= 0x07) {
            rec.quantity = Quantity::energy;
            rec.unit = Unit::wh;
            rec.value = static_cast<double>(raw) * std::pow(10.0, (vif & 7) - 3);
        } else if (vif >= 0x10 && vif <= 0x17) {
            rec.quantity = Quantity::volume;
            rec.unit = Unit::m3;
            rec.value = static_cast<double>(raw) * std::pow(10.0, (vif & 7) - 6);
        } else if (vif >= 0x28 && vif <= 0x2F) {
            rec.quantity = Quantity::power;
            rec.unit = Unit::w;
            rec.value = static_cast<double>(raw) * std::pow(10.0, (vif & 7) - 3);
        } else {
            std::snprintf(buf, sizeof buf, "0x%02x", vif);
            out.warnings.push_back(std::string("unknown VIF ") + buf +
                                   ", record skipped");
            i += 2 + vlen;
            continue;
        }
        out.records.push_back(rec);
        i += 2 + vlen;
    }
    return out;
}

Bytes encode_mbus(std::uint32_t ident, std::uint8_t medium_code,
                  const std::vector<MbusEncodeRecord>& records) {
    Bytes user;
    user.push_back(0x08);  // C: RSP_UD
    user.push_back(0x01);  // A
    user.push_back(kCiVariableData);
    write_bcd_le(user, ident, 4);
    user.push_back(0x2D);  // manufacturer "KAM"-style, low byte
    user.push_back(0x2C);
    user.push_back(0x01);  // version
    user.push_back(medium_code);
    user.push_back(0x00);  // access number
    user.push_back(0x00);  // status
    user.push_back(0x00);  // signature
    user.push_back(0x00);
    for (const auto& rec : records) {
        user.push_back(rec.dif);
        user.push_back(rec.vif);
        const std::size_t vlen = value_len_for_dif(rec.dif & 0x0F);
        if ((rec.dif & 0x0F) == 0x0C) {
            write_bcd_le(user, rec.value, vlen);
        } else {
            for (std::size_t i = 0; i < vlen; ++i)
                user.push_back(static_cast<std::uint8_t>(rec.value >> (8 * i)));
        }
    }

    Bytes frame;
    frame.push_back(kStart);
    frame.push_back(static_cast<std::uint8_t>(user.size()));
    frame.push_back(static_cast<std::uint8_t>(user.size()));
    frame.push_back(kStart);
    frame.insert(frame.end(), user.begin(), user.end());
    std::uint8_t sum = 0;
    for (std::uint8_t b : user) sum += b;
    frame.push_back(sum);
    frame.push_back(kStop);
    return frame;
}

}  // namespace meterhub::codec

#include "meterhub/codec/sml.hpp"

#include <cmath>

namespace meterhub::codec {
namespace {

constexpr std::uint8_t kEscape[8] = {0x1B, 0x1B, 0x1B, 0x1B,
                                     0x01, 0x01, 0x01, 0x01};
constexpr int kMaxDepth = 32;

struct TlNode {
    enum class Kind { octet, number, list } kind = Kind::octet;
    Bytes bytes;
    std::int64_t number = 0;
    std::vector<TlNode> children;
};

Expected<TlNode> parse_node(const std::uint8_t* data, std::size_t& pos,
                            std::size_t end, int depth) {
    if (depth > kMaxDepth) return fail("malformed TL (nesting too deep)");
    if (pos >= end) return fail("malformed TL (unexpected end)");
    const std::uint8_t tl = data[pos];
    const std::uint8_t type = tl >> 4;
    const std::size_t len = tl & 0x0F;
    TlNode node;
    switch (type) {
        case 0x0: {  // octet string, len counts the TL byte
            if (len == 0) return fail("malformed TL (zero length)");
            if (pos + len > end) return fail("malformed TL length");
            node.kind = TlNode::Kind::octet;
            node.bytes.assign(data + pos + 1, data + pos + len);
            pos += len;
            return node;
        }
        case 0x5:
        case 0x6: {  // signed / unsigned integer, big-endian
            if (len < 2 || len > 9) return fail("malformed TL (integer size)");
            if (pos + len > end) return fail("malformed TL length");
            const std::size_t n = len - 1;
            std::uint64_t raw = 0;
            for (std::size_t i = 0; i < n; ++i)
                raw = raw << 8 | data[pos + 1 + i];
            if (type == 0x5 && n < 8 && (raw & (1ull << (8 * n - 1))))
                raw |= ~0ull << (8 * n);  // sign-extend
            node.kind = TlNode::Kind::number;
            node.number = static_cast<std::int64_t>(raw);
            pos += len;
            return node;
        }
        case 0x7: {  // list, len counts elements
            pos += 1;
            node.kind = TlNode::Kind::list;
            node.children.reserve(len);
            for (std::size_t i = 0; i < len; ++i) {
                auto child = parse_node(data, pos, end, depth + 1);
                if (!child.ok()) return fail(child.error());
                node.children.push_back(child.take());
            }
            return node;
        }
        default:
            return fail("unsupported TL type");
    }
}

// A value row is [obis:octet(6), unit:number, scaler:number, value:number].
void collect_rows(const TlNode& node, std::vector<SmlValue>& out) {
    if (node.kind != TlNode::Kind::list) return;
    const auto& c = node.children;
    if (c.size() >= 4 && c[0].kind == TlNode::Kind::octet &&
        c[0].bytes.size() == 6 && c[1].kind == TlNode::Kind::number &&
        c[2].kind == TlNode::Kind::number &&
        c[3].kind == TlNode::Kind::number) {
        SmlValue v;
        for (std::size_t i = 0; i < 6; ++i) v.obis[i] = c[0].bytes[i];
        v.unit_code = static_cast<std::uint8_t>(c[1].number);
        v.scaler = static_cast<std::int8_t>(c[2].number);
        v.value = c[3].number;
        out.push_back(v);
        return;
    }
    for (const auto& child : c) collect_rows(child, out);
}

void append_number(Bytes& out, std::uint8_t type_nibble, std::int64_t v) {
    Bytes be;
    for (int i = 7; i >= 0; --i)
        be.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    while (be.size() > 1) {
        if (be[0] == 0x00 && !(be[1] & 0x80))
            be.erase(be.begin());
        else if (be[0] == 0xFF && (be[1] & 0x80))
            be.erase(be.begin());
        else
            break;
    }
    out.push_back(static_cast<std::uint8_t>(type_nibble << 4 | (be.size() + 1)));
    out.insert(out.end(), be.begin(), be.end());
}

}  // namespace

std::uint16_t crc16_x25(const std::uint8_t* data, std::size_t len) {
    std::uint16_t crc = 0xFFFF;
    for (std::size_t i = 0; i < len; ++i) {
        crc ^= data[i];
        for (int bit = 0; bit < 8; ++bit)
            crc = (crc & 1) ? (crc >> 1) ^ 0x8408 : crc >> 1;
    }
    return static_cast<std::uint16_t>(~crc);
}

Expected<SmlMessage> decode_sml(const Bytes& message, bool strict_crc) {
    if (message.size() < 16) return fail("missing envelope");
    for (std::size_t i = 0; i < 8; ++i)
        if (message[i] != kEscape[i]) return fail("missing envelope");
    const std::size_t n = message.size();
    for (std::size_t i = 0; i < 4; ++i)
        if (message[n - 8 + i] != 0x1B) return fail("missing envelope");
    if (message[n - 4] != 0x1A) return fail("missing envelope");
    const std::size_t fill = message[n - 3];
    if (fill > 3 || 8 + fill > n - 8) return fail("malformed envelope");

    const std::uint16_t stored =
        static_cast<std::uint16_t>(message[n - 2] << 8 | message[n - 1]);
    SmlMessage out;
    out.crc_ok = crc16_x25(message.data(), n - 2) == stored;
    if (!out.crc_ok && strict_crc) return fail("CRC mismatch");

    const std::size_t body_end = n - 8 - fill;
    std::size_t pos = 8;
    while (pos < body_end) {
        auto node = parse_node(message.data(), pos, body_end, 0);
        if (!node.ok()) return fail(node.error());
        collect_rows(node.value(), out.values);
    }
    return out;
}

Bytes encode_sml(const std::vector<SmlValue>& values) {
    Bytes msg(kEscape, kEscape + 8);
    for (const auto& v : values) {
        msg.push_back(0x74);  // list of 4
        msg.push_back(0x07);  // octet string, 6 payload bytes
        msg.insert(msg.end(), v.obis.begin(), v.obis.end());
        append_number(msg, 0x6, v.unit_code);
        append_number(msg, 0x5, v.scaler);
        append_number(msg, 0x5, v.value);
    }
    const std::size_t fill = (4 - msg.size() % 4) % 4;
    msg.insert(msg.end(), fill, 0x00);
    msg.insert(msg.end(), {0x1B, 0x1B, 0x1B, 0x1B, 0x1A});
    msg.push_back(static_cast<std::uint8_t>(fill));
    const std::uint16_t crc = crc16_x25(msg.data(), msg.size());
    msg.push_back(static_cast<std::uint8_t>(crc >> 8));
    msg.push_back(static_cast<std::uint8_t>(crc & 0xFF));
    return msg;
}

bool sml_value_to_record(const SmlValue& v, DecodedRecord& out) {
    switch (v.unit_code) {
        case 0x1E:
            out.quantity = Quantity::energy;
            out.unit = Unit::wh;
            break;
        case 0x1B:
            out.quantity = Quantity::power;
            out.unit = Unit::w;
            break;
        default:
            return false;
    }
    switch (v.obis[0]) {  // OBIS media group A
        case 1: out.medium = Medium::electricity; break;
        case 5: out.medium = Medium::cooling; break;
        case 6: out.medium = Medium::heat; break;
        case 7: out.medium = Medium::gas; break;
        default: out.medium = Medium::unknown; break;
    }
    out.value = static_cast<double>(v.value) * std::pow(10.0, v.scaler);
    return true;
}

}  // namespace meterhub::codec

#include "meterhub/bus/mqtt.hpp"

namespace meterhub::bus::mqtt {
namespace {

void append_u16(Bytes& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v & 0xFF));
}

void append_string(Bytes& out, const std::string& s) {
    append_u16(out, static_cast<std::uint16_t>(s.size()));
    out.insert(out.end(), s.begin(), s.end());
}

struct Cursor {
    const Bytes& buf;
    std::size_t pos = 0;

    bool read_u16(std::uint16_t& v) {
        if (pos + 2 > buf.size()) return false;
        v = static_cast<std::uint16_t>(buf[pos] << 8 | buf[pos + 1]);
        pos += 2;
        return true;
    }
    bool read_string(std::string& s) {
        std::uint16_t n = 0;
        if (!read_u16(n) || pos + n > buf.size()) return false;
        s.assign(buf.begin() + pos, buf.begin() + pos + n);
        pos += n;
        return true;
    }
};

}  // namespace

Bytes encode(std::uint8_t type_flags, const Bytes& remaining) {
    Bytes out;
    out.push_back(type_flags);
    std::size_t n = remaining.size();
    do {
        std::uint8_t byte = n % 128;
        n /= 128;
        if (n) byte |= 0x80;
        out.push_back(byte);
    } while (n);
    out.insert(out.end(), remaining.begin(), remaining.end());
    return out;
}

Expected<std::size_t> decode(const std::uint8_t* data, std::size_t len,
                             Packet& out) {
    if (len < 2) return std::size_t{0};
    std::size_t remaining = 0;
    std::size_t multiplier = 1;
    std::size_t i = 1;
    for (;;) {
        if (i >= len) return std::size_t{0};
        if (i > 4) return fail("malformed remaining length");
        const std::uint8_t byte = data[i];
        remaining += (byte & 0x7F) * multiplier;
        multiplier *= 128;
        ++i;
        if (!(byte & 0x80)) break;
    }
    if (len < i + remaining) return std::size_t{0};
    out.type_flags = data[0];
    out.remaining.assign(data + i, data + i + remaining);
    return i + remaining;
}

Bytes make_connect(const std::string& client_id, std::uint16_t keepalive_s) {
    Bytes rem;
    append_string(rem, "MQTT");
    rem.push_back(0x04);  // protocol level 3.1.1
    rem.push_back(0x02);  // clean session
    append_u16(rem, keepalive_s);
    append_string(rem, client_id);
    return encode(kConnect << 4, rem);
}

Bytes make_connack(bool session_present, std::uint8_t return_code) {
    return encode(kConnack << 4,
                  {static_cast<std::uint8_t>(session_present ? 1 : 0),
                   return_code});
}

Bytes make_publish(const std::string& topic, const Bytes& payload,
                   std::uint8_t qos, std::uint16_t packet_id, bool dup) {
    Bytes rem;
    append_string(rem, topic);
    if (qos > 0) append_u16(rem, packet_id);
    rem.insert(rem.end(), payload.begin(), payload.end());
    const std::uint8_t flags = static_cast<std::uint8_t>(
        kPublish << 4 | (dup ? 0x08 : 0) | (qos & 3) << 1);
    return encode(flags, rem);
}

Bytes make_puback(std::uint16_t packet_id) {
    Bytes rem;
    append_u16(rem, packet_id);
    return encode(kPuback << 4, rem);
}

Bytes make_subscribe(std::uint16_t packet_id, const std::string& filter,
                     std::uint8_t qos) {
    Bytes rem;
    append_u16(rem, packet_id);
    append_string(rem, filter);
    rem.push_back(qos);
    return encode(kSubscribe << 4 | 0x02, rem);
}

Bytes make_suback(std::uint16_t packet_id, std::uint8_t granted_qos) {
    Bytes rem;
    append_u16(rem, packet_id);
    rem.push_back(granted_qos);
    return encode(kSuback << 4, rem);
}

Bytes make_pingreq() { return encode(kPingreq << 4, {}); }
Bytes make_pingresp() { return encode(kPingresp << 4, {}); }
Bytes make_disconnect() { return encode(kDisconnect << 4, {}); }

Expected<PublishView> parse_publish(const Packet& p) {
    if (p.type() != kPublish) return fail("not a PUBLISH packet");
    PublishView v;
    v.qos = (p.type_flags >> 1) & 3;
    v.dup = (p.type_flags & 0x08) != 0;
    if (v.qos > 1) return fail("QoS 2 not supported");
    Cursor c{p.remaining};
    if (!c.read_string(v.topic)) return fail("malformed PUBLISH");
    if (v.qos > 0 && !c.read_u16(v.packet_id)) return fail("malformed PUBLISH");
    v.payload.assign(p.remaining.begin() + c.pos, p.remaining.end());
    return v;
}

Expected<ConnectView> parse_connect(const Packet& p) {
    if (p.type() != kConnect) return fail("not a CONNECT packet");
    Cursor c{p.remaining};
    std::string proto;
    if (!c.read_string(proto) || proto != "MQTT")
        return fail("malformed CONNECT");
    if (c.pos + 2 > p.remaining.size()) return fail("malformed CONNECT");
    c.pos += 2;  // level + connect flags
    ConnectView v;
    if (!c.read_u16(v.keepalive_s)) return fail("malformed CONNECT");
    if (!c.read_string(v.client_id)) return fail("malformed CONNECT");
    return v;
}

Expected<SubscribeView> parse_subscribe(const Packet& p) {
    if (p.type() != kSubscribe) return fail("not a SUBSCRIBE packet");
    Cursor c{p.remaining};
    SubscribeView v;
    if (!c.read_u16(v.packet_id)) return fail("malformed SUBSCRIBE");
    while (c.pos < p.remaining.size()) {
        std::string filter;
        if (!c.read_string(filter)) return fail("malformed SUBSCRIBE");
        if (c.pos >= p.remaining.size()) return fail("malformed SUBSCRIBE");
        v.filters.emplace_back(filter, p.remaining[c.pos]);
        ++c.pos;
    }
    if (v.filters.empty()) return fail("malformed SUBSCRIBE");
    return v;
}

Expected<std::uint16_t> parse_packet_id(const Packet& p) {
    Cursor c{p.remaining};
    std::uint16_t id = 0;
    if (!c.read_u16(id)) return fail("missing packet id");
    return id;
}

Expected<std::uint8_t> parse_connack(const Packet& p) {
    if (p.type() != kConnack) return fail("not a CONNACK packet");
    if (p.remaining.size() < 2) return fail("malformed CONNACK");
    return p.remaining[1];
}

}  // namespace meterhub::bus::mqtt

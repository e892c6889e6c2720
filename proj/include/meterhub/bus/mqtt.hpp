#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "meterhub/bytes.hpp"
#include "meterhub/expected.hpp"

// Minimal MQTT 3.1.1 packet codec — just the packets the bridge (and the
// test broker) exchange: CONNECT/CONNACK, PUBLISH QoS 0/1, PUBACK,
// SUBSCRIBE/SUBACK, PINGREQ/PINGRESP, DISCONNECT.
namespace meterhub::bus::mqtt {

enum PacketType : std::uint8_t {
    kConnect = 1,
    kConnack = 2,
    kPublish = 3,
    kPuback = 4,
    kSubscribe = 8,
    kSuback = 9,
    kPingreq = 12,
    kPingresp = 13,
    kDisconnect = 14,
};

struct Packet {
    std::uint8_t type_flags = 0;
    Bytes remaining;

    std::uint8_t type() const { return type_flags >> 4; }
};

/// Frames `remaining` behind the fixed header with varint length.
Bytes encode(std::uint8_t type_flags, const Bytes& remaining);

/// Tries to cut one packet off the front of `data`. Returns bytes
/// consumed, 0 when more input is needed, error on malformed framing.
Expected<std::size_t> decode(const std::uint8_t* data, std::size_t len,
                             Packet& out);

Bytes make_connect(const std::string& client_id, std::uint16_t keepalive_s);
Bytes make_connack(bool session_present, std::uint8_t return_code);
Bytes make_publish(const std::string& topic, const Bytes& payload,
                   std::uint8_t qos, std::uint16_t packet_id, bool dup);
Bytes make_puback(std::uint16_t packet_id);
Bytes make_subscribe(std::uint16_t packet_id, const std::string& filter,
                     std::uint8_t qos);
Bytes make_suback(std::uint16_t packet_id, std::uint8_t granted_qos);
Bytes make_pingreq();
Bytes make_pingresp();
Bytes make_disconnect();

struct PublishView {
    std::string topic;
    std::uint8_t qos = 0;
    bool dup = false;
    std::uint16_t packet_id = 0;  // only present for qos > 0
    Bytes payload;
};

struct ConnectView {
    std::string client_id;
    std::uint16_t keepalive_s = 0;
};

struct SubscribeView {
    std::uint16_t packet_id = 0;
    std::vector<std::pair<std::string, std::uint8_t>> filters;
};

Expected<PublishView> parse_publish(const Packet& p);
Expected<ConnectView> parse_connect(const Packet& p);
Expected<SubscribeView> parse_subscribe(const Packet& p);
Expected<std::uint16_t> parse_packet_id(const Packet& p);  // PUBACK/SUBACK
Expected<std::uint8_t> parse_connack(const Packet& p);     // return code

}  // namespace meterhub::bus::mqtt

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "meterhub/expected.hpp"

namespace meterhub {

using Bytes = std::vector<std::uint8_t>;

/// Lowercase hex, no separators.
std::string to_hex(const Bytes& b);

/// Accepts upper or lower case; rejects odd length and non-hex characters.
Expected<Bytes> from_hex(std::string_view s);

/// Standard base-64 (RFC 4648, with padding). Used by the network-server
/// uplink envelope.
std::string to_base64(const Bytes& b);
Expected<Bytes> from_base64(std::string_view s);

}  // namespace meterhub

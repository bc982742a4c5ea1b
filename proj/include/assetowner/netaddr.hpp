#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace assetowner {

using Ipv4 = std::array<std::uint8_t, 4>;
using MacAddress = std::array<std::uint8_t, 6>;

// Strict dotted quad: four decimal octets of 1-3 digits, each in 0..255.
std::optional<Ipv4> parse_ipv4(std::string_view text);
std::string format_ipv4(const Ipv4& ip);

// Accepts colon (00:50:56:ab:cd:ef), hyphen (00-50-56-AB-CD-EF),
// dot-quad (0050.56ab.cdef) and bare hex (005056abcdef) notations.
std::optional<MacAddress> parse_mac(std::string_view text);
// Uppercase colon form.
std::string format_mac(const MacAddress& mac);

}  // namespace assetowner

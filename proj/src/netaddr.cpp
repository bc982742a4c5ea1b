#include "assetowner/netaddr.hpp"

#include <cstdio>

namespace assetowner {

namespace {

int hex_value(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

// Reads 2*n hex digits from text into out; false on any non-hex digit.
bool read_hex_bytes(std::string_view text, std::uint8_t* out) {
    if (text.size() % 2 != 0) return false;
    for (std::size_t i = 0; i < text.size(); i += 2) {
        const int hi = hex_value(text[i]);
        const int lo = hex_value(text[i + 1]);
        if (hi < 0 || lo < 0) return false;
        out[i / 2] = static_cast<std::uint8_t>(hi * 16 + lo);
    }
    return true;
}

}  // namespace

std::optional<Ipv4> parse_ipv4(std::string_view text) {
    Ipv4 ip{};
    std::size_t pos = 0;
    for (int octet = 0; octet < 4; ++octet) {
        if (octet > 0) {
            if (pos >= text.size() || text[pos] != '.') return std::nullopt;
            ++pos;
        }
        unsigned value = 0;
        std::size_t digits = 0;
        while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
            value = value * 10 + static_cast<unsigned>(text[pos] - '0');
            ++pos;
            if (++digits > 3) return std::nullopt;
        }
        if (digits == 0 || value > 255) return std::nullopt;
        ip[octet] = static_cast<std::uint8_t>(value);
    }
    if (pos != text.size()) return std::nullopt;
    return ip;
}

std::string format_ipv4(const Ipv4& ip) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%u.%u.%u.%u", ip[0], ip[1], ip[2], ip[3]);
    return buf;
}

std::optional<MacAddress> parse_mac(std::string_view text) {
    MacAddress mac{};
    if (text.size() == 12) {
        if (!read_hex_bytes(text, mac.data())) return std::nullopt;
        return mac;
    }
    if (text.size() == 17) {
        const char sep = text[2];
        if (sep != ':' && sep != '-') return std::nullopt;
        for (std::size_t g = 0; g < 6; ++g) {
            if (g > 0 && text[g * 3 - 1] != sep) return std::nullopt;
            if (!read_hex_bytes(text.substr(g * 3, 2), &mac[g])) return std::nullopt;
        }
        return mac;
    }
    if (text.size() == 14) {
        if (text[4] != '.' || text[9] != '.') return std::nullopt;
        for (std::size_t g = 0; g < 3; ++g) {
            if (!read_hex_bytes(text.substr(g * 5, 4), &mac[g * 2])) return std::nullopt;
        }
        return mac;
    }
    return std::nullopt;
}

std::string format_mac(const MacAddress& mac) {
    char buf[18];
    std::snprintf(buf, sizeof buf, "%02X:%02X:%02X:%02X:%02X:%02X", mac[0], mac[1], mac[2], mac[3], mac[4],
                  mac[5]);
    return buf;
}

}  // namespace assetowner

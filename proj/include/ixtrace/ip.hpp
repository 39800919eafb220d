#pragma once

// IPv4 address and CIDR prefix primitives. Addresses are host-order uint32_t
// throughout; prefixes keep host bits zero.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace ixtrace {

using IpV4 = std::uint32_t;
using Asn = std::uint32_t;

inline std::optional<IpV4> parse_ipv4(std::string_view s) {
    IpV4 addr = 0;
    int octets = 0;
    std::size_t i = 0;
    while (octets < 4) {
        if (i >= s.size() || s[i] < '0' || s[i] > '9') return std::nullopt;
        std::uint32_t v = 0;
        std::size_t digits = 0;
        while (i < s.size() && s[i] >= '0' && s[i] <= '9') {
            v = v * 10 + static_cast<std::uint32_t>(s[i] - '0');
            ++digits;
            ++i;
            if (digits > 3 || v > 255) return std::nullopt;
        }
        addr = (addr << 8) | v;
        ++octets;
        if (octets < 4) {
            if (i >= s.size() || s[i] != '.') return std::nullopt;
            ++i;
        }
    }
    if (i != s.size()) return std::nullopt;
    return addr;
}

inline std::string format_ipv4(IpV4 a) {
    std::string out;
    out.reserve(15);
    for (int shift = 24; shift >= 0; shift -= 8) {
        out += std::to_string((a >> shift) & 0xff);
        if (shift) out += '.';
    }
    return out;
}

inline IpV4 prefix_mask(int len) {
    return len == 0 ? 0 : ~IpV4{0} << (32 - len);
}

struct Prefix {
    IpV4 net = 0;  // host bits zero
    int len = 0;   // 0..32

    bool contains(IpV4 a) const { return (a & prefix_mask(len)) == net; }
    friend auto operator<=>(const Prefix&, const Prefix&) = default;
};

// Strict CIDR: "a.b.c.d/len" with host bits zero.
inline std::optional<Prefix> parse_prefix(std::string_view s) {
    auto slash = s.find('/');
    if (slash == std::string_view::npos) return std::nullopt;
    auto addr = parse_ipv4(s.substr(0, slash));
    if (!addr) return std::nullopt;
    auto lenpart = s.substr(slash + 1);
    if (lenpart.empty() || lenpart.size() > 2) return std::nullopt;
    int len = 0;
    for (char c : lenpart) {
        if (c < '0' || c > '9') return std::nullopt;
        len = len * 10 + (c - '0');
    }
    if (len > 32) return std::nullopt;
    if ((*addr & ~prefix_mask(len)) != 0) return std::nullopt;
    return Prefix{*addr, len};
}

inline std::string format_prefix(const Prefix& p) {
    return format_ipv4(p.net) + "/" + std::to_string(p.len);
}

// IANA IPv4 special-purpose registry blocks. Addresses inside these blocks
// must never be treated as routable hops or registry data.
inline const std::array<Prefix, 16>& reserved_blocks() {
    static const std::array<Prefix, 16> blocks = {{
        {0x00000000, 8},   // 0.0.0.0/8
        {0x0A000000, 8},   // 10.0.0.0/8
        {0x64400000, 10},  // 100.64.0.0/10
        {0x7F000000, 8},   // 127.0.0.0/8
        {0xA9FE0000, 16},  // 169.254.0.0/16
        {0xAC100000, 12},  // 172.16.0.0/12
        {0xC0000000, 24},  // 192.0.0.0/24
        {0xC0000200, 24},  // 192.0.2.0/24
        {0xC0586300, 24},  // 192.88.99.0/24
        {0xC0A80000, 16},  // 192.168.0.0/16
        {0xC6120000, 15},  // 198.18.0.0/15
        {0xC6336400, 24},  // 198.51.100.0/24
        {0xCB007100, 24},  // 203.0.113.0/24
        {0xE0000000, 4},   // 224.0.0.0/4
        {0xF0000000, 4},   // 240.0.0.0/4
        {0xFFFFFFFF, 32},  // 255.255.255.255/32
    }};
    return blocks;
}

inline bool is_reserved(IpV4 a) {
    for (const auto& b : reserved_blocks())
        if (b.contains(a)) return true;
    return false;
}

}  // namespace ixtrace

#include <gtest/gtest.h>

#include "assetowner/netaddr.hpp"

using namespace assetowner;

TEST(ParseIpv4, AcceptsDottedQuads) {
    EXPECT_EQ(parse_ipv4("10.20.30.40"), (Ipv4{10, 20, 30, 40}));
    EXPECT_EQ(parse_ipv4("0.0.0.0"), (Ipv4{0, 0, 0, 0}));
    EXPECT_EQ(parse_ipv4("255.255.255.255"), (Ipv4{255, 255, 255, 255}));
    EXPECT_EQ(parse_ipv4("010.1.1.1"), (Ipv4{10, 1, 1, 1}));
}

TEST(ParseIpv4, RejectsMalformed) {
    for (const char* s : {"999.1.1.1", "256.0.0.0", "1.2.3", "1.2.3.4.5", "1..2.3", "", "a.b.c.d", "1.2.3.4 ",
                          "1.2.3.-4", "1234.1.1.1"})
        EXPECT_FALSE(parse_ipv4(s)) << s;
}

TEST(ParseIpv4, FormatRoundTrip) {
    for (unsigned a : {0u, 9u, 10u, 99u, 100u, 255u}) {
        const Ipv4 ip{static_cast<std::uint8_t>(a), 1, 200, 7};
        EXPECT_EQ(parse_ipv4(format_ipv4(ip)), ip);
    }
}

TEST(ParseMac, AllNotationsAgree) {
    const MacAddress want{0x00, 0x50, 0x56, 0xAB, 0xCD, 0xEF};
    for (const char* s : {"00:50:56:ab:cd:ef", "00-50-56-AB-CD-EF", "0050.56ab.cdef", "005056abcdef"})
        EXPECT_EQ(parse_mac(s), want) << s;
    EXPECT_EQ(format_mac(want), "00:50:56:AB:CD:EF");
}

TEST(ParseMac, RejectsWrongLength) {
    for (const char* s : {"005056", "12:34", "", "00:50:56:ab:cd", "00:50:56:ab:cd:ef:01", "zz:50:56:ab:cd:ef",
                          "00:50-56:ab:cd:ef"})
        EXPECT_FALSE(parse_mac(s)) << s;
}

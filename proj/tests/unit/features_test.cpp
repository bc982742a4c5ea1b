#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "assetowner/features.hpp"
#include "assetowner/netaddr.hpp"
#include "support.hpp"

using namespace assetowner;

TEST(TruncateFqdn, Examples) {
    EXPECT_EQ(truncate_fqdn("ab1.cd2.corp.company.com"), "corp.company.com");
    EXPECT_EQ(truncate_fqdn("company.com"), "company.com");
    EXPECT_EQ(truncate_fqdn("corp.company.com"), "corp.company.com");
    EXPECT_EQ(truncate_fqdn("Host.Corp.Company.COM"), "corp.company.com");
    EXPECT_EQ(truncate_fqdn("localhost"), "localhost");
}

TEST(DeriveCidrs, Examples) {
    auto c = derive_cidrs("10.20.30.40");
    EXPECT_EQ(c.cidr8, "10.0.0.0/8");
    EXPECT_EQ(c.cidr16, "10.20.0.0/16");
    EXPECT_EQ(c.cidr24, "10.20.30.0/24");
    c = derive_cidrs("0.0.0.0");
    EXPECT_EQ(c.cidr8, "0.0.0.0/8");
    EXPECT_EQ(c.cidr16, "0.0.0.0/16");
    EXPECT_EQ(c.cidr24, "0.0.0.0/24");
    c = derive_cidrs("255.255.255.255");
    EXPECT_EQ(c.cidr8, "255.0.0.0/8");
    EXPECT_EQ(c.cidr16, "255.255.0.0/16");
    EXPECT_EQ(c.cidr24, "255.255.255.0/24");
    EXPECT_THROW(derive_cidrs("1.2.3"), FeatureError);
}

// Property: /24 inside /16 inside /8, checked on the network octets.
TEST(DeriveCidrs, Nesting) {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 2000; ++i) {
        const Ipv4 ip{static_cast<std::uint8_t>(rng()), static_cast<std::uint8_t>(rng()),
                      static_cast<std::uint8_t>(rng()), static_cast<std::uint8_t>(rng())};
        const auto c = derive_cidrs(format_ipv4(ip));
        const auto net = [](const std::string& s) { return *parse_ipv4(s.substr(0, s.find('/'))); };
        const Ipv4 n8 = net(c.cidr8), n16 = net(c.cidr16), n24 = net(c.cidr24);
        EXPECT_EQ(n8, (Ipv4{ip[0], 0, 0, 0}));
        EXPECT_EQ(n16, (Ipv4{ip[0], ip[1], 0, 0}));
        EXPECT_EQ(n24, (Ipv4{ip[0], ip[1], ip[2], 0}));
        EXPECT_EQ(n16[0], n8[0]);
        EXPECT_EQ(n24[1], n16[1]);
    }
}

TEST(ExtractOui, Examples) {
    EXPECT_EQ(extract_oui("00:50:56:ab:cd:ef"), "00:50:56");
    EXPECT_EQ(extract_oui("00-50-56-AB-CD-EF"), "00:50:56");
    EXPECT_EQ(extract_oui("0050.56ab.cdef"), "00:50:56");
    EXPECT_THROW(extract_oui("005056"), FeatureError);
}

TEST(LookupVendor, BundledSnapshot) {
    const auto& dir = testing_support::manuf();
    EXPECT_EQ(lookup_vendor("00:00:0C", dir), "Cisco");
    EXPECT_EQ(lookup_vendor("FF:FF:FF", dir), "unknown");
    EXPECT_EQ(lookup_vendor("00:00:0C", OuiDirectory{}), "unknown");
    EXPECT_GE(dir.size(), 10000u);
}

TEST(OuiDirectory, ParsesOnlyThreeByteEntries) {
    std::istringstream in(
        "# comment\n"
        "00:00:0C\tCisco\tCisco Systems, Inc\n"
        "00:1B:C5:00:00:00/36\tConverg\tConverging Systems\n"
        "00:55:DA:00:00:00/28\tShinko\tShinko Technos\n"
        "00-50-56\tVMware\n"
        "\n"
        "01:80:C2:00:00:00\tSpanning-tree\n");
    const auto dir = OuiDirectory::parse(in);
    EXPECT_EQ(dir.size(), 2u);
    EXPECT_EQ(lookup_vendor("00:50:56", dir), "VMware");
    EXPECT_EQ(lookup_vendor("00:1B:C5", dir), "unknown");
}

TEST(DeriveOsParent, Examples) {
    EXPECT_EQ(derive_os_parent("Linux kernel 2.4"), "linux");
    EXPECT_EQ(derive_os_parent("Linux kernel 3.2"), "linux");
    EXPECT_EQ(derive_os_parent("Windows Server 2019"), "windows");
    EXPECT_EQ(derive_os_parent("BeOS R5"), "other");
    EXPECT_EQ(derive_os_parent(""), "other");
}

TEST(DeriveOsParent, IdempotentOnParents) {
    for (const char* p : {"linux", "windows", "esx", "bsd", "macos", "network-os", "other"})
        EXPECT_EQ(derive_os_parent(p), p);
}

namespace {

AssetRecord sample_record() {
    AssetRecord r;
    r.asset_name = "web01";
    r.netbios = "WEB01";
    r.os = "Linux kernel 3.2";
    r.class_name = "server";
    r.fqdn = "ab1.cd2.corp.company.com";
    r.ip = "10.20.30.40";
    r.mac = "00:50:56:AB:CD:EF";
    r.agent_installed = AgentInstalled::yes;
    r.location = "AMER";
    r.system = "erp";
    r.owner = "netops";
    return r;
}

}  // namespace

TEST(Engineer, WorkedExample) {
    const auto row = engineer(sample_record(), testing_support::manuf());
    EXPECT_EQ(row[Feature::fqdn_top], "corp.company.com");
    EXPECT_EQ(row[Feature::cidr8], "10.0.0.0/8");
    EXPECT_EQ(row[Feature::cidr16], "10.20.0.0/16");
    EXPECT_EQ(row[Feature::cidr24], "10.20.30.0/24");
    EXPECT_EQ(row[Feature::oui], "00:50:56");
    EXPECT_EQ(row[Feature::os_parent], "linux");
    EXPECT_EQ(row[Feature::class_name], "server");
    EXPECT_EQ(row[Feature::agent_installed], "yes");
    EXPECT_EQ(row[Feature::location], "AMER");
    EXPECT_EQ(row[Feature::system], "erp");
    EXPECT_EQ(row.owner, "netops");
    EXPECT_EQ(row.oui_vendor, "VMware");
}

TEST(Engineer, IgnoresAssetNameAndNetbios) {
    const auto base = engineer(sample_record(), testing_support::manuf());
    std::mt19937_64 rng(5);
    for (int i = 0; i < 50; ++i) {
        auto r = sample_record();
        r.asset_name = "n" + std::to_string(rng());
        r.netbios = std::to_string(rng() % 1000);
        EXPECT_EQ(engineer(r, testing_support::manuf()), base);
    }
}

TEST(Engineer, BadMacPropagates) {
    auto r = sample_record();
    r.mac = "12:34";
    EXPECT_THROW(engineer(r, testing_support::manuf()), FeatureError);
}

TEST(FeatureIndex, NamesRoundTrip) {
    for (std::size_t f = 0; f < kFeatureCount; ++f) EXPECT_EQ(feature_index(kFeatureNames[f]), f);
    EXPECT_THROW(feature_index("asset_name"), FeatureError);
}

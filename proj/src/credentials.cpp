#include "miraisim/credentials.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace miraisim {

Result<CredentialList, CredentialParseError> parse_credential_list(const std::string& text) {
    CredentialList list;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty() || line.front() == '#') {
            continue;
        }
        auto sep = line.find(' ');
        if (sep == std::string::npos) {
            return CredentialParseError{lineno, "expected 'username password'"};
        }
        std::string user = line.substr(0, sep);
        std::string pass = line.substr(sep + 1);
        if (user.empty() || pass.empty()) {
            return CredentialParseError{lineno, "empty username or password"};
        }
        if (pass.find(' ') != std::string::npos) {
            return CredentialParseError{lineno, "password contains separator"};
        }
        list.push_back({std::move(user), std::move(pass)});
    }
    return list;
}

Result<CredentialList, CredentialParseError> load_credential_list(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        return CredentialParseError{0, "cannot open credential list: " + path};
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_credential_list(buf.str());
}

bool credential_in_list(const CredentialList& list, const CredentialEntry& entry) {
    return std::find(list.begin(), list.end(), entry) != list.end();
}

}  // namespace miraisim

// Username/password dictionary shared by the attacker stack, the audit
// cracker and device service configuration.
//
// List file format: one "username password" pair per line, separated by a
// single space. Lines starting with '#' and empty lines are ignored.

#pragma once

#include <string>
#include <vector>

#include "miraisim/result.hpp"

namespace miraisim {

struct CredentialEntry {
    std::string username;
    std::string password;

    bool operator==(const CredentialEntry&) const = default;
};

using CredentialList = std::vector<CredentialEntry>;

struct CredentialParseError {
    int line = 0;
    std::string message;
};

/// Parses credential list text. Neither field may contain the separator;
/// a line with no space or an empty username/password is an error.
Result<CredentialList, CredentialParseError> parse_credential_list(const std::string& text);

/// Loads and parses a credential list file.
Result<CredentialList, CredentialParseError> load_credential_list(const std::string& path);

/// Membership scan, exact match on both fields.
bool credential_in_list(const CredentialList& list, const CredentialEntry& entry);

}  // namespace miraisim

#include "miraisim/hash.hpp"

#include <iomanip>
#include <sstream>

namespace miraisim {

std::string to_hex(std::uint64_t value) {
    std::ostringstream out;
    out << std::hex << std::setfill('0') << std::setw(16) << value;
    return out.str();
}

}  // namespace miraisim

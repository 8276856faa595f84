#pragma once

#include <cstdint>
#include <string>

namespace rino {

// SHA-256 of a byte string, returned as lowercase hex.
std::string sha256_hex(const std::string& data);

}  // namespace rino

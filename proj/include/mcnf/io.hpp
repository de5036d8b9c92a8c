#pragma once

#include <string>

namespace mcnf {

/// Write via a temp file in the same directory plus rename, so interrupted
/// runs never leave truncated output.
void atomic_write_file(const std::string& path, const std::string& contents);

std::string read_file(const std::string& path);

}  // namespace mcnf

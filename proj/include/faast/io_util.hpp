#pragma once

#include <string>
#include <vector>

namespace faast::io {

/// Write via a temp file in the same directory, then rename into place.
void atomic_write(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

/// File content split at newlines; empty trailing line dropped.
std::vector<std::string> read_lines(const std::string& path);

}  // namespace faast::io

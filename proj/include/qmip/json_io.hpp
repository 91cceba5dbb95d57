#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace qmip {

// Reads a whole file; throws std::runtime_error with the path on failure.
std::string read_file(const std::string& path);

// Writes via a temporary file in the same directory followed by a rename, so
// readers never observe a half-written file.
void atomic_write_file(const std::string& path, const std::string& contents);

// FNV-1a digest used to fingerprint input files in run manifests.
std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t value);

}  // namespace qmip

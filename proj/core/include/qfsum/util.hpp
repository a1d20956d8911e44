#ifndef QFSUM_UTIL_HPP_
#define QFSUM_UTIL_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>

namespace qfsum {

// 64-bit FNV-1a. Used for corpus and config fingerprints in run manifests.
std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t value);

std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temporary file and renames it over `path`, so a failed
// run never leaves a partial output behind.
void write_file_atomic(const std::filesystem::path& path,
                       std::string_view contents);

// Runs fn(0..n-1) on up to `jobs` threads. Callers must write only to
// per-index slots; any reduction happens afterwards in index order.
void parallel_for(std::size_t n, int jobs,
                  const std::function<void(std::size_t)>& fn);

std::string trim(std::string_view text);

}  // namespace qfsum

#endif  // QFSUM_UTIL_HPP_

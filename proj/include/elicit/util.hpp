#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace elicit::util {

/// FNV-1a 64-bit. Used for content hashes in manifests and prompt hashes in
/// the call ledger; not a cryptographic hash.
std::uint64_t fnv1a64(std::string_view data);

std::string to_hex(std::uint64_t value);

/// "fnv64:<16 hex digits>" of the given bytes.
std::string content_hash(std::string_view data);

std::string to_lower(std::string s);
std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

/// Replaces every occurrence of "{key}" with the mapped value.
std::string fill_placeholders(
    std::string text,
    const std::vector<std::pair<std::string, std::string>>& values);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view data);

std::string iso8601_utc_now();

/// Runs tasks(i) for i in [0, n) on up to max_in_flight threads and returns
/// results in index order. The first thrown exception (lowest index wins) is
/// rethrown after all workers finish.
template <typename T>
std::vector<T> parallel_map(std::size_t n, std::size_t max_in_flight,
                            const std::function<T(std::size_t)>& task);

} // namespace elicit::util

#include "elicit/util_inl.hpp"

#ifndef LER_SRC_UTIL_H_
#define LER_SRC_UTIL_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>

#include "ler/error.h"

namespace ler::internal {

std::uint64_t fnv1a(std::string_view bytes,
                    std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t value);

std::string read_file(const std::filesystem::path &path,
                      std::string_view module);

// Writes to a sibling temporary file and renames it into place, so a failed
// write never leaves a partial artifact at `path`.
void write_file_atomic(const std::filesystem::path &path,
                       std::string_view bytes, std::string_view module);

// Runs body(i) for i in [0, n) on up to `workers` threads. Each index is
// handled exactly once; the first exception is rethrown after joining.
void parallel_for(std::size_t n, std::size_t workers,
                  const std::function<void(std::size_t)> &body);

// Verbosity from LER_LOG: 0 silent (default), 1 info, 2 debug.
int log_level();
void log(int level, std::string_view message);

[[noreturn]] void fail(ErrorCode code, std::string_view module,
                       const std::string &message);

}  // namespace ler::internal

#endif  // LER_SRC_UTIL_H_

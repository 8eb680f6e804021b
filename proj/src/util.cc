#include "util.h"

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>
#include <vector>

#include <fmt/core.h>

#include "ler/types.h"

namespace ler {

const char *error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kFormat: return "format";
    case ErrorCode::kDimensionMismatch: return "dimension_mismatch";
    case ErrorCode::kDigestMismatch: return "digest_mismatch";
    case ErrorCode::kInternal: return "internal";
  }
  return "unknown";
}

std::string_view label_name(EntityLabel label) {
  switch (label) {
    case EntityLabel::kParty: return "PARTY";
    case EntityLabel::kDate: return "DATE";
    case EntityLabel::kMoney: return "MONEY";
    case EntityLabel::kProvision: return "PROVISION";
  }
  return "?";
}

std::optional<EntityLabel> parse_label(std::string_view name) {
  for (EntityLabel label : kAllEntityLabels) {
    if (label_name(label) == name) return label;
  }
  return std::nullopt;
}

namespace internal {

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) { return fmt::format("{:016x}", value); }

std::string read_file(const std::filesystem::path &path,
                      std::string_view module) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, module, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) fail(ErrorCode::kIo, module, "read failed: " + path.string());
  return std::move(buffer).str();
}

void write_file_atomic(const std::filesystem::path &path,
                       std::string_view bytes, std::string_view module) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::kIo, module, "cannot create " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      out.close();
      std::error_code ignored;
      std::filesystem::remove(tmp, ignored);
      fail(ErrorCode::kIo, module, "write failed: " + path.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    fail(ErrorCode::kIo, module, "cannot rename into " + path.string());
  }
}

void parallel_for(std::size_t n, std::size_t workers,
                  const std::function<void(std::size_t)> &body) {
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mu;
  std::vector<std::thread> pool;
  const std::size_t count = std::min(workers, n);
  pool.reserve(count);
  for (std::size_t w = 0; w < count; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mu);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto &t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

int log_level() {
  static const int level = [] {
    const char *env = std::getenv("LER_LOG");
    if (env == nullptr) return 0;
    std::string_view v(env);
    if (v == "debug" || v == "2") return 2;
    if (v == "info" || v == "1") return 1;
    return 0;
  }();
  return level;
}

void log(int level, std::string_view message) {
  if (level > log_level()) return;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  std::cerr << (level >= 2 ? "[debug] " : "[info] ") << message << '\n';
}

void fail(ErrorCode code, std::string_view module, const std::string &message) {
  throw Error(code, std::string(module), message);
}

}  // namespace internal
}  // namespace ler

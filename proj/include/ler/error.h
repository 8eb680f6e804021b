#ifndef LER_ERROR_H_
#define LER_ERROR_H_

#include <stdexcept>
#include <string>

namespace ler {

// Failure categories. They map 1:1 onto the C API status codes.
enum class ErrorCode {
  kInvalidArgument = 1,
  kIo = 2,
  kFormat = 3,
  kDimensionMismatch = 4,
  kDigestMismatch = 5,
  kInternal = 6,
};

const char *error_code_name(ErrorCode code);

// Every library failure is reported as an Error carrying the module that
// raised it ("corpus", "embedding", "classifier", ...).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string module, const std::string &message)
      : std::runtime_error(message), code_(code), module_(std::move(module)) {}

  ErrorCode code() const { return code_; }
  const std::string &module() const { return module_; }

 private:
  ErrorCode code_;
  std::string module_;
};

}  // namespace ler

#endif  // LER_ERROR_H_

#pragma once

#include <stdexcept>
#include <string>

namespace gpprobe {

// Validation errors are bad data; I/O errors are missing or unreadable files.
// The CLI maps them to exit codes 1 and 2 respectively.
enum class ErrorKind { kValidation, kIo };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline Error ValidationError(const std::string& what) {
  return Error(ErrorKind::kValidation, what);
}

inline Error IoError(const std::string& what) {
  return Error(ErrorKind::kIo, what);
}

}  // namespace gpprobe

#pragma once

#include <stdexcept>
#include <string>

namespace mjn {

enum class ErrorCategory { config, parse, domain, no_packet, io };

/// Base of every error the library throws. The category drives CLI exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorCategory::config, what) {}
};

class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what) : Error(ErrorCategory::parse, what) {}
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(ErrorCategory::domain, what) {}
};

// Least squares with fewer than two distinct abscissae.
class DegenerateFitError : public DomainError {
 public:
  explicit DegenerateFitError(const std::string& what) : DomainError(what) {}
};

class NoPacketError : public Error {
 public:
  explicit NoPacketError(const std::string& what) : Error(ErrorCategory::no_packet, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorCategory::io, what) {}
};

inline int exit_code(ErrorCategory category) noexcept {
  switch (category) {
    case ErrorCategory::config: return 2;
    case ErrorCategory::parse: return 3;
    case ErrorCategory::domain: return 4;
    case ErrorCategory::no_packet: return 5;
    case ErrorCategory::io: return 6;
  }
  return 1;
}

namespace detail {

inline void require(bool condition, const std::string& message) {
  if (!condition) throw DomainError(message);
}

}  // namespace detail
}  // namespace mjn

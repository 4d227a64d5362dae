#pragma once

#include <stdexcept>
#include <string>

namespace trajsem {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid user-supplied configuration (bad flag values, unknown keys, ...).
class ConfigError : public Error {
public:
  explicit ConfigError(const std::string& what) : Error(what) {}
};

/// Malformed input file. Carries the source name and 1-based line number.
class ParseError : public Error {
public:
  ParseError(const std::string& source, int line, const std::string& what)
      : Error(source + ":" + std::to_string(line) + ": " + what),
        source_(source),
        line_(line) {}

  const std::string& source() const { return source_; }
  int line() const { return line_; }

private:
  std::string source_;
  int line_;
};

/// HTTP transport or protocol failure when talking to a remote backend.
class TransportError : public Error {
public:
  explicit TransportError(const std::string& what) : Error(what) {}
};

/// Two meanings were combined or compared without a shared support.
class SupportMismatchError : public Error {
public:
  explicit SupportMismatchError(const std::string& what) : Error(what) {}
};

}  // namespace trajsem

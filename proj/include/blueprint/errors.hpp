#pragma once

#include <stdexcept>
#include <string>

namespace blueprint {

// Configuration or input-file problems that abort a whole run.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// A remote model endpoint could not be reached (after retries).
class TransportError : public std::runtime_error {
 public:
  explicit TransportError(const std::string& what) : std::runtime_error(what) {}
};

// The endpoint answered, but not with the expected JSON shape.
class MalformedResponse : public std::runtime_error {
 public:
  explicit MalformedResponse(const std::string& what) : std::runtime_error(what) {}
};

// Unrecoverable problems while parsing a serialized target (missing markers).
class FormatError : public std::runtime_error {
 public:
  explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

// Metric preconditions (empty blueprint, empty corpus, ...).
class EvalError : public std::runtime_error {
 public:
  explicit EvalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace blueprint

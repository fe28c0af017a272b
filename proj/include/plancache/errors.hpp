#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace plancache {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EmptyKeyword : public Error {
 public:
  EmptyKeyword() : Error("keyword is empty after normalization") {}
};

/// Transport or HTTP failure that survived the retry policy.
class ProviderError : public Error {
 public:
  ProviderError(const std::string& what, int status = 0, bool transient = false)
      : Error(what), status_(status), transient_(transient) {}

  int status() const noexcept { return status_; }
  bool transient() const noexcept { return transient_; }

 private:
  int status_;
  bool transient_;
};

/// The scripted provider ran out of responses for a role. Always a fixture bug.
class ScriptExhausted : public Error {
 public:
  using Error::Error;
};

class UnknownPricing : public Error {
 public:
  using Error::Error;
};

class InvalidTemplate : public Error {
 public:
  using Error::Error;
};

class PersistenceError : public Error {
 public:
  using Error::Error;
};

class IncompleteLog : public Error {
 public:
  IncompleteLog() : Error("execution log has no final output") {}
};

class MalformedGeneration : public Error {
 public:
  using Error::Error;
};

class MalformedAdaptation : public Error {
 public:
  using Error::Error;
};

/// Raised by the hit path when the small planner cannot follow the template.
class EscalationRequired : public Error {
 public:
  using Error::Error;
};

class TemplateExhausted : public Error {
 public:
  using Error::Error;
};

class MalformedPlannerReply : public Error {
 public:
  using Error::Error;
};

class UnparseableVerdict : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace plancache

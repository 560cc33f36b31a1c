#pragma once

#include <stdexcept>
#include <string>

namespace fairaudit {

/// Error categories, mapped to distinct CLI exit codes.
enum class ErrorKind {
  Input,              // unreadable/malformed input, bad configuration
  Degenerate,         // statistics impossible on this data (empty group, constant rates, collinearity)
  BootstrapDiscardCap // too many degenerate resamples for a stable bootstrap
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void throw_input(const std::string& msg) { throw Error(ErrorKind::Input, msg); }
[[noreturn]] inline void throw_degenerate(const std::string& msg) { throw Error(ErrorKind::Degenerate, msg); }

}  // namespace fairaudit

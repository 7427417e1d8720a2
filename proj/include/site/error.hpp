#pragma once

#include <functional>
#include <iostream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace site {

/// Base exception for every failure raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Input violates an operation's precondition.
class InvalidArgument : public Error {
public:
  using Error::Error;
};

/// A solver produced a non-finite value.
class BlowUp : public Error {
public:
  BlowUp(int step, const std::string& what)
      : Error("solver blow-up at step " + std::to_string(step) + ": " + what), step_(step) {}
  int step() const noexcept { return step_; }

private:
  int step_;
};

/// Design matrix is numerically rank deficient.
class RankDeficient : public Error {
public:
  using Error::Error;
};

using WarningSink = std::function<void(std::string_view)>;

/// Receives non-fatal diagnostics (stability violations, solver caps). One sink per thread.
inline WarningSink& warning_sink() {
  thread_local WarningSink sink = [](std::string_view msg) { std::cerr << "warning: " << msg << '\n'; };
  return sink;
}

inline void warn(std::string_view msg) {
  if (auto& sink = warning_sink()) sink(msg);
}

/// RAII override of the warning sink, restored on scope exit.
class ScopedWarningSink {
public:
  explicit ScopedWarningSink(WarningSink sink) : saved_(std::move(warning_sink())) {
    warning_sink() = std::move(sink);
  }
  ~ScopedWarningSink() { warning_sink() = std::move(saved_); }
  ScopedWarningSink(const ScopedWarningSink&) = delete;
  ScopedWarningSink& operator=(const ScopedWarningSink&) = delete;

private:
  WarningSink saved_;
};

}  // namespace site

#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <sys/types.h>
#include <vector>

namespace semdiff {

/// A child process spoken to over line-delimited stdin/stdout. stderr is
/// inherited.
class Subprocess {
 public:
  using Clock = std::chrono::steady_clock;

  /// Throws RunnerNotFound when the executable cannot be started.
  explicit Subprocess(const std::vector<std::string>& argv);
  ~Subprocess();
  Subprocess(const Subprocess&) = delete;
  Subprocess& operator=(const Subprocess&) = delete;

  /// Throws RunnerCrashed if the child has closed its stdin.
  void write_line(std::string_view line);

  /// Next line without the trailing newline, or nullopt once `deadline`
  /// passes. Throws RunnerCrashed on end of stream.
  std::optional<std::string> read_line(Clock::time_point deadline);

  /// SIGKILL and reap. Safe to call more than once.
  void kill();

  /// Closes stdin and waits up to `grace` for a clean exit, then kills.
  /// Returns the exit status, or -1 if the child had to be killed.
  int close(std::chrono::milliseconds grace);

  pid_t pid() const { return pid_; }

 private:
  pid_t pid_ = -1;
  int in_fd_ = -1;
  int out_fd_ = -1;
  std::string pending_;
};

}  // namespace semdiff

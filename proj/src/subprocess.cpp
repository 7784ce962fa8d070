#include "semdiff/subprocess.hpp"

#include <cerrno>
#include <csignal>
#include <cstring>
#include <fcntl.h>
#include <mutex>
#include <poll.h>
#include <sys/wait.h>
#include <thread>
#include <unistd.h>

#include "semdiff/errors.hpp"

namespace semdiff {

namespace {

void ignore_sigpipe() {
  static std::once_flag once;
  std::call_once(once, [] { std::signal(SIGPIPE, SIG_IGN); });
}

void close_fd(int& fd) {
  if (fd >= 0) ::close(fd);
  fd = -1;
}

}  // namespace

Subprocess::Subprocess(const std::vector<std::string>& argv) {
  if (argv.empty()) throw RunnerNotFound("empty runner command");
  ignore_sigpipe();

  int to_child[2], from_child[2], status_pipe[2];
  if (::pipe2(to_child, O_CLOEXEC) != 0 || ::pipe2(from_child, O_CLOEXEC) != 0 ||
      ::pipe2(status_pipe, O_CLOEXEC) != 0) {
    throw RunnerCrashed(std::string("pipe: ") + std::strerror(errno));
  }

  std::vector<char*> args;
  for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
  args.push_back(nullptr);

  pid_ = ::fork();
  if (pid_ < 0) throw RunnerCrashed(std::string("fork: ") + std::strerror(errno));
  if (pid_ == 0) {
    ::dup2(to_child[0], STDIN_FILENO);
    ::dup2(from_child[1], STDOUT_FILENO);
    ::execvp(args[0], args.data());
    const int err = errno;
    [[maybe_unused]] auto n = ::write(status_pipe[1], &err, sizeof err);
    ::_exit(127);
  }

  ::close(to_child[0]);
  ::close(from_child[1]);
  ::close(status_pipe[1]);
  in_fd_ = to_child[1];
  out_fd_ = from_child[0];

  int err = 0;
  ssize_t n;
  do {
    n = ::read(status_pipe[0], &err, sizeof err);
  } while (n < 0 && errno == EINTR);
  ::close(status_pipe[0]);
  if (n == static_cast<ssize_t>(sizeof err)) {
    ::waitpid(pid_, nullptr, 0);
    pid_ = -1;
    close_fd(in_fd_);
    close_fd(out_fd_);
    throw RunnerNotFound("cannot execute '" + argv[0] + "': " + std::strerror(err));
  }
}

Subprocess::~Subprocess() { kill(); }

void Subprocess::write_line(std::string_view line) {
  std::string data(line);
  data.push_back('\n');
  std::size_t off = 0;
  while (off < data.size()) {
    const ssize_t n = ::write(in_fd_, data.data() + off, data.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw RunnerCrashed(std::string("runner stdin closed: ") + std::strerror(errno));
    }
    off += static_cast<std::size_t>(n);
  }
}

std::optional<std::string> Subprocess::read_line(Clock::time_point deadline) {
  while (true) {
    const auto nl = pending_.find('\n');
    if (nl != std::string::npos) {
      std::string line = pending_.substr(0, nl);
      pending_.erase(0, nl + 1);
      return line;
    }
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
    if (left.count() <= 0) return std::nullopt;

    pollfd pfd{out_fd_, POLLIN, 0};
    const int rc = ::poll(&pfd, 1, static_cast<int>(std::min<long long>(left.count() + 1, 1 << 30)));
    if (rc < 0) {
      if (errno == EINTR) continue;
      throw RunnerCrashed(std::string("poll: ") + std::strerror(errno));
    }
    if (rc == 0) continue;

    char buf[65536];
    const ssize_t n = ::read(out_fd_, buf, sizeof buf);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw RunnerCrashed(std::string("read: ") + std::strerror(errno));
    }
    if (n == 0) throw RunnerCrashed("runner closed its output");
    pending_.append(buf, static_cast<std::size_t>(n));
  }
}

void Subprocess::kill() {
  close_fd(in_fd_);
  close_fd(out_fd_);
  if (pid_ > 0) {
    ::kill(pid_, SIGKILL);
    ::waitpid(pid_, nullptr, 0);
    pid_ = -1;
  }
  pending_.clear();
}

int Subprocess::close(std::chrono::milliseconds grace) {
  close_fd(in_fd_);
  if (pid_ <= 0) return -1;
  const auto until = Clock::now() + grace;
  int status = 0;
  while (Clock::now() < until) {
    const pid_t r = ::waitpid(pid_, &status, WNOHANG);
    if (r == pid_) {
      pid_ = -1;
      close_fd(out_fd_);
      pending_.clear();
      return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  kill();
  return -1;
}

}  // namespace semdiff

#include "verirefine/process.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cerrno>

namespace verirefine {

namespace {

void set_nonblocking(int fd) { ::fcntl(fd, F_SETFL, ::fcntl(fd, F_GETFL) | O_NONBLOCK); }

struct Pipe {
  int fds[2] = {-1, -1};
  bool open() { return ::pipe2(fds, O_CLOEXEC) == 0; }
  void close_read() { if (fds[0] >= 0) ::close(fds[0]); fds[0] = -1; }
  void close_write() { if (fds[1] >= 0) ::close(fds[1]); fds[1] = -1; }
  ~Pipe() { close_read(); close_write(); }
};

}  // namespace

std::string shell_quote(std::string_view s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  out += '\'';
  return out;
}

std::string expand_command(std::string_view tmpl, const std::map<std::string, std::string>& vars) {
  std::string out;
  for (std::size_t i = 0; i < tmpl.size(); ++i) {
    if (tmpl[i] == '{') {
      const auto close = tmpl.find('}', i);
      if (close != std::string_view::npos) {
        auto it = vars.find(std::string(tmpl.substr(i + 1, close - i - 1)));
        if (it != vars.end()) {
          out += shell_quote(it->second);
          i = close;
          continue;
        }
      }
    }
    out += tmpl[i];
  }
  return out;
}

ProcessResult run_process(const std::string& command, const std::filesystem::path& cwd,
                          std::string_view input, std::chrono::milliseconds timeout) {
  ProcessResult result;
  Pipe in, out, err;
  if (!in.open() || !out.open() || !err.open()) {
    result.err = "pipe creation failed";
    return result;
  }

  const pid_t pid = ::fork();
  if (pid < 0) {
    result.err = "fork failed";
    return result;
  }
  if (pid == 0) {
    ::setpgid(0, 0);
    ::dup2(in.fds[0], STDIN_FILENO);
    ::dup2(out.fds[1], STDOUT_FILENO);
    ::dup2(err.fds[1], STDERR_FILENO);
    if (!cwd.empty() && ::chdir(cwd.c_str()) != 0) _exit(126);
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  ::setpgid(pid, pid);
  result.launched = true;
  in.close_read();
  out.close_write();
  err.close_write();
  set_nonblocking(in.fds[1]);
  set_nonblocking(out.fds[0]);
  set_nonblocking(err.fds[0]);

  ::signal(SIGPIPE, SIG_IGN);
  std::size_t written = 0;
  if (input.empty()) in.close_write();

  const auto deadline = std::chrono::steady_clock::now() + timeout;
  std::array<char, 8192> buf{};
  while (out.fds[0] >= 0 || err.fds[0] >= 0) {
    std::array<pollfd, 3> pfds{};
    nfds_t n = 0;
    int out_slot = -1, err_slot = -1, in_slot = -1;
    if (out.fds[0] >= 0) { pfds[n] = {out.fds[0], POLLIN, 0}; out_slot = static_cast<int>(n++); }
    if (err.fds[0] >= 0) { pfds[n] = {err.fds[0], POLLIN, 0}; err_slot = static_cast<int>(n++); }
    if (in.fds[1] >= 0) { pfds[n] = {in.fds[1], POLLOUT, 0}; in_slot = static_cast<int>(n++); }

    const auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (remaining.count() <= 0) {
      result.timed_out = true;
      ::kill(-pid, SIGKILL);
      break;
    }
    const int rc = ::poll(pfds.data(), n, static_cast<int>(std::min<long long>(remaining.count(), 1000)));
    if (rc < 0 && errno != EINTR) break;
    if (rc <= 0) continue;

    auto drain = [&](int slot, Pipe& p, std::string& sink) {
      if (slot < 0 || !(pfds[slot].revents & (POLLIN | POLLHUP | POLLERR))) return;
      const auto got = ::read(p.fds[0], buf.data(), buf.size());
      if (got > 0) {
        sink.append(buf.data(), static_cast<std::size_t>(got));
      } else if (got == 0 || (errno != EAGAIN && errno != EINTR)) {
        p.close_read();
      }
    };
    drain(out_slot, out, result.out);
    drain(err_slot, err, result.err);

    if (in_slot >= 0 && (pfds[in_slot].revents & (POLLOUT | POLLERR | POLLHUP))) {
      const auto w = ::write(in.fds[1], input.data() + written, input.size() - written);
      if (w > 0) written += static_cast<std::size_t>(w);
      if (w < 0 && errno != EAGAIN) written = input.size();
      if (written >= input.size()) in.close_write();
    }
  }
  in.close_write();

  int status = 0;
  ::waitpid(pid, &status, 0);
  if (WIFEXITED(status)) {
    result.exit_code = WEXITSTATUS(status);
  } else if (WIFSIGNALED(status)) {
    result.exit_code = 128 + WTERMSIG(status);
  }
  if (result.exit_code == 127 && !result.timed_out) {
    // sh reports "command not found" as 127.
    result.launched = result.err.find("not found") == std::string::npos;
  }
  return result;
}

}  // namespace verirefine

#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstring>

#include "zoprox/error.hpp"
#include "zoprox/problems.hpp"

namespace zoprox {

namespace {

constexpr double kSumTolerance = 1e-3;

std::vector<double> parse_scores(const std::string& line) {
  std::vector<double> out;
  const char* p = line.data();
  const char* end = p + line.size();
  while (p < end) {
    while (p < end && (*p == ' ' || *p == '\t' || *p == '\r')) ++p;
    if (p >= end) break;
    double v = 0.0;
    const auto [next, ec] = std::from_chars(p, end, v);
    if (ec != std::errc() || !std::isfinite(v)) {
      throw OracleUnavailable("scorer response is not a list of floats: '" + line + "'");
    }
    if (next < end && *next != ' ' && *next != '\t' && *next != '\r') {
      throw OracleUnavailable("scorer response is not a list of floats: '" + line + "'");
    }
    out.push_back(v);
    p = next;
  }
  return out;
}

}  // namespace

ProcessScorer::ProcessScorer(const std::string& command, std::chrono::milliseconds timeout)
    : timeout_(timeout) {
  int fds[2];
  if (socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, fds) != 0) {
    throw OracleUnavailable(std::string("socketpair failed: ") + std::strerror(errno));
  }
  const pid_t pid = fork();
  if (pid < 0) {
    close(fds[0]);
    close(fds[1]);
    throw OracleUnavailable(std::string("fork failed: ") + std::strerror(errno));
  }
  if (pid == 0) {
    dup2(fds[1], STDIN_FILENO);
    dup2(fds[1], STDOUT_FILENO);
    execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  close(fds[1]);
  pid_ = pid;
  to_child_ = fds[0];
  from_child_ = fds[0];
}

ProcessScorer::~ProcessScorer() { shutdown(); }

void ProcessScorer::shutdown() noexcept {
  if (to_child_ >= 0) close(to_child_);
  to_child_ = from_child_ = -1;
  if (pid_ > 0) {
    kill(pid_, SIGTERM);
    waitpid(pid_, nullptr, 0);
    pid_ = -1;
  }
}

std::vector<double> ProcessScorer::scores(const Vector& input) const {
  std::lock_guard lock(mutex_);
  if (to_child_ < 0) throw OracleUnavailable("scorer process is not running");

  std::string request;
  request.reserve(static_cast<std::size_t>(input.size()) * 24);
  char buf[32];
  for (Eigen::Index j = 0; j < input.size(); ++j) {
    if (j > 0) request += ' ';
    const auto res = std::to_chars(buf, buf + sizeof buf, input[j]);
    request.append(buf, res.ptr);
  }
  request += '\n';

  std::size_t sent = 0;
  while (sent < request.size()) {
    const ssize_t k = send(to_child_, request.data() + sent, request.size() - sent, MSG_NOSIGNAL);
    if (k < 0) {
      if (errno == EINTR) continue;
      throw OracleUnavailable(std::string("cannot write to scorer: ") + std::strerror(errno));
    }
    sent += static_cast<std::size_t>(k);
  }

  const auto deadline = std::chrono::steady_clock::now() + timeout_;
  std::size_t newline;
  while ((newline = pending_.find('\n')) == std::string::npos) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) throw OracleUnavailable("scorer timed out");
    pollfd pfd{from_child_, POLLIN, 0};
    const int ready = poll(&pfd, 1, static_cast<int>(left.count()));
    if (ready < 0 && errno == EINTR) continue;
    if (ready <= 0) throw OracleUnavailable("scorer timed out");
    char chunk[4096];
    const ssize_t got = recv(from_child_, chunk, sizeof chunk, 0);
    if (got < 0 && errno == EINTR) continue;
    if (got <= 0) throw OracleUnavailable("scorer closed its output");
    pending_.append(chunk, static_cast<std::size_t>(got));
  }
  const std::string line = pending_.substr(0, newline);
  pending_.erase(0, newline + 1);

  std::vector<double> out = parse_scores(line);
  if (out.size() < 2) throw OracleUnavailable("scorer returned fewer than two class scores");
  double sum = 0.0;
  for (double v : out) sum += v;
  if (std::abs(sum - 1.0) > kSumTolerance) {
    throw OracleUnavailable("scorer scores sum to " + std::to_string(sum) + ", expected 1");
  }
  return out;
}

}  // namespace zoprox

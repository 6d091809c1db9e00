#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstring>
#include <string>

#include "gale/error.hpp"
#include "gale/model.hpp"

namespace gale {

namespace {

[[noreturn]] void adapter_fail(const std::string& message) { fail("adapter", message); }

// A write to a dead child must come back as EPIPE, not kill the process.
void ignore_sigpipe_once() {
  static const int ignored = [] {
    ::signal(SIGPIPE, SIG_IGN);
    return 0;
  }();
  (void)ignored;
}

}  // namespace

struct ExternalModel::Process {
  pid_t pid = -1;
  int to_child = -1;    // our write end
  int from_child = -1;  // our read end
  std::string read_buffer;

  ~Process() {
    if (to_child >= 0) ::close(to_child);
    if (from_child >= 0) ::close(from_child);
    if (pid > 0) {
      int status = 0;
      if (::waitpid(pid, &status, WNOHANG) == 0) {
        ::kill(pid, SIGKILL);
        ::waitpid(pid, &status, 0);
      }
    }
  }

  void spawn(const std::string& command) {
    int in_pipe[2];   // parent -> child
    int out_pipe[2];  // child -> parent
    if (::pipe(in_pipe) != 0 || ::pipe(out_pipe) != 0) {
      adapter_fail("pipe() failed: " + std::string(std::strerror(errno)));
    }
    pid = ::fork();
    if (pid < 0) adapter_fail("fork() failed: " + std::string(std::strerror(errno)));
    if (pid == 0) {
      ::dup2(in_pipe[0], STDIN_FILENO);
      ::dup2(out_pipe[1], STDOUT_FILENO);
      ::close(in_pipe[0]);
      ::close(in_pipe[1]);
      ::close(out_pipe[0]);
      ::close(out_pipe[1]);
      ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
      _exit(127);
    }
    ::close(in_pipe[0]);
    ::close(out_pipe[1]);
    to_child = in_pipe[1];
    from_child = out_pipe[0];
  }

  void write_all(const std::string& data) {
    std::size_t off = 0;
    while (off < data.size()) {
      const ssize_t n = ::write(to_child, data.data() + off, data.size() - off);
      if (n < 0) {
        if (errno == EINTR) continue;
        adapter_fail("write to external model failed (" + std::string(std::strerror(errno)) +
                     "); the process may have exited");
      }
      off += static_cast<std::size_t>(n);
    }
  }

  // One line, without the trailing newline. Deadline is absolute.
  std::string read_line(std::chrono::steady_clock::time_point deadline) {
    for (;;) {
      const auto nl = read_buffer.find('\n');
      if (nl != std::string::npos) {
        std::string line = read_buffer.substr(0, nl);
        read_buffer.erase(0, nl + 1);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
      }
      const auto now = std::chrono::steady_clock::now();
      if (now >= deadline) adapter_fail("timeout waiting for external model reply");
      const auto remaining =
          std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count();
      struct pollfd pfd{from_child, POLLIN, 0};
      const int rc = ::poll(&pfd, 1, static_cast<int>(std::min<long long>(remaining, 60'000)));
      if (rc < 0) {
        if (errno == EINTR) continue;
        adapter_fail("poll() failed: " + std::string(std::strerror(errno)));
      }
      if (rc == 0) continue;  // re-check deadline
      char chunk[4096];
      const ssize_t n = ::read(from_child, chunk, sizeof(chunk));
      if (n < 0) {
        if (errno == EINTR) continue;
        adapter_fail("read from external model failed: " + std::string(std::strerror(errno)));
      }
      if (n == 0) adapter_fail("external model process exited before completing the batch");
      read_buffer.append(chunk, static_cast<std::size_t>(n));
    }
  }
};

ExternalModel::ExternalModel(ExternalModelConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.command.empty()) adapter_fail("empty external model command");
  if (cfg_.class_names.size() < 2) adapter_fail("external model needs at least 2 class names");
  if (!(cfg_.batch_timeout_seconds > 0)) adapter_fail("batch timeout must be positive");
  ignore_sigpipe_once();
  proc_ = std::make_unique<Process>();
  proc_->spawn(cfg_.command);
}

ExternalModel::~ExternalModel() = default;

std::vector<double> ExternalModel::predict_proba(const Document& doc) const {
  return predict_proba_batch({&doc, 1}).front();
}

std::vector<std::vector<double>> ExternalModel::predict_proba_batch(
    std::span<const Document> docs) const {
  if (docs.empty()) return {};

  std::string request;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    if (docs[i].tokens.empty()) {
      adapter_fail("document " + std::to_string(docs[i].id) +
                   " is empty; the line protocol cannot represent an empty document");
    }
    for (std::size_t t = 0; t < docs[i].tokens.size(); ++t) {
      if (t > 0) request.push_back('\t');
      request += docs[i].tokens[t];
    }
    request.push_back('\n');
  }
  request.push_back('\n');  // batch terminator

  std::lock_guard<std::mutex> lock(mutex_);
  proc_->write_all(request);

  const auto deadline = std::chrono::steady_clock::now() +
                        std::chrono::microseconds(static_cast<long long>(
                            cfg_.batch_timeout_seconds * 1e6));
  std::vector<std::vector<double>> out;
  out.reserve(docs.size());
  for (std::size_t i = 0; i < docs.size(); ++i) {
    std::string line;
    try {
      line = proc_->read_line(deadline);
    } catch (const Error& e) {
      fail("adapter", std::string(e.what()) + " (reply " + std::to_string(i + 1) + " of " +
                          std::to_string(docs.size()) + ")");
    }

    std::vector<double> probs;
    std::size_t pos = 0;
    while (pos < line.size()) {
      while (pos < line.size() && line[pos] == ' ') ++pos;
      if (pos >= line.size()) break;
      std::size_t end = line.find(' ', pos);
      if (end == std::string::npos) end = line.size();
      try {
        probs.push_back(std::stod(line.substr(pos, end - pos)));
      } catch (const std::exception&) {
        adapter_fail("malformed probability '" + line.substr(pos, end - pos) + "' in reply " +
                     std::to_string(i + 1));
      }
      pos = end;
    }
    if (probs.size() != cfg_.class_names.size()) {
      adapter_fail("reply " + std::to_string(i + 1) + " has " + std::to_string(probs.size()) +
                   " probabilities, expected " + std::to_string(cfg_.class_names.size()));
    }
    double sum = 0.0;
    for (double p : probs) {
      if (!std::isfinite(p) || p < 0.0) {
        adapter_fail("reply " + std::to_string(i + 1) + " is not a probability vector");
      }
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-6) {
      adapter_fail("reply " + std::to_string(i + 1) + " probabilities sum to " +
                   std::to_string(sum) + ", expected 1");
    }
    out.push_back(std::move(probs));
  }
  return out;
}

}  // namespace gale

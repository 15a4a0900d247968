// Copyright (c) 2026, The rlpipe Authors
// SPDX-License-Identifier: Apache-2.0

#include "rlpipe/reward/sandbox.hpp"

#include <fcntl.h>
#include <poll.h>
#include <sched.h>
#include <signal.h>
#include <sys/resource.h>
#include <sys/stat.h>
#include <sys/time.h>
#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <mutex>
#include <thread>

#include "rlpipe/core/errors.hpp"

namespace rlpipe::reward {
namespace fs = std::filesystem;
namespace {

using Clock = std::chrono::steady_clock;

constexpr std::size_t kFileSizeForCompile = std::size_t{256} << 20;

struct SpawnSpec {
  std::vector<std::string> argv;
  fs::path cwd;
  ResourceLimits limits;
  std::size_t fsize_bytes = 0;
  std::size_t stderr_cap = 0;
  const std::optional<std::string>* stdin_text = nullptr;
};

// Closes on scope exit; -1 means empty.
class Fd {
 public:
  Fd() = default;
  explicit Fd(int fd) : fd_(fd) {}
  ~Fd() { reset(); }
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  int get() const { return fd_; }
  bool open() const { return fd_ >= 0; }
  void reset() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

 private:
  int fd_ = -1;
};

void set_nonblocking(int fd) { ::fcntl(fd, F_SETFL, ::fcntl(fd, F_GETFL) | O_NONBLOCK); }

void ignore_sigpipe_once() {
  static std::once_flag once;
  std::call_once(once, [] { ::signal(SIGPIPE, SIG_IGN); });
}

void set_limit(int resource, rlim_t soft, rlim_t hard) {
  struct rlimit rl{soft, hard};
  ::setrlimit(resource, &rl);
}

bool contains(const std::string& haystack, std::string_view needle) { return haystack.find(needle) != std::string::npos; }

ExecutionRecord spawn_and_wait(const SpawnSpec& spec) {
  ignore_sigpipe_once();

  // Everything the child touches is prepared before fork: the child may only
  // make async-signal-safe calls.
  std::vector<char*> argv;
  for (const auto& a : spec.argv) argv.push_back(const_cast<char*>(a.c_str()));
  argv.push_back(nullptr);
  const std::string cwd = spec.cwd.string();
  const std::array<std::string, 7> env_storage{"PATH=/usr/local/bin:/usr/bin:/bin",
                                               "HOME=" + cwd,
                                               "TMPDIR=" + cwd,
                                               "LANG=C.UTF-8",
                                               "PYTHONHASHSEED=0",
                                               "PYTHONDONTWRITEBYTECODE=1",
                                               "PYTHONUNBUFFERED=1"};
  std::vector<char*> envp;
  for (const auto& e : env_storage) envp.push_back(const_cast<char*>(e.c_str()));
  envp.push_back(nullptr);

  const auto cpu = static_cast<rlim_t>(std::max(1.0, std::ceil(spec.limits.cpu_seconds)));
  const auto mem = static_cast<rlim_t>(spec.limits.memory_bytes);
  const auto fsize = static_cast<rlim_t>(spec.fsize_bytes);

  int in_fds[2], out_fds[2], err_fds[2], status_fds[2];
  if (::pipe2(in_fds, O_CLOEXEC) || ::pipe2(out_fds, O_CLOEXEC) || ::pipe2(err_fds, O_CLOEXEC) ||
      ::pipe2(status_fds, O_CLOEXEC)) {
    throw EnvironmentError(std::string("pipe2: ") + std::strerror(errno));
  }
  Fd in_r(in_fds[0]), in_w(in_fds[1]), out_r(out_fds[0]), out_w(out_fds[1]), err_r(err_fds[0]), err_w(err_fds[1]);
  Fd status_r(status_fds[0]), status_w(status_fds[1]);

  const auto start = Clock::now();
  const pid_t pid = ::fork();
  if (pid < 0) throw EnvironmentError(std::string("fork: ") + std::strerror(errno));
  if (pid == 0) {
    ::setpgid(0, 0);
    const bool isolated = ::unshare(CLONE_NEWNET) == 0 || ::unshare(CLONE_NEWUSER | CLONE_NEWNET) == 0;
    const char flag = isolated ? 'N' : 'n';
    (void)!::write(status_fds[1], &flag, 1);
    ::dup2(in_fds[0], 0);
    ::dup2(out_fds[1], 1);
    ::dup2(err_fds[1], 2);
    if (::chdir(cwd.c_str()) != 0) ::_exit(126);
    set_limit(RLIMIT_CPU, cpu, cpu + 1);
    set_limit(RLIMIT_AS, mem, mem);
    set_limit(RLIMIT_FSIZE, fsize, fsize);
    set_limit(RLIMIT_CORE, 0, 0);
    ::execve(argv[0], argv.data(), envp.data());
    const int err = errno;
    char buf[1 + sizeof(int)];
    buf[0] = 'E';
    std::memcpy(buf + 1, &err, sizeof(int));
    (void)!::write(status_fds[1], buf, sizeof(buf));
    ::_exit(127);
  }
  ::setpgid(pid, pid);
  in_r.reset();
  out_w.reset();
  err_w.reset();
  status_w.reset();

  ExecutionRecord rec;
  {
    char buf[16];
    std::size_t got = 0;
    ssize_t n;
    while ((n = ::read(status_r.get(), buf + got, sizeof(buf) - got)) > 0 || (n < 0 && errno == EINTR)) {
      if (n > 0) got += static_cast<std::size_t>(n);
    }
    rec.network_isolated = got > 0 && buf[0] == 'N';
    if (got >= 2 && buf[1] == 'E') {
      int err = 0;
      std::memcpy(&err, buf + 2, std::min(sizeof(int), got - 2));
      ::waitpid(pid, nullptr, 0);
      throw EnvironmentError("cannot execute " + spec.argv.front() + ": " + std::strerror(err));
    }
  }

  const auto deadline = start + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(spec.limits.wall_seconds));
  enum class Kill { none, timeout, output };
  Kill killed = Kill::none;
  auto kill_group = [&](Kill why) {
    if (killed == Kill::none) killed = why;
    ::kill(-pid, SIGKILL);
    ::kill(pid, SIGKILL);
  };

  const std::string* input = (spec.stdin_text && spec.stdin_text->has_value()) ? &spec.stdin_text->value() : nullptr;
  std::size_t written = 0;
  if (!input || input->empty()) {
    in_w.reset();
  } else {
    set_nonblocking(in_w.get());
  }
  set_nonblocking(out_r.get());
  set_nonblocking(err_r.get());

  std::array<char, 1 << 16> buf{};
  while (out_r.open() || err_r.open()) {
    std::vector<pollfd> fds;
    if (in_w.open()) fds.push_back({in_w.get(), POLLOUT, 0});
    if (out_r.open()) fds.push_back({out_r.get(), POLLIN, 0});
    if (err_r.open()) fds.push_back({err_r.get(), POLLIN, 0});
    const auto now = Clock::now();
    if (now >= deadline) {
      kill_group(Kill::timeout);
      break;
    }
    const auto wait_ms = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count() + 1;
    const int ready = ::poll(fds.data(), fds.size(), static_cast<int>(wait_ms));
    if (ready < 0 && errno != EINTR) break;
    for (const auto& p : fds) {
      if (!p.revents) continue;
      if (p.fd == in_w.get()) {
        const ssize_t n = ::write(in_w.get(), input->data() + written, input->size() - written);
        if (n > 0) written += static_cast<std::size_t>(n);
        if ((n < 0 && errno != EAGAIN && errno != EINTR) || written == input->size()) in_w.reset();
        continue;
      }
      const bool is_out = p.fd == out_r.get();
      const ssize_t n = ::read(p.fd, buf.data(), buf.size());
      if (n > 0) {
        if (is_out) {
          rec.stdout_text.append(buf.data(), static_cast<std::size_t>(n));
          if (rec.stdout_text.size() > spec.limits.output_bytes) {
            rec.stdout_text.resize(spec.limits.output_bytes);
            kill_group(Kill::output);
          }
        } else if (rec.stderr_text.size() < spec.stderr_cap) {
          rec.stderr_text.append(buf.data(), std::min(static_cast<std::size_t>(n), spec.stderr_cap - rec.stderr_text.size()));
        }
      } else if (n == 0 || (errno != EAGAIN && errno != EINTR)) {
        (is_out ? out_r : err_r).reset();
      }
    }
    if (killed != Kill::none) break;
  }
  in_w.reset();
  out_r.reset();
  err_r.reset();

  int status = 0;
  struct rusage usage{};
  for (;;) {
    const pid_t r = ::wait4(pid, &status, WNOHANG, &usage);
    if (r == pid) break;
    if (r < 0 && errno != EINTR) break;
    if (killed == Kill::none && Clock::now() >= deadline) kill_group(Kill::timeout);
    std::this_thread::sleep_for(std::chrono::milliseconds(1));
  }
  // Reap stragglers that inherited the process group.
  ::kill(-pid, SIGKILL);

  rec.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  rec.cpu_seconds = static_cast<double>(usage.ru_utime.tv_sec + usage.ru_stime.tv_sec) +
                    1e-6 * static_cast<double>(usage.ru_utime.tv_usec + usage.ru_stime.tv_usec);
  rec.max_rss_kb = usage.ru_maxrss;
  if (WIFEXITED(status)) rec.exit_code = WEXITSTATUS(status);
  if (WIFSIGNALED(status)) rec.term_signal = WTERMSIG(status);

  const bool oom_text = contains(rec.stderr_text, "MemoryError") || contains(rec.stderr_text, "bad_alloc");
  if (killed == Kill::timeout) {
    rec.status = ExecStatus::timeout;
  } else if (killed == Kill::output) {
    rec.status = ExecStatus::output_limit;
  } else if (rec.term_signal == SIGXCPU || (rec.term_signal == SIGKILL && rec.cpu_seconds >= static_cast<double>(cpu))) {
    rec.status = ExecStatus::timeout;
  } else if (rec.term_signal == SIGXFSZ) {
    rec.status = ExecStatus::output_limit;
  } else if (oom_text && (rec.exit_code != 0 || rec.term_signal != 0)) {
    rec.status = ExecStatus::memory_limit;
  } else if (rec.term_signal != 0) {
    rec.status = ExecStatus::signaled;
  } else if (rec.exit_code != 0) {
    rec.status = ExecStatus::nonzero_exit;
  } else {
    rec.status = ExecStatus::ok;
  }
  return rec;
}

fs::path make_work_dir(const fs::path& root) {
  fs::create_directories(root);
  std::string templ = (root / "rlpipe-sbx-XXXXXX").string();
  if (::mkdtemp(templ.data()) == nullptr) throw EnvironmentError("mkdtemp failed under " + root.string());
  return templ;
}

constexpr std::array<std::pair<std::string_view, ExecStatus>, 7> kExecStatuses{{
    {"ok", ExecStatus::ok},
    {"nonzero_exit", ExecStatus::nonzero_exit},
    {"timeout", ExecStatus::timeout},
    {"memory_limit", ExecStatus::memory_limit},
    {"output_limit", ExecStatus::output_limit},
    {"signaled", ExecStatus::signaled},
    {"compile_error", ExecStatus::compile_error},
}};

}  // namespace

std::string_view to_string(ExecStatus s) {
  for (const auto& [name, value] : kExecStatuses) {
    if (value == s) return name;
  }
  return "?";
}

ExecStatus parse_exec_status(std::string_view s) {
  for (const auto& [name, value] : kExecStatuses) {
    if (name == s) return value;
  }
  throw ValidationError("unknown execution status: " + std::string(s));
}

Json to_json(const ResourceLimits& l) {
  return {{"wall_seconds", l.wall_seconds},
          {"cpu_seconds", l.cpu_seconds},
          {"memory_bytes", l.memory_bytes},
          {"output_bytes", l.output_bytes}};
}

ResourceLimits limits_from_json(const Json& j, ResourceLimits d) {
  if (!j.is_object()) return d;
  d.wall_seconds = j.value("wall_seconds", d.wall_seconds);
  d.cpu_seconds = j.value("cpu_seconds", d.wall_seconds);
  d.memory_bytes = j.value("memory_bytes", d.memory_bytes);
  d.output_bytes = j.value("output_bytes", d.output_bytes);
  if (d.wall_seconds <= 0 || d.cpu_seconds <= 0 || d.memory_bytes == 0 || d.output_bytes == 0) {
    throw ValidationError("resource limits must be positive");
  }
  return d;
}

Json to_json(const ExecutionRecord& r) {
  return {{"status", to_string(r.status)},   {"stdout", r.stdout_text},         {"stderr", r.stderr_text},
          {"exit_code", r.exit_code},        {"term_signal", r.term_signal},    {"wall_seconds", r.wall_seconds},
          {"cpu_seconds", r.cpu_seconds},    {"max_rss_kb", r.max_rss_kb},      {"network_isolated", r.network_isolated}};
}

ExecutionRecord execution_record_from_json(const Json& j) {
  ExecutionRecord r;
  r.status = parse_exec_status(j.at("status").get<std::string>());
  r.stdout_text = j.value("stdout", std::string());
  r.stderr_text = j.value("stderr", std::string());
  r.exit_code = j.value("exit_code", -1);
  r.term_signal = j.value("term_signal", 0);
  r.wall_seconds = j.value("wall_seconds", 0.0);
  r.cpu_seconds = j.value("cpu_seconds", 0.0);
  r.max_rss_kb = j.value("max_rss_kb", 0L);
  r.network_isolated = j.value("network_isolated", false);
  return r;
}

Json to_json(const ProgramSource& p) { return {{"language", to_string(p.language)}, {"source", p.source}}; }

ProgramSource program_from_json(const Json& j) {
  return {parse_language(j.at("language").get<std::string>()), j.at("source").get<std::string>()};
}

std::optional<fs::path> find_executable(const std::string& name) {
  if (name.find('/') != std::string::npos) {
    if (::access(name.c_str(), X_OK) == 0) return fs::path(name);
    return std::nullopt;
  }
  const char* path = std::getenv("PATH");
  std::string_view dirs = path ? path : "/usr/local/bin:/usr/bin:/bin";
  while (!dirs.empty()) {
    const auto colon = dirs.find(':');
    const auto dir = dirs.substr(0, colon);
    if (!dir.empty()) {
      const fs::path candidate = fs::path(dir) / name;
      if (::access(candidate.c_str(), X_OK) == 0) return candidate;
    }
    if (colon == std::string_view::npos) break;
    dirs.remove_prefix(colon + 1);
  }
  return std::nullopt;
}

PreparedProgram::~PreparedProgram() {
  std::error_code ec;
  if (!dir_.empty()) fs::remove_all(dir_, ec);
}

ExecutionRecord PreparedProgram::run(const std::optional<std::string>& stdin_text, const ResourceLimits& limits) const {
  if (compile_failure_) return *compile_failure_;
  const fs::path run_dir = dir_ / ("run-" + std::to_string(runs_++));
  fs::create_directories(run_dir);
  ::chmod(run_dir.c_str(), 0777);
  SpawnSpec spec;
  spec.argv = argv_;
  spec.cwd = run_dir;
  spec.limits = limits;
  spec.fsize_bytes = limits.output_bytes;
  spec.stderr_cap = options_.stderr_bytes;
  spec.stdin_text = &stdin_text;
  auto rec = spawn_and_wait(spec);
  std::error_code ec;
  fs::remove_all(run_dir, ec);
  return rec;
}

Sandbox::Sandbox(SandboxOptions options) : options_(std::move(options)) {}

std::unique_ptr<PreparedProgram> Sandbox::prepare(const ProgramSource& program) const {
  const std::string& tool = program.language == CodeLanguage::python ? options_.python : options_.cxx;
  const auto tool_path = find_executable(tool);
  if (!tool_path) throw EnvironmentError("toolchain not found: " + tool);

  std::unique_ptr<PreparedProgram> prepared(new PreparedProgram());
  prepared->options_ = options_;
  prepared->dir_ = make_work_dir(options_.work_root);

  if (program.language == CodeLanguage::python) {
    const fs::path src = prepared->dir_ / "main.py";
    std::FILE* f = std::fopen(src.c_str(), "wb");
    if (!f) throw EnvironmentError("cannot write " + src.string());
    std::fwrite(program.source.data(), 1, program.source.size(), f);
    std::fclose(f);
    prepared->argv_ = {tool_path->string(), "-I", src.string()};
    return prepared;
  }

  const fs::path src = prepared->dir_ / "main.cpp";
  const fs::path bin = prepared->dir_ / "prog";
  {
    std::FILE* f = std::fopen(src.c_str(), "wb");
    if (!f) throw EnvironmentError("cannot write " + src.string());
    std::fwrite(program.source.data(), 1, program.source.size(), f);
    std::fclose(f);
  }
  SpawnSpec spec;
  spec.argv = {tool_path->string()};
  for (const auto& flag : options_.cxx_flags) spec.argv.push_back(flag);
  spec.argv.insert(spec.argv.end(), {"-o", bin.string(), src.string()});
  spec.cwd = prepared->dir_;
  spec.limits = options_.compile_limits;
  spec.fsize_bytes = kFileSizeForCompile;
  spec.stderr_cap = options_.stderr_bytes;
  const std::optional<std::string> no_input;
  spec.stdin_text = &no_input;
  auto rec = spawn_and_wait(spec);
  if (rec.status != ExecStatus::ok) {
    rec.status = ExecStatus::compile_error;
    prepared->compile_failure_ = std::move(rec);
  }
  prepared->argv_ = {bin.string()};
  return prepared;
}

ExecutionRecord run_sandboxed(const ProgramSource& program, const std::optional<std::string>& stdin_text,
                              const ResourceLimits& limits, const SandboxOptions& options) {
  return Sandbox(options).prepare(program)->run(stdin_text, limits);
}

}  // namespace rlpipe::reward

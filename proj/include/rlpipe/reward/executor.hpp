// Copyright (c) 2026, The rlpipe Authors
// SPDX-License-Identifier: Apache-2.0
//
// Where sandboxed programs actually run: in-process (LocalExecutor) or on a
// remote execution service speaking the JSON contract below.
//
//   POST /execute
//   request:  {"program": {"language", "source"}, "stdin": string|null, "limits": {...}}
//   response: ExecutionRecord as JSON (see to_json(ExecutionRecord))
//
// Transport failures surface as TransportError; missing toolchains as
// EnvironmentError. Neither is a program failure.

#pragma once

#include <condition_variable>
#include <cstddef>
#include <deque>
#include <functional>
#include <future>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "rlpipe/reward/sandbox.hpp"

namespace rlpipe::reward {

class Executor {
 public:
  virtual ~Executor() = default;

  // Runs `program` once per stdin entry. Records are index-aligned with
  // `stdins`; a failed C++ build yields compile_error records.
  virtual std::vector<ExecutionRecord> execute(const ProgramSource& program,
                                               const std::vector<std::optional<std::string>>& stdins,
                                               const ResourceLimits& limits) = 0;
};

class LocalExecutor final : public Executor {
 public:
  explicit LocalExecutor(SandboxOptions options = {}) : sandbox_(std::move(options)) {}

  std::vector<ExecutionRecord> execute(const ProgramSource& program, const std::vector<std::optional<std::string>>& stdins,
                                       const ResourceLimits& limits) override;

 private:
  Sandbox sandbox_;
};

class RemoteExecutor final : public Executor {
 public:
  // endpoint is "http://host:port"; the request path is /execute.
  explicit RemoteExecutor(std::string endpoint, double timeout_seconds = 120.0);

  std::vector<ExecutionRecord> execute(const ProgramSource& program, const std::vector<std::optional<std::string>>& stdins,
                                       const ResourceLimits& limits) override;

 private:
  std::string endpoint_;
  double timeout_seconds_;
};

// Server side of the contract: decodes one request and runs it locally.
Json handle_execute_request(const Json& request, Executor& executor);

// Fixed-size worker pool with a bounded submission queue. submit() blocks
// while the queue is full; try_submit() refuses instead.
class BoundedWorkerPool {
 public:
  BoundedWorkerPool(std::size_t workers, std::size_t queue_capacity);
  ~BoundedWorkerPool();
  BoundedWorkerPool(const BoundedWorkerPool&) = delete;
  BoundedWorkerPool& operator=(const BoundedWorkerPool&) = delete;

  template <typename F>
  auto submit(F&& fn) -> std::future<decltype(fn())>;

  template <typename F>
  auto try_submit(F&& fn) -> std::optional<std::future<decltype(fn())>>;

  std::size_t queued() const;
  std::size_t capacity() const { return capacity_; }

 private:
  bool enqueue(std::function<void()> task, bool block);
  void worker_loop();

  const std::size_t capacity_;
  mutable std::mutex mutex_;
  std::condition_variable not_empty_;
  std::condition_variable not_full_;
  std::deque<std::function<void()>> queue_;
  std::vector<std::thread> workers_;
  bool stopping_ = false;
};

template <typename F>
auto BoundedWorkerPool::submit(F&& fn) -> std::future<decltype(fn())> {
  using R = decltype(fn());
  auto task = std::make_shared<std::packaged_task<R()>>(std::forward<F>(fn));
  auto future = task->get_future();
  enqueue([task] { (*task)(); }, true);
  return future;
}

template <typename F>
auto BoundedWorkerPool::try_submit(F&& fn) -> std::optional<std::future<decltype(fn())>> {
  using R = decltype(fn());
  auto task = std::make_shared<std::packaged_task<R()>>(std::forward<F>(fn));
  auto future = task->get_future();
  if (!enqueue([task] { (*task)(); }, false)) return std::nullopt;
  return future;
}

}  // namespace rlpipe::reward

// Copyright (c) 2026, The rlpipe Authors
// SPDX-License-Identifier: Apache-2.0

#include "rlpipe/reward/executor.hpp"

#include <httplib.h>

#include "rlpipe/core/errors.hpp"

namespace rlpipe::reward {

std::vector<ExecutionRecord> LocalExecutor::execute(const ProgramSource& program,
                                                    const std::vector<std::optional<std::string>>& stdins,
                                                    const ResourceLimits& limits) {
  const auto prepared = sandbox_.prepare(program);
  std::vector<ExecutionRecord> out;
  out.reserve(stdins.size());
  for (const auto& in : stdins) out.push_back(prepared->run(in, limits));
  return out;
}

RemoteExecutor::RemoteExecutor(std::string endpoint, double timeout_seconds)
    : endpoint_(std::move(endpoint)), timeout_seconds_(timeout_seconds) {}

std::vector<ExecutionRecord> RemoteExecutor::execute(const ProgramSource& program,
                                                     const std::vector<std::optional<std::string>>& stdins,
                                                     const ResourceLimits& limits) {
  httplib::Client client(endpoint_);
  const auto secs = static_cast<time_t>(timeout_seconds_);
  client.set_read_timeout(secs, 0);
  client.set_write_timeout(secs, 0);
  client.set_connection_timeout(10, 0);
  std::vector<ExecutionRecord> out;
  for (const auto& in : stdins) {
    Json req{{"program", to_json(program)}, {"stdin", in ? Json(*in) : Json()}, {"limits", to_json(limits)}};
    auto res = client.Post("/execute", req.dump(), "application/json");
    if (!res) throw TransportError("sandbox endpoint " + endpoint_ + ": " + httplib::to_string(res.error()));
    if (res->status == 503) throw EnvironmentError("sandbox endpoint reports environment error: " + res->body);
    if (res->status != 200) throw TransportError("sandbox endpoint " + endpoint_ + " returned HTTP " + std::to_string(res->status));
    try {
      out.push_back(execution_record_from_json(Json::parse(res->body)));
    } catch (const std::exception& e) {
      throw TransportError(std::string("malformed sandbox response: ") + e.what());
    }
  }
  return out;
}

Json handle_execute_request(const Json& request, Executor& executor) {
  const auto program = program_from_json(request.at("program"));
  std::optional<std::string> in;
  if (request.contains("stdin") && !request["stdin"].is_null()) in = request["stdin"].get<std::string>();
  const auto limits = limits_from_json(request.value("limits", Json::object()));
  auto records = executor.execute(program, {in}, limits);
  return to_json(records.at(0));
}

BoundedWorkerPool::BoundedWorkerPool(std::size_t workers, std::size_t queue_capacity)
    : capacity_(std::max<std::size_t>(1, queue_capacity)) {
  if (workers == 0) workers = 1;
  workers_.reserve(workers);
  for (std::size_t i = 0; i < workers; ++i) workers_.emplace_back([this] { worker_loop(); });
}

BoundedWorkerPool::~BoundedWorkerPool() {
  {
    std::lock_guard lock(mutex_);
    stopping_ = true;
  }
  not_empty_.notify_all();
  not_full_.notify_all();
  for (auto& t : workers_) t.join();
}

std::size_t BoundedWorkerPool::queued() const {
  std::lock_guard lock(mutex_);
  return queue_.size();
}

bool BoundedWorkerPool::enqueue(std::function<void()> task, bool block) {
  std::unique_lock lock(mutex_);
  if (block) {
    not_full_.wait(lock, [this] { return stopping_ || queue_.size() < capacity_; });
  } else if (queue_.size() >= capacity_) {
    return false;
  }
  if (stopping_) throw Error("worker pool is shutting down");
  queue_.push_back(std::move(task));
  lock.unlock();
  not_empty_.notify_one();
  return true;
}

void BoundedWorkerPool::worker_loop() {
  for (;;) {
    std::function<void()> task;
    {
      std::unique_lock lock(mutex_);
      not_empty_.wait(lock, [this] { return stopping_ || !queue_.empty(); });
      if (queue_.empty()) return;
      task = std::move(queue_.front());
      queue_.pop_front();
    }
    not_full_.notify_one();
    task();
  }
}

}  // namespace rlpipe::reward

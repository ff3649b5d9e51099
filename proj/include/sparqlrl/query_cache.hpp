// Copyright 2026 The sparqlrl Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <future>
#include <mutex>
#include <semaphore>
#include <string>
#include <unordered_map>

#include "sparqlrl/endpoint.hpp"

namespace sparqlrl {

/// FNV-1a 64-bit hash of `text` as 16 lowercase hex digits.
std::string query_hash(std::string_view text);

/// Memoizes execution outcomes by normalized query text, failures included.
///
/// Thread-safe. Concurrent requests for the same key share one backend call;
/// at most `max_in_flight` backend calls run at once. A waiter on an
/// in-flight call counts as a hit.
class QueryCache {
 public:
  explicit QueryCache(std::ptrdiff_t max_in_flight = 8);
  ~QueryCache();

  QueryCache(const QueryCache&) = delete;
  QueryCache& operator=(const QueryCache&) = delete;

  ExecutionOutcome cached_execute(const std::string& query, ExecutionBackend& backend,
                                  Timeout timeout = std::nullopt);

  /// Loads records from `path` (if it exists) and appends every new outcome
  /// to it. One JSON object per line: {"hash", "query", "outcome"}.
  /// Throws std::runtime_error on unreadable or malformed files.
  void attach_file(const std::filesystem::path& path);

  /// Drops all entries and truncates the attached file, if any.
  void clear();

  std::uint64_t hits() const;
  std::uint64_t misses() const;
  std::size_t size() const;

 private:
  void persist(const std::string& key, const ExecutionOutcome& outcome);

  mutable std::mutex mutex_;
  std::unordered_map<std::string, std::shared_future<ExecutionOutcome>> entries_;
  std::uint64_t hits_ = 0;
  std::uint64_t misses_ = 0;
  std::counting_semaphore<> in_flight_;

  std::mutex file_mutex_;
  std::filesystem::path path_;
  std::ofstream file_;
};

}  // namespace sparqlrl

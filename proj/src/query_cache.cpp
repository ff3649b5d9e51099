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

#include "sparqlrl/query_cache.hpp"

#include <cstdio>

#include "sparqlrl/json_io.hpp"
#include "sparqlrl/sparql/normalize.hpp"

namespace sparqlrl {

std::string query_hash(std::string_view text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

QueryCache::QueryCache(std::ptrdiff_t max_in_flight) : in_flight_(max_in_flight) {
  if (max_in_flight < 1) throw std::invalid_argument("max_in_flight must be positive");
}

QueryCache::~QueryCache() = default;

ExecutionOutcome QueryCache::cached_execute(const std::string& query, ExecutionBackend& backend,
                                            Timeout timeout) {
  const std::string key = sparql::normalize(query);
  std::promise<ExecutionOutcome> promise;
  std::unique_lock lock(mutex_);
  if (auto it = entries_.find(key); it != entries_.end()) {
    ++hits_;
    auto future = it->second;
    lock.unlock();
    return future.get();
  }
  ++misses_;
  entries_.emplace(key, promise.get_future().share());
  lock.unlock();

  ExecutionOutcome outcome;
  in_flight_.acquire();
  try {
    outcome = backend.execute(query, timeout);
  } catch (const std::exception& e) {
    outcome = ExecutionOutcome::failure(ExecutionStatus::EndpointError, e.what());
  }
  in_flight_.release();
  promise.set_value(outcome);
  persist(key, outcome);
  return outcome;
}

void QueryCache::persist(const std::string& key, const ExecutionOutcome& outcome) {
  std::lock_guard lock(file_mutex_);
  if (!file_.is_open()) return;
  nlohmann::json record{{"hash", query_hash(key)}, {"query", key},
                        {"outcome", outcome_to_json(outcome)}};
  file_ << record.dump() << '\n';
  file_.flush();
}

void QueryCache::attach_file(const std::filesystem::path& path) {
  std::lock_guard file_lock(file_mutex_);
  if (std::filesystem::exists(path)) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read cache file " + path.string());
    std::string line;
    std::size_t number = 0;
    std::lock_guard lock(mutex_);
    while (std::getline(in, line)) {
      ++number;
      if (line.empty()) continue;
      try {
        auto record = nlohmann::json::parse(line);
        std::string key = record.at("query").get<std::string>();
        if (record.at("hash").get<std::string>() != query_hash(key)) {
          throw std::invalid_argument("hash mismatch");
        }
        std::promise<ExecutionOutcome> p;
        p.set_value(outcome_from_json(record.at("outcome")));
        entries_.insert_or_assign(std::move(key), p.get_future().share());
      } catch (const std::exception& e) {
        throw std::runtime_error("cache file " + path.string() + " line " +
                                 std::to_string(number) + ": " + e.what());
      }
    }
  }
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  file_.close();
  file_.open(path, std::ios::app);
  if (!file_) throw std::runtime_error("cannot open cache file " + path.string());
  path_ = path;
}

void QueryCache::clear() {
  std::scoped_lock lock(mutex_, file_mutex_);
  entries_.clear();
  hits_ = 0;
  misses_ = 0;
  if (file_.is_open()) {
    file_.close();
    file_.open(path_, std::ios::trunc);
  }
}

std::uint64_t QueryCache::hits() const {
  std::lock_guard lock(mutex_);
  return hits_;
}

std::uint64_t QueryCache::misses() const {
  std::lock_guard lock(mutex_);
  return misses_;
}

std::size_t QueryCache::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

}  // namespace sparqlrl

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

#include <chrono>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "sparqlrl/answer_set.hpp"
#include "sparqlrl/sparql/triple_store.hpp"

namespace sparqlrl {

enum class ExecutionStatus : std::uint8_t { Ok, ParseOrSyntaxError, EndpointError, Timeout };

std::string to_string(ExecutionStatus status);
/// Throws std::invalid_argument for unknown names.
ExecutionStatus execution_status_from_string(std::string_view name);

/// Result of running one query. `answers` is present iff status is Ok;
/// failures carry a non-empty message.
struct ExecutionOutcome {
  ExecutionStatus status = ExecutionStatus::EndpointError;
  std::optional<AnswerSet> answers;
  std::string message;

  static ExecutionOutcome success(AnswerSet answers);
  static ExecutionOutcome failure(ExecutionStatus status, std::string message);

  bool ok() const { return status == ExecutionStatus::Ok; }

  friend bool operator==(const ExecutionOutcome&, const ExecutionOutcome&) = default;
};

using Timeout = std::optional<std::chrono::milliseconds>;

/// Raised by check_available() when a backend cannot serve queries at all.
class BackendUnavailable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Something that executes SPARQL text. execute() never throws: every failure
/// is reported through the outcome status.
class ExecutionBackend {
 public:
  virtual ~ExecutionBackend() = default;

  virtual ExecutionOutcome execute(const std::string& query, Timeout timeout) = 0;
  virtual void check_available() = 0;
  virtual std::string describe() const = 0;
};

/// Parses and evaluates locally against an immutable store. Timeouts are
/// ignored.
class EmbeddedBackend : public ExecutionBackend {
 public:
  explicit EmbeddedBackend(std::shared_ptr<const sparql::TripleStore> store);

  ExecutionOutcome execute(const std::string& query, Timeout timeout) override;
  void check_available() override {}
  std::string describe() const override;

 private:
  std::shared_ptr<const sparql::TripleStore> store_;
};

/// SPARQL Protocol client. Queries are POSTed as the `query` form parameter
/// with Accept: application/sparql-results+json.
///
/// HTTP 400 maps to ParseOrSyntaxError, any other non-2xx status or transport
/// failure to EndpointError, and an expired deadline to Timeout. A one-column,
/// one-row result of a query whose projection is a COUNT aggregate is
/// returned as a Count answer.
class RemoteBackend : public ExecutionBackend {
 public:
  /// `url` is `http://host[:port]/path`. Throws std::invalid_argument for
  /// other schemes or malformed URLs.
  explicit RemoteBackend(const std::string& url,
                         std::chrono::milliseconds default_timeout = std::chrono::seconds(30));

  ExecutionOutcome execute(const std::string& query, Timeout timeout) override;
  /// Sends `ASK {}` and throws BackendUnavailable unless it succeeds.
  void check_available() override;
  std::string describe() const override { return url_; }

 private:
  std::string url_;
  std::string host_;
  int port_ = 80;
  std::string path_;
  std::chrono::milliseconds default_timeout_;
};

/// Malformed SPARQL results document.
class ResultsFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses application/sparql-results+json. A "boolean" member gives a
/// Boolean answer; otherwise tuples follow head.vars order and use each
/// binding's "value", with "" for variables missing from a row.
AnswerSet parse_results_json(std::string_view body);

}  // namespace sparqlrl

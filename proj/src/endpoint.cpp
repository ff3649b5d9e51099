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

#include "sparqlrl/endpoint.hpp"

#include <httplib.h>

#include <charconv>

#include "json.hpp"
#include "sparqlrl/sparql/evaluator.hpp"
#include "sparqlrl/sparql/parser.hpp"

namespace sparqlrl {

std::string to_string(ExecutionStatus status) {
  switch (status) {
    case ExecutionStatus::Ok: return "ok";
    case ExecutionStatus::ParseOrSyntaxError: return "parse_or_syntax_error";
    case ExecutionStatus::EndpointError: return "endpoint_error";
    case ExecutionStatus::Timeout: return "timeout";
  }
  return "unknown";
}

ExecutionStatus execution_status_from_string(std::string_view name) {
  for (auto s : {ExecutionStatus::Ok, ExecutionStatus::ParseOrSyntaxError,
                 ExecutionStatus::EndpointError, ExecutionStatus::Timeout}) {
    if (to_string(s) == name) return s;
  }
  throw std::invalid_argument("unknown execution status '" + std::string(name) + "'");
}

ExecutionOutcome ExecutionOutcome::success(AnswerSet answers) {
  return ExecutionOutcome{ExecutionStatus::Ok, std::move(answers), ""};
}

ExecutionOutcome ExecutionOutcome::failure(ExecutionStatus status, std::string message) {
  if (status == ExecutionStatus::Ok) throw std::invalid_argument("failure with Ok status");
  if (message.empty()) message = to_string(status);
  return ExecutionOutcome{status, std::nullopt, std::move(message)};
}

EmbeddedBackend::EmbeddedBackend(std::shared_ptr<const sparql::TripleStore> store)
    : store_(std::move(store)) {
  if (!store_) throw std::invalid_argument("EmbeddedBackend needs a store");
}

ExecutionOutcome EmbeddedBackend::execute(const std::string& query, Timeout) {
  try {
    return ExecutionOutcome::success(sparql::evaluate(sparql::parse(query), *store_));
  } catch (const sparql::ParseError& e) {
    return ExecutionOutcome::failure(ExecutionStatus::ParseOrSyntaxError, e.what());
  } catch (const sparql::EvaluationError& e) {
    return ExecutionOutcome::failure(ExecutionStatus::ParseOrSyntaxError, e.what());
  } catch (const std::exception& e) {
    return ExecutionOutcome::failure(ExecutionStatus::EndpointError, e.what());
  }
}

std::string EmbeddedBackend::describe() const {
  return "embedded store (" + std::to_string(store_->size()) + " triples)";
}

namespace {

std::string excerpt(const std::string& body, std::size_t limit = 200) {
  if (body.size() <= limit) return body;
  return body.substr(0, limit) + "...";
}

bool is_count_query(const std::string& query) {
  try {
    return sparql::parse(query).is_count();
  } catch (const std::exception&) {
    return false;
  }
}

}  // namespace

RemoteBackend::RemoteBackend(const std::string& url, std::chrono::milliseconds default_timeout)
    : url_(url), default_timeout_(default_timeout) {
  const std::string scheme = "http://";
  if (url.rfind(scheme, 0) != 0) {
    throw std::invalid_argument("endpoint URL must start with http://: " + url);
  }
  const std::string rest = url.substr(scheme.size());
  const auto slash = rest.find('/');
  std::string authority = rest.substr(0, slash);
  path_ = slash == std::string::npos ? "/" : rest.substr(slash);
  if (const auto colon = authority.rfind(':'); colon != std::string::npos) {
    const std::string port = authority.substr(colon + 1);
    auto [ptr, ec] = std::from_chars(port.data(), port.data() + port.size(), port_);
    if (ec != std::errc() || ptr != port.data() + port.size() || port_ <= 0 || port_ > 65535) {
      throw std::invalid_argument("bad port in endpoint URL: " + url);
    }
    authority = authority.substr(0, colon);
  }
  if (authority.empty()) throw std::invalid_argument("missing host in endpoint URL: " + url);
  host_ = authority;
}

ExecutionOutcome RemoteBackend::execute(const std::string& query, Timeout timeout) {
  const auto limit = timeout.value_or(default_timeout_);
  try {
    httplib::Client client(host_, port_);
    const auto sec = std::chrono::duration_cast<std::chrono::seconds>(limit);
    const auto usec = std::chrono::duration_cast<std::chrono::microseconds>(limit - sec);
    client.set_connection_timeout(sec.count(), usec.count());
    client.set_read_timeout(sec.count(), usec.count());
    client.set_write_timeout(sec.count(), usec.count());

    const auto start = std::chrono::steady_clock::now();
    httplib::Headers headers{{"Accept", "application/sparql-results+json"}};
    httplib::Params params{{"query", query}};
    auto res = client.Post(path_, headers, params);
    const auto elapsed = std::chrono::steady_clock::now() - start;

    if (!res) {
      const auto err = res.error();
      if (err == httplib::Error::ConnectionTimeout ||
          (err == httplib::Error::Read && elapsed >= limit)) {
        return ExecutionOutcome::failure(ExecutionStatus::Timeout,
                                         "no response within " + std::to_string(limit.count()) +
                                             " ms");
      }
      return ExecutionOutcome::failure(ExecutionStatus::EndpointError,
                                       "transport error: " + httplib::to_string(err));
    }
    if (res->status == 400) {
      return ExecutionOutcome::failure(ExecutionStatus::ParseOrSyntaxError,
                                       "HTTP 400: " + excerpt(res->body));
    }
    if (res->status < 200 || res->status >= 300) {
      return ExecutionOutcome::failure(
          ExecutionStatus::EndpointError,
          "HTTP " + std::to_string(res->status) + ": " + excerpt(res->body));
    }
    AnswerSet answers = parse_results_json(res->body);
    if (answers.kind() == AnswerKind::Bindings && answers.bindings().vars.size() == 1 &&
        answers.bindings().tuples.size() == 1 && is_count_query(query)) {
      const std::string& cell = answers.bindings().tuples.begin()->front();
      std::uint64_t n = 0;
      auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), n);
      if (ec == std::errc() && ptr == cell.data() + cell.size()) answers = AnswerSet::count(n);
    }
    return ExecutionOutcome::success(std::move(answers));
  } catch (const ResultsFormatError& e) {
    return ExecutionOutcome::failure(ExecutionStatus::EndpointError, e.what());
  } catch (const std::exception& e) {
    return ExecutionOutcome::failure(ExecutionStatus::EndpointError, e.what());
  }
}

void RemoteBackend::check_available() {
  auto outcome = execute("ASK { }", std::nullopt);
  if (!outcome.ok()) {
    throw BackendUnavailable("endpoint " + url_ + " unavailable: " + outcome.message);
  }
}

AnswerSet parse_results_json(std::string_view body) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(body);
  } catch (const nlohmann::json::parse_error& e) {
    throw ResultsFormatError(std::string("results are not JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ResultsFormatError("results document is not an object");
  if (auto it = doc.find("boolean"); it != doc.end()) {
    if (!it->is_boolean()) throw ResultsFormatError("'boolean' is not a boolean");
    return AnswerSet::boolean(it->get<bool>());
  }
  try {
    std::vector<std::string> vars = doc.at("head").at("vars").get<std::vector<std::string>>();
    std::set<AnswerTuple> tuples;
    for (const auto& row : doc.at("results").at("bindings")) {
      AnswerTuple tuple;
      tuple.reserve(vars.size());
      for (const auto& v : vars) {
        auto cell = row.find(v);
        tuple.push_back(cell == row.end() ? std::string() : cell->at("value").get<std::string>());
      }
      tuples.insert(std::move(tuple));
    }
    return AnswerSet::bindings(std::move(vars), std::move(tuples));
  } catch (const nlohmann::json::exception& e) {
    throw ResultsFormatError(std::string("malformed results document: ") + e.what());
  }
}

}  // namespace sparqlrl

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

#include "sparqlrl/optimizer.hpp"

#include <cmath>
#include <stdexcept>

namespace sparqlrl {

void AdamWConfig::validate() const {
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0)) throw std::invalid_argument("beta1 must be in [0, 1)");
  if (!(beta2 >= 0.0 && beta2 < 1.0)) throw std::invalid_argument("beta2 must be in [0, 1)");
  if (!(epsilon > 0.0)) throw std::invalid_argument("optimizer epsilon must be positive");
  if (!(weight_decay >= 0.0)) throw std::invalid_argument("weight_decay must be non-negative");
}

nlohmann::json adamw_config_to_json(const AdamWConfig& c) {
  return {{"learning_rate", c.learning_rate}, {"beta1", c.beta1},
          {"beta2", c.beta2},                 {"epsilon", c.epsilon},
          {"weight_decay", c.weight_decay},   {"linear_schedule", c.linear_schedule}};
}

AdamWConfig adamw_config_from_json(const nlohmann::json& j) {
  AdamWConfig c;
  for (const auto& [key, value] : j.items()) {
    if (key == "learning_rate") {
      c.learning_rate = value.get<double>();
    } else if (key == "beta1") {
      c.beta1 = value.get<double>();
    } else if (key == "beta2") {
      c.beta2 = value.get<double>();
    } else if (key == "epsilon") {
      c.epsilon = value.get<double>();
    } else if (key == "weight_decay") {
      c.weight_decay = value.get<double>();
    } else if (key == "linear_schedule") {
      c.linear_schedule = value.get<bool>();
    } else {
      throw std::invalid_argument("unknown optimizer key '" + key + "'");
    }
  }
  return c;
}

double scheduled_learning_rate(const AdamWConfig& config, std::int64_t step,
                               std::int64_t total_steps) {
  if (!config.linear_schedule || total_steps <= 0) return config.learning_rate;
  const double remaining =
      static_cast<double>(total_steps - step) / static_cast<double>(total_steps);
  return config.learning_rate * std::max(0.0, remaining);
}

AdamW::AdamW(std::size_t size, AdamWConfig config)
    : config_(config), m_(size, 0.0), v_(size, 0.0) {
  config_.validate();
}

void AdamW::ascend(std::span<double> params, std::span<const double> grad, double lr) {
  if (params.size() != m_.size() || grad.size() != m_.size()) {
    throw std::invalid_argument("optimizer state size mismatch");
  }
  ++t_;
  const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = config_.beta1 * m_[i] + (1.0 - config_.beta1) * grad[i];
    v_[i] = config_.beta2 * v_[i] + (1.0 - config_.beta2) * grad[i] * grad[i];
    if (m_[i] == 0.0 && config_.weight_decay == 0.0) continue;
    const double update = (m_[i] / c1) / (std::sqrt(v_[i] / c2) + config_.epsilon);
    params[i] += lr * (update - config_.weight_decay * params[i]);
  }
}

nlohmann::json AdamW::state_to_json() const {
  nlohmann::json m = nlohmann::json::array(), v = nlohmann::json::array();
  for (std::size_t i = 0; i < m_.size(); ++i) {
    if (m_[i] != 0.0 || v_[i] != 0.0) {
      m.push_back({i, m_[i]});
      v.push_back({i, v_[i]});
    }
  }
  return {{"size", m_.size()}, {"t", t_}, {"m", m}, {"v", v}};
}

void AdamW::load_state(const nlohmann::json& j) {
  if (j.at("size").get<std::size_t>() != m_.size()) {
    throw std::invalid_argument("optimizer state size mismatch");
  }
  std::fill(m_.begin(), m_.end(), 0.0);
  std::fill(v_.begin(), v_.end(), 0.0);
  for (const auto& e : j.at("m")) m_.at(e.at(0).get<std::size_t>()) = e.at(1).get<double>();
  for (const auto& e : j.at("v")) v_.at(e.at(0).get<std::size_t>()) = e.at(1).get<double>();
  t_ = j.at("t").get<std::int64_t>();
}

}  // namespace sparqlrl

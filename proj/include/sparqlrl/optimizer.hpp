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
#include <span>
#include <vector>

#include "json.hpp"

namespace sparqlrl {

struct AdamWConfig {
  double learning_rate = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0.0;
  /// Decay the learning rate linearly to zero over the planned steps.
  bool linear_schedule = false;

  void validate() const;
};

nlohmann::json adamw_config_to_json(const AdamWConfig& c);
/// Missing keys keep their defaults; unknown keys are rejected.
AdamWConfig adamw_config_from_json(const nlohmann::json& j);

/// Learning rate for the given 0-based step out of `total_steps`.
double scheduled_learning_rate(const AdamWConfig& config, std::int64_t step,
                               std::int64_t total_steps);

/// Bias-corrected Adam with decoupled weight decay, in ascent form
/// (parameters move along the gradient).
class AdamW {
 public:
  AdamW(std::size_t size, AdamWConfig config);

  /// One ascent step with learning rate `lr`.
  void ascend(std::span<double> params, std::span<const double> grad, double lr);

  std::int64_t steps() const { return t_; }
  const AdamWConfig& config() const { return config_; }

  nlohmann::json state_to_json() const;
  void load_state(const nlohmann::json& j);

 private:
  AdamWConfig config_;
  std::vector<double> m_;
  std::vector<double> v_;
  std::int64_t t_ = 0;
};

}  // namespace sparqlrl

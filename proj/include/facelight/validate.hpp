// Copyright 2026 The Facelight Authors
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
#include <string>
#include <vector>

namespace facelight {

/// One oracle comparison. For bound checks `reference` holds the bound.
struct ValidationRow {
  std::string test;
  std::string parameter;
  double estimate = 0.0;
  double std_error = 0.0;
  double reference = 0.0;
  double rel_error = 0.0;
  bool pass = true;
};

struct ValidationOptions {
  int threads = 1;
  std::uint64_t seed = 20260;
};

/// Suite names accepted by run_validation, excluding "all".
const std::vector<std::string>& validation_suites();

/// Runs one suite or "all"; throws DomainError for unknown names.
std::vector<ValidationRow> run_validation(const std::string& suite, const ValidationOptions& options = {});

/// Diffuse shading against the hemisphere oracle over random configurations.
/// Returns estimate = relative RMSE of shade() vs Monte Carlo.
ValidationRow validate_diffuse(int configurations, std::size_t samples, const ValidationOptions& options = {});

bool all_passed(const std::vector<ValidationRow>& rows);

/// CSV with columns test, parameter, estimate, std_error, reference, rel_error.
void write_validation_csv(const std::string& path, const std::vector<ValidationRow>& rows);

}  // namespace facelight

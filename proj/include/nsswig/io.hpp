// Copyright 2026 The nsswig Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef NSSWIG_IO_HPP
#define NSSWIG_IO_HPP

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include <nsswig/engine.hpp>

namespace nsswig {

/// Column names for the stored parameters: psi names followed by theta_<j>[_<a>].
std::vector<std::string> param_names(const ModelDims& dims, const std::vector<std::string>& psi_names = {});

/// Dead-point table: `# iteration log_like log_x log_weight <params...>`; thinned rows have four columns.
void write_dead_points(const std::filesystem::path& path, const RunResult& run,
                       const std::vector<std::string>& psi_names = {});

struct DeadTable {
  std::vector<std::string> columns;
  std::vector<DeadRecord> rows;
};

DeadTable read_dead_points(const std::filesystem::path& path);

/// Summary document. Wall time is kept out so repeated runs produce identical bytes.
nlohmann::ordered_json run_summary(const RunResult& run);
void write_summary(const std::filesystem::path& path, const RunResult& run);
void write_timing(const std::filesystem::path& path, const RunResult& run);

nlohmann::ordered_json read_json(const std::filesystem::path& path);

}  // namespace nsswig

#endif  // NSSWIG_IO_HPP

// Copyright 2026 The racqp Authors
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

#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "racqp/admm.hpp"
#include "racqp/mip.hpp"

namespace racqp::cli {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitLimit = 2;

const char* version() noexcept;

/// Runs the command line `args` (program name first). Results go to files or `out`;
/// diagnostics to `err`. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

nlohmann::json to_json(const SolverOptions& options);
nlohmann::json to_json(const MipOptions& options);
nlohmann::json to_json(const Residuals& residuals);

}  // namespace racqp::cli

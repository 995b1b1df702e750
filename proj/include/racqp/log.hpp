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

#include <string>

namespace racqp {

enum class LogLevel { error = 0, warn = 1, info = 2, debug = 3 };

/// Threshold read once from RACQP_LOG (error|warn|info|debug); warn when unset.
LogLevel log_level();
void set_log_level(LogLevel level);
void log_message(LogLevel level, const std::string& text);

inline void log_error(const std::string& text) { log_message(LogLevel::error, text); }
inline void log_warn(const std::string& text) { log_message(LogLevel::warn, text); }
inline void log_info(const std::string& text) { log_message(LogLevel::info, text); }
inline void log_debug(const std::string& text) { log_message(LogLevel::debug, text); }

}  // namespace racqp

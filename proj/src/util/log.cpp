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

#include "racqp/log.hpp"

#include <cstdlib>
#include <memory>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

namespace racqp {

namespace {

LogLevel parse_env() {
  const char* env = std::getenv("RACQP_LOG");
  if (env == nullptr) return LogLevel::warn;
  const std::string v(env);
  if (v == "error") return LogLevel::error;
  if (v == "info") return LogLevel::info;
  if (v == "debug") return LogLevel::debug;
  return LogLevel::warn;
}

spdlog::level::level_enum to_spdlog(LogLevel level) {
  switch (level) {
    case LogLevel::error: return spdlog::level::err;
    case LogLevel::warn: return spdlog::level::warn;
    case LogLevel::info: return spdlog::level::info;
    case LogLevel::debug: return spdlog::level::debug;
  }
  return spdlog::level::warn;
}

spdlog::logger& logger() {
  static const std::shared_ptr<spdlog::logger> instance = [] {
    auto l = spdlog::stderr_color_mt("racqp");
    l->set_pattern("[%n %l] %v");
    l->set_level(to_spdlog(parse_env()));
    return l;
  }();
  return *instance;
}

}  // namespace

LogLevel log_level() {
  switch (logger().level()) {
    case spdlog::level::err: return LogLevel::error;
    case spdlog::level::info: return LogLevel::info;
    case spdlog::level::debug:
    case spdlog::level::trace: return LogLevel::debug;
    default: return LogLevel::warn;
  }
}

void set_log_level(LogLevel level) { logger().set_level(to_spdlog(level)); }

void log_message(LogLevel level, const std::string& text) { logger().log(to_spdlog(level), text); }

}  // namespace racqp

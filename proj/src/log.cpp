#include "iarpm/log.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>

#include <cstdlib>
#include <string>

namespace iarpm {

spdlog::logger& logger() {
  static const std::shared_ptr<spdlog::logger> instance = [] {
    auto l = spdlog::stderr_color_mt("iarpm");
    l->set_level(spdlog::level::warn);
    l->set_pattern("[%l] %v");
    return l;
  }();
  return *instance;
}

void configure_logging_from_env() {
  const char* env = std::getenv("RPM_LOG_LEVEL");
  if (env == nullptr) return;
  const std::string level(env);
  if (level == "error") {
    logger().set_level(spdlog::level::err);
  } else if (level == "warn") {
    logger().set_level(spdlog::level::warn);
  } else if (level == "info") {
    logger().set_level(spdlog::level::info);
  } else if (level == "debug") {
    logger().set_level(spdlog::level::debug);
  } else {
    logger().warn("ignoring unknown RPM_LOG_LEVEL '{}'", level);
  }
}

}  // namespace iarpm

#pragma once

#include <spdlog/spdlog.h>

namespace iarpm {

/// Logger shared by the library and tools, writing to stderr.
spdlog::logger& logger();

/// Applies RPM_LOG_LEVEL (error, warn, info, debug); defaults to warn.
void configure_logging_from_env();

}  // namespace iarpm

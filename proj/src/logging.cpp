#include "liftguard/logging.hpp"

#include <cstdlib>
#include <string>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

namespace liftguard {

void init_logging() {
  auto logger = spdlog::get("liftguard");
  if (!logger) logger = spdlog::stderr_color_mt("liftguard");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");

  spdlog::level::level_enum level = spdlog::level::warn;
  if (const char* env = std::getenv("LIFTGUARD_LOG")) {
    const auto parsed = spdlog::level::from_str(env);
    // from_str maps unknown names to off; only honour "off" when asked for.
    if (parsed != spdlog::level::off || std::string(env) == "off") level = parsed;
  }
  spdlog::set_level(level);
}

}  // namespace liftguard

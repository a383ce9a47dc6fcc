#include "bisar/log.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <mutex>

namespace bisar {

namespace {

std::shared_ptr<spdlog::logger>& logger() {
  static std::shared_ptr<spdlog::logger> lg;
  static std::once_flag once;
  std::call_once(once, [] {
    lg = spdlog::stderr_color_mt("bisar");
    lg->set_pattern("[%l] %v");
    spdlog::level::level_enum lvl = spdlog::level::warn;
    if (const char* env = std::getenv("BISAR_LOG")) lvl = spdlog::level::from_str(env);
    lg->set_level(lvl);
  });
  return lg;
}

}  // namespace

void init_logging() { (void)logger(); }

bool trace_enabled() { return logger()->should_log(spdlog::level::trace); }
void log_trace(const std::string& msg) { logger()->trace(msg); }
void log_debug(const std::string& msg) { logger()->debug(msg); }
void log_info(const std::string& msg) { logger()->info(msg); }
void log_warn(const std::string& msg) { logger()->warn(msg); }
void log_error(const std::string& msg) { logger()->error(msg); }

}  // namespace bisar

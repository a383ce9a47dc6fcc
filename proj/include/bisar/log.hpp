#pragma once

#include <string>

namespace bisar {

// Level comes from BISAR_LOG (trace, debug, info, warn, error, off);
// default warn. Output goes to stderr.
void init_logging();

bool trace_enabled();
void log_trace(const std::string& msg);
void log_debug(const std::string& msg);
void log_info(const std::string& msg);
void log_warn(const std::string& msg);
void log_error(const std::string& msg);

}  // namespace bisar

#pragma once

#include <string>
#include <string_view>

namespace facelve::detail {

struct ProcessResult {
  int exit_status = -1;
  bool timed_out = false;
  std::string output;
};

/// Runs `command` through /bin/sh, feeding `input` on stdin and collecting
/// stdout until exit. The child is killed if it outlives `timeout_ms`.
ProcessResult run_process(const std::string& command, std::string_view input, int timeout_ms);

}  // namespace facelve::detail

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace wctt::cli {

/// Process exit statuses.
enum ExitStatus : int {
  ok = 0,
  classic_unschedulable = 1,  // the tight bound accepts the set, the classic one does not
  unschedulable = 2,          // neither bound accepts the set
  input_error = 3,
  model_error = 4,  // the simulator left its supported model (e.g. out of VCs)
};

/// Environment variable naming the default output directory.
inline constexpr const char* out_dir_env = "WCTT_OUT_DIR";

/// Parses `args` (without the program name) and runs the selected command.
/// Tables go to files; summaries and diagnostics to `out` / `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace wctt::cli

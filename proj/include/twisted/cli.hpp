#pragma once

// Subcommands behind the twisted executable. Each takes the arguments after
// the subcommand name and returns the process exit code.

#include <iosfwd>
#include <string>
#include <vector>

namespace twisted::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kFailure = 2,
  kNotConverged = 3,
};

/// Overrides SumOptions::direct_cap for every subcommand.
inline constexpr const char* kDirectCapEnv = "TWISTED_DIRECT_CAP";

int cmd_construct(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int cmd_verify(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int cmd_scan(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int cmd_demo967(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Dispatches on args[0].
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace twisted::cli

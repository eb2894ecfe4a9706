#pragma once

#include <string>
#include <vector>

namespace ringml {

/// Runs the command-line tool. Exit codes: 0 success, 2 usage error,
/// 3 data error, 4 numeric failure.
int cli_run(const std::vector<std::string>& args);
int cli_run(int argc, char** argv);

}  // namespace ringml

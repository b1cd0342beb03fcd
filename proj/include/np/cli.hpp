#ifndef NP_CLI_HPP
#define NP_CLI_HPP

#include <string>
#include <vector>

namespace np {

/// Entry point of the command-line tool. Exit codes:
///   0 ok, 1 usage, 2 data, 3 guarantee infeasible, 4 theory mismatch.
int run_cli(const std::vector<std::string>& args);

}  // namespace np

#endif  // NP_CLI_HPP

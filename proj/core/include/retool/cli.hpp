#ifndef RETOOL_CLI_HPP
#define RETOOL_CLI_HPP

#include <string>
#include <vector>

namespace retool {
namespace cli {

/// Runs one CLI invocation.  Exit codes: 0 success, 1 usage or runtime
/// error, 2 hypothesis-check failure (the report names the hypothesis).
int run(const std::vector<std::string>& args);
int run(int argc, char** argv);

}  // namespace cli
}  // namespace retool

#endif

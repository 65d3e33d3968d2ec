#ifndef BES_CLI_HPP
#define BES_CLI_HPP

#include <ostream>
#include <string>
#include <vector>

namespace bes {

// Exit codes: 0 success / judgment true, 1 judgment false / proof rejected,
// 2 input or usage error, 3 internal invariant violation.
int cli_run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bes

#endif

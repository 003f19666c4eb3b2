#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dyadic {

// Exit codes: 0 ok, 1 check failure, 2 usage or input error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dyadic

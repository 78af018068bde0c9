#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "aiq/time.hpp"

namespace aiq {

struct CliEnv {
  std::istream& in;
  std::ostream& out;
  std::ostream& err;
  Clock* clock = nullptr;  // system clock when null
};

// args excludes the program name. Exit codes: 0 success, 1 domain error,
// 2 usage error.
int cli_dispatch(const std::vector<std::string>& args, CliEnv env);

}  // namespace aiq

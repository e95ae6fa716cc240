#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace spdekit {

/// Exit codes: 0 success, 1 usage or input error, 2 numerical or
/// degenerate-data error.
int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int cli_dispatch(int argc, const char* const* argv);

}  // namespace spdekit

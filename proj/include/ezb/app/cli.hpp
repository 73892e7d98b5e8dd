#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ezb::app {

// Entry point behind the `ezblender` binary. Returns the process exit code.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace ezb::app

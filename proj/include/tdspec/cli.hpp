#pragma once

#include <iostream>
#include <string>
#include <vector>

namespace tdspec {

// Placeholder front door; filled in once the pipeline modules exist.
inline int run_command(const std::vector<std::string>& args, std::ostream& out,
                       std::ostream& err) {
  (void)args;
  (void)out;
  err << "tdspec: not yet wired\n";
  return 2;
}

}  // namespace tdspec

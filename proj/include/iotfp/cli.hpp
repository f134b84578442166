#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace iotfp::cli {

enum ExitCode : int {
  kOk = 0,
  kConfigError = 2,
  kDataError = 3,
};

// Runs one command line (args excludes the program name). Regular output goes
// to `out`; failures print one line to `err` of the form
//   error: kind=<kind> <message>
// and return kConfigError or kDataError.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace iotfp::cli

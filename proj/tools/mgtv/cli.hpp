#pragma once

#include <iosfwd>

namespace mgtv::cli {

enum ExitCode : int {
  kOk = 0,
  kToleranceExceeded = 1,  // compare only
  kInputError = 2,
  kSolverFailure = 3,
  kNotExtinct = 4,
};

int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

}  // namespace mgtv::cli

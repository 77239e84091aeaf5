#pragma once

#include <iosfwd>

namespace qspec::cli {

enum ExitCode : int {
    kOk = 0,
    kCheckFailed = 1,  // verify: some identity above its threshold
    kClassW = 2,
    kConfig = 64,
    kNoInput = 66,
    kNumerical = 70,
    kCantCreate = 73,
};

// Entry point of the qspec binary. Reports go to `out` as JSON, progress to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qspec::cli

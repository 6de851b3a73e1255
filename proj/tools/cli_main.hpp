#pragma once

namespace sirf {

// Full command line surface; returns the process exit code (0 success,
// 2 usage error, 1 runtime error).  argv[0] is the program name.
int cli_main(int argc, const char* const* argv);

}  // namespace sirf

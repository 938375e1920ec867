#pragma once

namespace bandana::cli {

/// Entry point of the `bandana` tool. Returns the process exit code.
int run(int argc, char** argv);

}  // namespace bandana::cli

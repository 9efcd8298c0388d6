#pragma once

namespace bitefuse {

// Full command-line entry point; returns the process exit code
// (0 ok, 2 parse, 3 validation, 4 config, 5 internal).
int run_cli(int argc, const char* const* argv);

}  // namespace bitefuse

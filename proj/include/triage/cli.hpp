#pragma once

namespace triage {

// Parses argv and runs one subcommand. Returns 0 on success, 1 on usage or
// validation errors, 2 on internal errors.
int run_cli(int argc, const char* const* argv);

} // namespace triage

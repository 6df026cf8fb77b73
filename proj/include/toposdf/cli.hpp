#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace toposdf {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitIo = 2;

/// Subcommands: reconstruct, mesh, eval, diagram, verify, generate.
/// `args` excludes the program name.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int cli_main(int argc, char** argv);

}  // namespace toposdf

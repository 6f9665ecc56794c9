#ifndef FARVA_CLI_HPP
#define FARVA_CLI_HPP

/// Command-line front end: simulate, train, predict, evaluate, benchmark.
/// Exit codes are 0 on success, 1 for usage errors and 2 for runtime errors;
/// failures print one diagnostic line to `err`.

#include <iosfwd>
#include <string>
#include <vector>

namespace farva {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

/// `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace farva

#endif  // FARVA_CLI_HPP

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rallyviz {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;  // bad input, usage errors, typed engine errors
inline constexpr int kExitInternal = 2;

/// Entry point of the `rallyviz` command. argv[0] is the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, const char* const* argv);

}  // namespace rallyviz

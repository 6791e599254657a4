#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace pcfgeo::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailed = 1;  // failed check or infeasible certificate
inline constexpr int kExitUsage = 2;

// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace pcfgeo::cli

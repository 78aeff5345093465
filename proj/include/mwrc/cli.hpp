#pragma once

// In-process command-line front end; tools/mwrc.cpp is a thin wrapper around
// run(). Exit codes: 0 success / positive verdict, 1 negative verdict,
// 2 any error (bad usage, unreadable input, library errors).

#include <ostream>
#include <string>
#include <vector>

namespace mwrc::cli {

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace mwrc::cli

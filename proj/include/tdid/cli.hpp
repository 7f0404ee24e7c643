#pragma once

// Command-line front end: estimate, simulate, replicate, validate.
// Exit codes: 0 ok, 1 usage, 2 ingestion, 3 nuisance fitting,
// 4 overlap/trimming, 5 estimation, 6 I/O.

#include <iosfwd>
#include <string>
#include <vector>

namespace tdid {

// args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tdid

#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>

namespace wps::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2 };

/// key=value lines; '#' starts a comment. Throws ParseError with the line.
std::map<std::string, std::string> read_config(const std::filesystem::path& path);

/// Entry point shared by the executable and the tests. Reads stdin only for
/// `solve` without an input file.
int run(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace wps::cli

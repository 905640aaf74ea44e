#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace besovwf::cli {

enum ExitCode : int {
    kOk = 0,
    kConfigError = 2,
    kNumericalFailure = 3,
    kHypothesisFailure = 4,
};

/// besovwf <command> --config <file> --out <dir> [--threads N] [--seed S]
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Named configurations; `command` selects the sections that apply.
std::vector<std::string> recipe_names();

}  // namespace besovwf::cli

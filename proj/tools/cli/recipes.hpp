#pragma once

#include "config.hpp"

#include <string>

namespace besovwf::cli {

/// Full configuration of a named recipe; sections not used by a command are dropped by the caller.
json recipe(const std::string& name);

}  // namespace besovwf::cli

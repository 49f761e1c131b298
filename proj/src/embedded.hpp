#pragma once

#include <map>
#include <string>

namespace sublin {

/// The canned configs under configs/, keyed by file name without extension.
const std::map<std::string, std::string>& shipped_configs();

}  // namespace sublin

#pragma once

#include <filesystem>

#include "wps/knowledge.hpp"

namespace wps {

/// $WPS_DATA_DIR when set, else the data directory configured at build time.
std::filesystem::path default_data_dir();

/// Bundled lexicons under `data_dir`/lexicon.
Resources load_resources(const std::filesystem::path& data_dir, std::size_t window = 3);

}  // namespace wps

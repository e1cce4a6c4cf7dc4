#include "wps/resources.hpp"

#include <cstdlib>

namespace wps {

std::filesystem::path default_data_dir() {
  if (const char* env = std::getenv("WPS_DATA_DIR"); env && *env) return env;
  return WPS_DEFAULT_DATA_DIR;
}

Resources load_resources(const std::filesystem::path& data_dir, std::size_t window) {
  return Resources::load(LexiconPaths::under(data_dir / "lexicon"), window);
}

}  // namespace wps

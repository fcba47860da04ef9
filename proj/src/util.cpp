#include "lightray/util.hpp"

#include <cstdlib>
#include <string>

namespace lightray {

int worker_count() {
  if (const char* env = std::getenv("LIGHTRAY_WORKERS")) {
    try {
      const int w = std::stoi(env);
      if (w >= 1) return w;
    } catch (const std::exception&) {
      // fall through to the default
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace lightray

#include "hlod/parallel.hpp"

#include <cstdlib>
#include <string>

namespace hlod {

int default_workers() {
  if (const char* env = std::getenv("HLOD_WORKERS")) {
    try {
      const int n = std::stoi(env);
      if (n >= 1) return n;
    } catch (...) {
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

}  // namespace hlod

#include "bdbc/parallel.hpp"

#include <cstdlib>
#include <string>

namespace bdbc {

int default_thread_count() {
  if (const char* env = std::getenv("BDBC_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n >= 1) {
        return n;
      }
    } catch (const std::exception&) {
      // fall through to the hardware count
    }
  }
  return std::max(1U, std::thread::hardware_concurrency());
}

} // namespace bdbc

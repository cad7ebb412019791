#include "sns/parallel.hpp"

#include <cstdlib>
#include <string>

namespace sns {

int thread_count() {
  const char* env = std::getenv("SNS_THREADS");
  int n = 1;
  if (env != nullptr) {
    try {
      n = std::stoi(env);
    } catch (...) {
      n = 1;
    }
  }
  const int hw = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  return std::clamp(n, 1, hw);
}

}  // namespace sns

#include "cpfm/runtime.hpp"

#include <Eigen/Core>
#include <cstdlib>
#include <string>

namespace cpfm {

int apply_thread_cap() {
  int threads = Eigen::nbThreads();
  if (const char* env = std::getenv("CPFM_THREADS")) {
    try {
      const int cap = std::stoi(env);
      if (cap >= 1) threads = std::min(threads, cap);
    } catch (const std::exception&) {
      // ignore malformed values, keep defaults
    }
  }
  Eigen::setNbThreads(threads);
  return threads;
}

}  // namespace cpfm

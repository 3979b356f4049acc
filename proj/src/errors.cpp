#include "stickycir/errors.hpp"

#include <iostream>
#include <mutex>

namespace stickycir::detail {

void warn(const std::string& msg) {
  static std::mutex mutex;
  std::lock_guard<std::mutex> lock(mutex);
  std::cerr << "warning: " << msg << '\n';
}

}  // namespace stickycir::detail

#include "qwalk/parallel.hpp"

#include <cstdlib>
#include <string>

#include "qwalk/errors.hpp"

namespace qwalk {

int workers_from_env() {
  const char* raw = std::getenv("QWALK_WORKERS");
  if (raw == nullptr || *raw == '\0') return 1;
  char* end = nullptr;
  const long value = std::strtol(raw, &end, 10);
  if (*end != '\0' || value < 1 || value > 1024) {
    throw ConfigError("QWALK_WORKERS", "expected an integer in 1..1024, got '" +
                                           std::string(raw) + "'");
  }
  return static_cast<int>(value);
}

}  // namespace qwalk

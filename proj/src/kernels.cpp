#include "tmd/kernels.hpp"

#include <cstdlib>

#include "tmd/errors.hpp"

namespace tmd::kern {
namespace {

const Backend* lookup(const std::string& name) {
  if (name == "scalar") return &scalar_backend();
  if (name == "avx2") return avx2_backend();
  return nullptr;
}

const Backend* initial_backend() {
  if (const char* env = std::getenv("TMD_KERNEL")) {
    if (const Backend* b = lookup(env)) return b;
    throw validation_error(std::string("TMD_KERNEL names an unknown or unsupported backend: ") +
                           env);
  }
  if (const Backend* b = avx2_backend()) return b;
  return &scalar_backend();
}

const Backend*& current() {
  static const Backend* backend = initial_backend();
  return backend;
}

}  // namespace

const Backend& active() { return *current(); }

void select(const std::string& name) {
  const Backend* b = lookup(name);
  if (b == nullptr)
    throw validation_error("unknown or unsupported kernel backend: " + name);
  current() = b;
}

std::vector<std::string> available() {
  std::vector<std::string> names{"scalar"};
  if (avx2_backend() != nullptr) names.emplace_back("avx2");
  return names;
}

}  // namespace tmd::kern
